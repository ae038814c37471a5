use std::path::PathBuf;
use std::process::{Command, Output};

fn ewcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ewcheck"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("EWCHECK_SEED")
        .output()
        .expect("run ewcheck")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn samples_check_clean() {
    for name in ["case1", "case2", "toda"] {
        let path = format!("samples/{name}.ew");
        let out = ewcheck(&["check", &path]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        assert!(stdout(&out).contains("check einstein-weyl: pass"));
    }
}

#[test]
fn json_report_parses() {
    let out = ewcheck(&["check", "--builtin", "case1", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["chi"]["zero"], true);
    assert_eq!(v["W"]["zero"], true);
    assert_eq!(v["classification"]["verdict"], "Case1");
}

#[test]
fn classify_verdicts() {
    let c1 = ewcheck(&["classify", "samples/case1.ew"]);
    assert_eq!(c1.status.code(), Some(0));
    assert!(stdout(&c1).contains("Case1"));
    let c2 = ewcheck(&["classify", "--builtin", "case2", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&c2.stdout).unwrap();
    assert_eq!(v["verdict"], "Case2");
    assert_eq!(v["witness"]["value"], "-f(t)/y");
    let bad = ewcheck(&["classify", "tests/fixtures/not_ew.ew"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn not_ew_fails_check() {
    let out = ewcheck(&["check", "tests/fixtures/not_ew.ew"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("check einstein-weyl: FAIL"));
}

#[test]
fn malformed_files_report_positions() {
    let cases = [
        ("syntax_error", ":5:19:"),
        ("missing_coordinate", ":1:8:"),
        ("duplicate", ":5:3:"),
        ("unknown_symbol", ":5:12:"),
        ("fractional_power", ":4:14:"),
        ("singular_metric", ":2:1:"),
    ];
    for (name, pos) in cases {
        let path = format!("tests/fixtures/{name}.ew");
        let out = ewcheck(&["check", &path]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(
            stderr(&out).contains(&format!("{path}{pos}")),
            "{name}: {}",
            stderr(&out)
        );
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ewcheck(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ewcheck(&["check"]).status.code(), Some(2));
    assert_eq!(ewcheck(&["check", "no/such/file.ew"]).status.code(), Some(2));
    let bad_t = ewcheck(&["transform", "samples/case1.ew", "--T", "2*t", "--Tinv", "t"]);
    assert_eq!(bad_t.status.code(), Some(2));
}

#[test]
fn crosscheck_respects_seed_variable() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_ewcheck"))
            .args(["check", "--builtin", "case2", "--crosscheck", "3", "--json"])
            .env("EWCHECK_SEED", seed)
            .output()
            .unwrap()
    };
    let a = run("5");
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let va: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let vb: serde_json::Value = serde_json::from_slice(&run("5").stdout).unwrap();
    let vc: serde_json::Value = serde_json::from_slice(&run("6").stdout).unwrap();
    assert_eq!(va["crosscheck"], vb["crosscheck"]);
    assert_ne!(va["crosscheck"], vc["crosscheck"]);
}

#[test]
fn rescale_prints_a_structure_file() {
    let out = ewcheck(&["rescale", "samples/case2.ew", "--phi", "1 + t^2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# check W-weight-minus-2: pass"));
    let file: PathBuf = std::env::temp_dir().join(format!("ewcheck-rescaled-{}.ew", std::process::id()));
    std::fs::write(&file, &text).unwrap();
    let again = ewcheck(&["classify", file.to_str().unwrap()]);
    std::fs::remove_file(&file).ok();
    assert_eq!(again.status.code(), Some(0));
    assert!(stdout(&again).contains("Case2"));
}

#[test]
fn transforms_preserve_the_verdict() {
    for (t, tinv, p) in [("2*t", "t/2", "0"), ("t + 3", "t - 3", "y^2"), ("1/t", "1/t", "y*t")] {
        let out = ewcheck(&["transform", "samples/case1.ew", "--T", t, "--Tinv", tinv, "--P", p]);
        assert_eq!(out.status.code(), Some(0), "T = {t}: {}", stderr(&out));
        let text = stdout(&out);
        assert!(text.contains("# check einstein-weyl-preserved: pass"), "{text}");
        assert!(text.contains("# check verdict-unchanged: pass"), "{text}");
    }
}

#[test]
fn toda_kernels() {
    let ok = ewcheck(&["toda", "--kernel", "2*(z + R(v))/(1 + v*w)"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    let bad = ewcheck(&["toda", "--kernel", "z"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("toda residual = 2"));
}

#[test]
fn eval_values_and_poles() {
    let out = ewcheck(&["eval", "samples/case1.ew", "--point", "y=1,x=1,t=1", "--quantity", "F"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("F[1,3] = 1/2"));
    let w = ewcheck(&["eval", "samples/case2.ew", "--point", "y=1,x=2,t=0.5"]);
    assert_eq!(w.status.code(), Some(0), "{}", stderr(&w));
    let pole = ewcheck(&["eval", "samples/case2.ew", "--point", "y=0,x=1,t=1"]);
    assert_eq!(pole.status.code(), Some(3));
}

#[test]
fn jet_cap_from_environment() {
    let run = |cap: &str| {
        Command::new(env!("CARGO_BIN_EXE_ewcheck"))
            .args(["check", "--builtin", "case1"])
            .env("EWCHECK_MAX_JET", cap)
            .output()
            .unwrap()
    };
    let capped = run("0");
    assert_eq!(capped.status.code(), Some(2));
    assert!(stderr(&capped).contains("exceeds the cap 0"));
    assert_eq!(run("nope").status.code(), Some(2));
    assert_eq!(run("6").status.code(), Some(0));
}
