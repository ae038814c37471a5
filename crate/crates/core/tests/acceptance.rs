//! Acceptance criteria, one line each. Run with
//! `cargo test --test acceptance`; exits nonzero if any criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ewcheck::catalog::{
    case1_formal, case2_formal, dkp_constant_vector, flat, function_of_t, general_ansatz, toda_form, toda_formal,
    toda_kernel, toda_residual, toda_weyl_scalar,
};
use ewcheck::expr::{Expr, Function, Symbol};
use ewcheck::frontend::{parse_structure, Report};
use ewcheck::numeric::{convergence_ratio, cross_check, default_instantiation, sample_points, DEFAULT_MARGIN};
use ewcheck::tensor::{exterior_derivative, hodge_star_two_form, metric_trace, wedge_one_forms, Chart, Tensor};
use ewcheck::weyl::{
    bianchi_residual, classify, conformal_rescale, contracted_bianchi, curvature_report, ew_residual,
    ew_residual_from_weyl_ricci, faraday, nullity, weighted_derivative_vector, weyl_ricci, weyl_scalar, Verdict,
    WeylStructure,
};
use num_rational::BigRational;

use common::{coord, random_rational, random_structure, rng, vars};

const SEED: u64 = 20_240_611;
const CROSSCHECK_TOL: f64 = 1e-5;
const CROSSCHECK_POINTS: usize = 5;
const RATIO_RANGE: (f64, f64) = (3.5, 4.5);
const RATIO_STEP: f64 = 1e-2;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn catalog() -> Vec<(&'static str, WeylStructure)> {
    vec![
        ("flat", flat()),
        ("case1", case1_formal()),
        ("case2", case2_formal()),
        ("toda", toda_formal()),
    ]
}

fn scalar_flat_ew(s: &WeylStructure) -> Outcome {
    let chi = ew_residual(s).map_err(err)?;
    let w = weyl_scalar(s).map_err(err)?;
    let nonzero = chi.nonzero().len();
    Ok((
        nonzero == 0 && w.is_zero(),
        format!("{nonzero}/9 chi components nonzero, W = {}", w.render()),
    ))
}

fn c1() -> Outcome {
    scalar_flat_ew(&case1_formal())
}

fn c2() -> Outcome {
    scalar_flat_ew(&case2_formal())
}

fn c3() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in [("case1", case1_formal()), ("case2", case2_formal())] {
        let (ff, wwf) = nullity(&s).map_err(err)?;
        ok &= ff.is_zero() && wwf.is_zero();
        parts.push(format!("{name} = ({}, {})", ff.render(), wwf.render()));
    }
    Ok((ok, parts.join(", ")))
}

fn c4() -> Outcome {
    let mut r = rng(SEED);
    let mut literal = 0;
    let mut general = 0;
    for _ in 0..25 {
        let s = random_structure(&mut r);
        literal += bianchi_residual(&s).map_err(err)?.is_zero() as usize;
        general += contracted_bianchi(&s).map_err(err)?.is_zero() as usize;
    }
    let mut cat = 0;
    for (_, s) in catalog() {
        cat += bianchi_residual(&s).map_err(err)?.is_zero() as usize;
    }
    Ok((
        literal == 25 && cat == 4,
        format!(
            "B = 0 on {literal}/25 random and {cat}/4 catalog structures; \
             B - 2 div chi + w.chi = 0 on {general}/25 random"
        ),
    ))
}

fn c5() -> Outcome {
    let c1 = classify(&case1_formal()).map_err(err)?;
    let alpha_want = Tensor::one_form(
        &Chart::yxt(),
        [Expr::zero(), Expr::zero(), &function_of_t("R") * &Expr::rational(1, 2)],
    );
    let alpha = c1.alpha.clone().ok_or("case1 has no alpha")?;
    let closed = exterior_derivative(&alpha).map_err(err)?.is_zero();
    let ok1 = c1.verdict == Verdict::Case1 && alpha == alpha_want && closed;

    let c2 = classify(&case2_formal()).map_err(err)?;
    let f = Function::new("f", &[Symbol::coordinate("t")]).formal();
    let want = (-&f).checked_div(&coord("y")).map_err(err)?;
    let ok2 = c2.verdict == Verdict::Case2 && c2.witness == Some((0, 2, want));
    let witness = c2
        .witness
        .map(|(i, j, e)| format!("[{},{}] = {}", i + 1, j + 1, e.render()))
        .unwrap_or_else(|| "none".into());
    Ok((
        ok1 && ok2,
        format!(
            "case1 {:?} alpha = {} dt (closed: {closed}); case2 {:?} witness {witness}",
            c1.verdict,
            alpha.get(&[2]).render(),
            c2.verdict
        ),
    ))
}

fn c6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in [("h1", case1_formal()), ("h2", case2_formal())] {
        let f = faraday(s.omega()).map_err(err)?;
        let star = hodge_star_two_form(&f, s.metric(), &s.levi_civita().map_err(err)?).map_err(err)?;
        let dt = Tensor::one_form(s.chart(), [Expr::zero(), Expr::zero(), Expr::one()]);
        let d_star = exterior_derivative(&star).map_err(err)?;
        let wedge = wedge_one_forms(s.omega(), &star).map_err(err)?;
        let eq = d_star.scale(&Expr::int(2)).add(&wedge).map_err(err)?;
        ok &= star == dt && eq.is_zero();
        parts.push(format!(
            "{name}: *F = dt {}, 2d*F + w^*F = 0 {}",
            star == dt,
            eq.is_zero()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c7() -> Outcome {
    let [y, _, t] = Chart::yxt().coords();
    let x = coord("x");
    let l = Function::new("l", &[y, t]).formal();
    let m = Function::new("m", &[y, t]).formal();
    let n = Function::new("n", &[y, t]).formal();
    let ly = l.diff(y).map_err(err)?;
    let f = &x * &l;
    let g = &(&(&(&x * &x) * &ly) * &Expr::rational(1, 2)) + &(&(&x * &m) + &n);
    let s = general_ansatz(&f, &g).map_err(err)?;
    let w = weyl_scalar(&s).map_err(err)?;
    let stated = &(&(&l * &l) * &Expr::int(3)) - &(&ly * &Expr::int(6));
    let stated = &stated * &Expr::rational(1, 2);
    let ok = w == stated;
    Ok((
        ok,
        format!(
            "W = {}; stated (3l^2 - 6l_y)/2, W equals its negative: {}",
            w.render(),
            w == -&stated
        ),
    ))
}

fn c8() -> Outcome {
    let r = Function::new("R", &[Symbol::coordinate("v")]).formal();
    let residual_zero = toda_residual(&toda_kernel(&r)).map_err(err)?.is_zero();
    let scalar_flat = weyl_scalar(&toda_formal()).map_err(err)?.is_zero();
    let v = vars(&Chart::vwz());
    let mut g = rng(SEED + 8);
    let mut agree = 0;
    let mut identity = 0;
    for _ in 0..10 {
        let n = random_rational(&mut g, &v);
        let w = weyl_scalar(&toda_form(&n).map_err(err)?).map_err(err)?;
        let path = toda_weyl_scalar(&n).map_err(err)?;
        agree += (w == path) as usize;
        let corrected =
            &(&path * &Expr::int(6)) - &toda_residual(&n).map_err(err)?.checked_div(&(&n * &n)).map_err(err)?;
        identity += (w == corrected) as usize;
    }
    Ok((
        residual_zero && scalar_flat && agree == 10,
        format!(
            "toda residual = 0 {residual_zero}, W(toda) = 0 {scalar_flat}, paths agree on {agree}/10; \
             W = 6(u_zz/2 + u_z^2/4) - residual/N^2 on {identity}/10"
        ),
    ))
}

fn c9() -> Outcome {
    let s = case1_formal();
    let coords = s.chart().coords();
    let half_r = &function_of_t("R") * &Expr::rational(1, 2);
    let f = Symbol::custom("f", |f| vec![(coords[2], -(&half_r * &Expr::symbol(f)))]);
    let v = Tensor::vector(s.chart(), [Expr::zero(), Expr::symbol(f), Expr::zero()]);
    let dv = weighted_derivative_vector(&s, &v, &q(-1, 2)).map_err(err)?;
    let (vc, m) = dkp_constant_vector(&s).map_err(err)?;
    let dvc = weighted_derivative_vector(&s, &vc, &m).map_err(err)?;
    Ok((
        dv.is_zero() && dvc.is_zero(),
        format!(
            "D(f d_x) = 0 {}, catalog vector parallel {}",
            dv.is_zero(),
            dvc.is_zero()
        ),
    ))
}

fn c10() -> Outcome {
    let mut r = rng(SEED + 10);
    let mut chi_ok = 0;
    let mut trace_ok = 0;
    for _ in 0..25 {
        let s = random_structure(&mut r);
        chi_ok += (ew_residual_from_weyl_ricci(&s).map_err(err)? == ew_residual(&s).map_err(err)?) as usize;
        let trace = metric_trace(&weyl_ricci(&s).map_err(err)?, s.metric());
        trace_ok += (trace == weyl_scalar(&s).map_err(err)?) as usize;
    }
    Ok((
        chi_ok == 25 && trace_ok == 25,
        format!("tracefree(sym W_ij) = chi on {chi_ok}/25, h^ij W_ij = W on {trace_ok}/25"),
    ))
}

fn c11() -> Outcome {
    let v = vars(&Chart::yxt());
    let mut g = rng(SEED + 11);
    let structures = [case1_formal(), case2_formal(), random_structure(&mut g)];
    let verdicts: Vec<Option<Verdict>> = structures.iter().map(|s| classify(s).ok().map(|c| c.verdict)).collect();
    let chi0: Vec<_> = structures
        .iter()
        .map(ew_residual)
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let w0: Vec<_> = structures
        .iter()
        .map(weyl_scalar)
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let (mut chi_ok, mut w_ok, mut verdict_ok, mut total) = (0, 0, 0, 0);
    for _ in 0..10 {
        let phi = random_rational(&mut g, &v);
        let phi2 = (&phi * &phi).recip().map_err(err)?;
        for (k, s) in structures.iter().enumerate() {
            total += 1;
            let t = conformal_rescale(s, &phi).map_err(err)?;
            chi_ok += (ew_residual(&t).map_err(err)? == chi0[k]) as usize;
            w_ok += (weyl_scalar(&t).map_err(err)? == &w0[k] * &phi2) as usize;
            verdict_ok += (classify(&t).ok().map(|c| c.verdict) == verdicts[k]) as usize;
        }
    }
    Ok((
        chi_ok == total && w_ok == total && verdict_ok == total,
        format!(
            "10 phi x 3 structures: chi unchanged {chi_ok}/{total}, W -> phi^-2 W {w_ok}/{total}, \
             verdict unchanged {verdict_ok}/{total}"
        ),
    ))
}

fn c12() -> Outcome {
    let inst = default_instantiation();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in [
        ("case1", case1_formal()),
        ("case2", case2_formal()),
        ("toda", toda_formal()),
    ] {
        let points = sample_points(&s, &inst, CROSSCHECK_POINTS, SEED, DEFAULT_MARGIN).map_err(err)?;
        let report = cross_check(&s, &points, CROSSCHECK_TOL).map_err(err)?;
        let concrete = s.substitute(&inst).map_err(err)?;
        let ratio = convergence_ratio(&concrete, &points[0].coords, RATIO_STEP).map_err(err)?;
        let ratio_ok = (RATIO_RANGE.0..=RATIO_RANGE.1).contains(&ratio);
        ok &= report.passed() && ratio_ok;
        parts.push(format!("{name}: max err {:.1e}, ratio {ratio:.3}", report.max_error()));
    }
    Ok((ok, parts.join("; ")))
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn c13() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in [
        ("case1", case1_formal()),
        ("case2", case2_formal()),
        ("toda", toda_formal()),
    ] {
        let path = crate_dir().join("samples").join(format!("{name}.ew"));
        let text = std::fs::read_to_string(&path).map_err(err)?;
        let parsed = parse_structure(&text).map_err(err)?.to_structure().map_err(err)?;
        let from_file = Report::new(&parsed, &curvature_report(&parsed).map_err(err)?);
        let from_catalog = Report::new(&s, &curvature_report(&s).map_err(err)?);
        let same = from_file == from_catalog;
        ok &= same;
        parts.push(format!("{name} {}", if same { "identical" } else { "differs" }));
    }
    let fixtures = [
        "syntax_error",
        "missing_coordinate",
        "duplicate",
        "unknown_symbol",
        "fractional_power",
        "singular_metric",
    ];
    let mut good = 0;
    for f in fixtures {
        let path = crate_dir().join("tests/fixtures").join(format!("{f}.ew"));
        if fixture_rejected(&path)? {
            good += 1;
        }
    }
    ok &= good == fixtures.len();
    parts.push(format!(
        "{good}/{} malformed fixtures exit 2 with file:line:col",
        fixtures.len()
    ));
    Ok((ok, parts.join(", ")))
}

fn fixture_rejected(path: &Path) -> Result<bool, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ewcheck"))
        .arg("check")
        .arg(path)
        .output()
        .map_err(err)?;
    let stderr = String::from_utf8_lossy(&out.stderr);
    let prefix = format!("{}:", path.display());
    let positioned = stderr.lines().any(|l| {
        l.split_once(&prefix).is_some_and(|(_, rest)| {
            let mut it = rest.splitn(3, ':');
            let line = it.next().and_then(|s| s.parse::<usize>().ok());
            let col = it.next().and_then(|s| s.parse::<usize>().ok());
            line.is_some() && col.is_some()
        })
    });
    Ok(out.status.code() == Some(2) && positioned)
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("case 1 is scalar-flat Einstein-Weyl", c1),
        ("case 2 is scalar-flat Einstein-Weyl", c2),
        ("F is null on both cases", c3),
        ("Bianchi identity on random and catalog structures", c4),
        ("classification of both cases", c5),
        ("Hodge dual of F and d*F", c6),
        ("scalar of the general ansatz", c7),
        ("Toda solution and scalar", c8),
        ("dKP covariantly constant vector", c9),
        ("conventions pinned on random structures", c10),
        ("conformal covariance", c11),
        ("numeric oracle agreement", c12),
        ("frontend round trip and diagnostics", c13),
    ];
    let mut failed = Vec::new();
    for (k, (title, run)) in criteria.iter().enumerate() {
        let n = k + 1;
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {n:>2} {} {title}: {detail} ({secs:.2}s)",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 13 criteria pass");
    } else {
        println!("acceptance: {} of 13 criteria fail: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
