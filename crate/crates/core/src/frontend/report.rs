//! Machine-readable rendering of a [`CurvatureReport`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::StructureFile;
use crate::expr::Expr;
use crate::numeric::CrossCheckReport;
use crate::tensor::Tensor;
use crate::weyl::{CurvatureReport, WeylError, WeylStructure};

pub const ENGINE: &str = "ewcheck";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

type Components = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Engine {
    pub name: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureSection {
    pub coords: Vec<String>,
    pub functions: Vec<String>,
    pub metric: Components,
    pub omega: Components,
    pub orientation: i8,
    pub refpoint: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Vec<i8>>,
}

/// A quantity asserted to vanish: `zero` plus the offending components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vanishing {
    pub zero: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub components: Components,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nullity {
    pub null: bool,
    #[serde(rename = "F^ij F_ij")]
    pub f_squared: String,
    #[serde(rename = "w^i w^j F_ij")]
    pub omega_omega_f: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub slot: [usize; 2],
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Components>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckSection {
    pub points: Vec<[f64; 3]>,
    pub tolerance: f64,
    pub max_relative_error: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl From<&CrossCheckReport> for CrossCheckSection {
    fn from(r: &CrossCheckReport) -> Self {
        CrossCheckSection {
            points: r.points.clone(),
            tolerance: r.tolerance,
            max_relative_error: r.max_error(),
            passed: r.passed(),
            failures: r
                .failures()
                .map(|e| {
                    format!(
                        "point {}: {} symbolic {:e} numeric {:e} (relative error {:e})",
                        e.point + 1,
                        e.quantity,
                        e.symbolic,
                        e.numeric,
                        e.relative_error
                    )
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub engine: Engine,
    pub conventions: BTreeMap<String, String>,
    pub structure: StructureSection,
    pub christoffel: Components,
    pub ricci: Components,
    pub ricci_scalar: String,
    pub weyl_ricci: Components,
    #[serde(rename = "W")]
    pub weyl_scalar: Vanishing,
    pub chi: Vanishing,
    #[serde(rename = "F")]
    pub faraday: Components,
    #[serde(rename = "starF")]
    pub star_faraday: Result<Components, String>,
    pub nullity: Nullity,
    pub bianchi: Vanishing,
    pub contracted_bianchi: Vanishing,
    pub weyl_curvature: Vanishing,
    pub classification: ClassificationSection,
    pub excluded_loci: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crosscheck: Option<CrossCheckSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckOutcome>,
}

fn conventions() -> BTreeMap<String, String> {
    [
        ("symmetrization", "A_(ij) = (A_ij + A_ji)/2, A_[ij] = (A_ij - A_ji)/2"),
        ("weyl", "D_i h_jk = w_i h_jk; gauge h -> phi^2 h, w -> w + 2 dphi/phi"),
        ("faraday", "F_ij = D_[i w_j] = (dw)_ij/2"),
        ("levi_civita", "eps_ijk = orientation * sqrt|det h| * sign(ijk)"),
        ("hodge", "(*F)_i = eps_ilm F^lm"),
        (
            "riemann",
            "R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb",
        ),
        ("ricci", "R_ij = R^k_ikj, r = h^ij R_ij"),
        (
            "weyl_ricci",
            "W_ij = R_ij + D_i w_j - D_j w_i/2 + w_i w_j/4 + h_ij (-w_k w^k/4 + D_k w^k/2)",
        ),
        ("weyl_scalar", "W = r + 2 D_k w^k - w_k w^k/2"),
        (
            "chi",
            "chi_ij = R_ij + D_(i w_j)/2 + w_i w_j/4 - (r + D_k w^k/2 + w_k w^k/4) h_ij/3",
        ),
        ("indices", "1-based, in the order of coords"),
        ("omitted", "zero components are omitted"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

fn key(idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("[{}]", parts.join(","))
}

/// Nonzero components, keyed by 1-based index.
pub(crate) fn components(t: &Tensor) -> Components {
    t.nonzero()
        .into_iter()
        .map(|(idx, e)| (key(&idx), e.render()))
        .collect()
}

fn vanishing(t: &Tensor) -> Vanishing {
    Vanishing {
        zero: t.is_zero(),
        components: components(t),
    }
}

fn scalar_vanishing(e: &Expr) -> Vanishing {
    let mut components = Components::new();
    if !e.is_zero() {
        components.insert("value".into(), e.render());
    }
    Vanishing {
        zero: e.is_zero(),
        components,
    }
}

pub(crate) fn structure_section(s: &WeylStructure) -> StructureSection {
    let file = StructureFile::from_structure(s);
    StructureSection {
        coords: s.chart().names().to_vec(),
        functions: file
            .functions
            .iter()
            .map(|f| {
                let params: Vec<String> = f.params().iter().map(|p| p.name()).collect();
                format!("{}({})", f.name(), params.join(","))
            })
            .collect(),
        metric: s
            .metric()
            .tensor()
            .nonzero()
            .into_iter()
            .filter(|(idx, _)| idx[0] <= idx[1])
            .map(|(idx, e)| (key(&idx), e.render()))
            .collect(),
        omega: components(s.omega()),
        orientation: s.orientation(),
        refpoint: s.refpoint().iter().map(|q| q.to_string()).collect(),
        signature: s.chart().signature().map(|sig| sig.to_vec()),
    }
}

fn classification_section(r: &CurvatureReport) -> ClassificationSection {
    let verdict = r.verdict();
    let mut out = ClassificationSection {
        verdict: verdict.as_ref().ok().map(|v| v.as_str().to_string()),
        alpha: None,
        witness: None,
        error: verdict.err().map(|e| e.to_string()),
    };
    if let Ok(c) = &r.classification {
        out.alpha = c.alpha.as_ref().map(components);
        out.witness = c.witness.as_ref().map(|(i, j, e)| Witness {
            slot: [i + 1, j + 1],
            value: e.render(),
        });
    }
    out
}

impl Report {
    pub fn new(s: &WeylStructure, r: &CurvatureReport) -> Report {
        let (ff, wwf) = &r.nullity;
        Report {
            engine: Engine {
                name: ENGINE.into(),
                version: VERSION.into(),
            },
            conventions: conventions(),
            structure: structure_section(s),
            christoffel: components(&r.christoffel),
            ricci: components(&r.ricci),
            ricci_scalar: r.ricci_scalar.render(),
            weyl_ricci: components(&r.weyl_ricci),
            weyl_scalar: scalar_vanishing(&r.weyl_scalar),
            chi: vanishing(&r.chi),
            faraday: components(&r.faraday),
            star_faraday: r.star_faraday.as_ref().map(components).map_err(WeylError::to_string),
            nullity: Nullity {
                null: ff.is_zero(),
                f_squared: ff.render(),
                omega_omega_f: wwf.render(),
            },
            bianchi: vanishing(&r.bianchi),
            contracted_bianchi: vanishing(&r.contracted_bianchi),
            weyl_curvature: vanishing(&r.weyl_curvature),
            classification: classification_section(r),
            excluded_loci: r.excluded_loci.iter().map(Expr::render).collect(),
            crosscheck: None,
            checks: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn write_components(out: &mut String, name: &str, c: &Components) {
    for (k, v) in c {
        let _ = writeln!(out, "  {name}{k} = {v}");
    }
}

fn zero_line(out: &mut String, name: &str, v: &Vanishing) {
    if v.zero {
        let _ = writeln!(out, "{name}: identically zero");
    } else {
        let _ = writeln!(out, "{name}: NOT zero");
        write_components(out, name, &v.components);
    }
}

/// Human-readable summary.
pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let st = &r.structure;
    let _ = writeln!(out, "{} {}", r.engine.name, r.engine.version);
    let _ = writeln!(out, "coords: {}", st.coords.join(" "));
    if !st.functions.is_empty() {
        let _ = writeln!(out, "functions: {}", st.functions.join(" "));
    }
    let _ = writeln!(out, "metric:");
    write_components(&mut out, "g", &st.metric);
    let _ = writeln!(out, "omega:");
    write_components(&mut out, "w", &st.omega);
    zero_line(&mut out, "chi", &r.chi);
    if r.weyl_scalar.zero {
        let _ = writeln!(out, "W: identically zero");
    } else {
        let _ = writeln!(out, "W = {}", r.weyl_scalar.components["value"]);
    }
    let _ = writeln!(out, "r = {}", r.ricci_scalar);
    let _ = writeln!(out, "F:");
    write_components(&mut out, "F", &r.faraday);
    match &r.star_faraday {
        Ok(c) => {
            let _ = writeln!(out, "*F:");
            write_components(&mut out, "*F", c);
        }
        Err(e) => {
            let _ = writeln!(out, "*F: unavailable ({e})");
        }
    }
    let _ = writeln!(
        out,
        "nullity: F^ij F_ij = {}, w^i w^j F_ij = {}{}",
        r.nullity.f_squared,
        r.nullity.omega_omega_f,
        if r.nullity.null { " (null)" } else { "" }
    );
    zero_line(&mut out, "bianchi", &r.bianchi);
    zero_line(&mut out, "contracted bianchi", &r.contracted_bianchi);
    let _ = writeln!(
        out,
        "weyl curvature: {}",
        if r.weyl_curvature.zero {
            "identically zero (flat)"
        } else {
            "nonzero"
        }
    );
    let c = &r.classification;
    match (&c.verdict, &c.error) {
        (Some(v), _) => {
            let _ = writeln!(out, "classification: {v}");
        }
        (None, Some(e)) => {
            let _ = writeln!(out, "classification: undetermined ({e})");
        }
        _ => {}
    }
    if let Some(a) = &c.alpha {
        write_components(&mut out, "alpha", a);
    }
    if let Some(w) = &c.witness {
        let _ = writeln!(out, "  witness D(f *F)[{},{}] = {}", w.slot[0], w.slot[1], w.value);
    }
    if r.excluded_loci.is_empty() {
        let _ = writeln!(out, "excluded loci: none");
    } else {
        let _ = writeln!(out, "excluded loci: {}", r.excluded_loci.join(", "));
    }
    if let Some(x) = &r.crosscheck {
        let _ = writeln!(
            out,
            "crosscheck: {} at {} points, max relative error {:e} (tolerance {:e})",
            if x.passed { "pass" } else { "FAIL" },
            x.points.len(),
            x.max_relative_error,
            x.tolerance
        );
        for f in &x.failures {
            let _ = writeln!(out, "  {f}");
        }
    }
    for c in &r.checks {
        let _ = write!(out, "check {}: {}", c.name, if c.passed { "pass" } else { "FAIL" });
        if let Some(d) = &c.detail {
            let _ = write!(out, " ({d})");
        }
        out.push('\n');
    }
    out
}
