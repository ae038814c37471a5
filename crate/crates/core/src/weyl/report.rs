use std::collections::BTreeMap;

use super::{
    bianchi_residual, classify, contracted_bianchi, ew_residual, faraday, nullity, star_faraday, weyl_curvature,
    weyl_ricci, weyl_scalar, Classification, Verdict, WeylError, WeylStructure,
};
use crate::expr::{poly_gcd, Expr, Poly};
use crate::tensor::Tensor;

/// Everything the engine computes about one structure.
#[derive(Clone, Debug)]
pub struct CurvatureReport {
    pub christoffel: Tensor,
    pub ricci: Tensor,
    pub ricci_scalar: Expr,
    pub weyl_ricci: Tensor,
    pub weyl_scalar: Expr,
    pub chi: Tensor,
    pub faraday: Tensor,
    pub star_faraday: Result<Tensor, WeylError>,
    pub nullity: (Expr, Expr),
    pub bianchi: Tensor,
    pub contracted_bianchi: Tensor,
    pub weyl_curvature: Tensor,
    pub classification: Result<Classification, WeylError>,
    pub excluded_loci: Vec<Expr>,
}

impl CurvatureReport {
    pub fn verdict(&self) -> Result<Verdict, WeylError> {
        match &self.classification {
            Ok(c) => Ok(c.verdict),
            Err(WeylError::NotEW) => Ok(Verdict::NotEW),
            Err(WeylError::NotScalarFlat) => Ok(Verdict::NotScalarFlat),
            Err(e) => Err(e.clone()),
        }
    }
}

pub fn curvature_report(s: &WeylStructure) -> Result<CurvatureReport, WeylError> {
    let (ricci, ricci_scalar) = s.ricci()?;
    Ok(CurvatureReport {
        christoffel: s.christoffel()?,
        ricci,
        ricci_scalar,
        weyl_ricci: weyl_ricci(s)?,
        weyl_scalar: weyl_scalar(s)?,
        chi: ew_residual(s)?,
        faraday: faraday(s.omega())?,
        star_faraday: star_faraday(s),
        nullity: nullity(s)?,
        bianchi: bianchi_residual(s)?,
        contracted_bianchi: contracted_bianchi(s)?,
        weyl_curvature: weyl_curvature(s)?,
        classification: classify(s),
        excluded_loci: excluded_loci(s)?,
    })
}

/// Squarefree factors of `p` found by splitting off monomial content and
/// repeated parts.
fn locus_factors(p: &Poly, out: &mut Vec<Poly>) {
    if p.is_constant() {
        return;
    }
    let mono = p.monomial_content();
    for (v, _) in mono.factors() {
        out.push(Poly::var(v));
    }
    let rest = p.div_monomial(&mono).primitive();
    if rest.is_constant() {
        return;
    }
    let Some(&v) = rest.variables().iter().next() else {
        return;
    };
    let g = poly_gcd(&rest, &rest.derivative(v));
    let squarefree = if g.is_constant() {
        rest
    } else {
        rest.div_exact(&g).expect("gcd divides").primitive()
    };
    out.push(squarefree);
}

/// Denominators met in the metric, its inverse, `ω` and the Christoffel
/// symbols; the structure is only asserted off their zero sets.
pub fn excluded_loci(s: &WeylStructure) -> Result<Vec<Expr>, WeylError> {
    let gamma = s.christoffel()?;
    let mut factors = Vec::new();
    let sources = [s.metric().tensor(), s.metric().inverse(), s.omega(), &gamma];
    for t in sources {
        for e in t.components() {
            locus_factors(e.denominator(), &mut factors);
        }
    }
    let mut unique: BTreeMap<String, Expr> = BTreeMap::new();
    for f in factors {
        let e = Expr::from_poly(f);
        unique.entry(e.render()).or_insert(e);
    }
    Ok(unique.into_values().collect())
}
