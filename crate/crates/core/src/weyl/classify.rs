use num_rational::BigRational;
use serde::Serialize;

use super::{
    ew_residual, star_faraday, weighted_derivative_oneform, weyl_curvature, weyl_scalar, WeylError, WeylStructure,
};
use crate::expr::{Expr, Function};
use crate::tensor::{exterior_derivative, Slot, Tensor};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Flat,
    Case1,
    Case2,
    NotScalarFlat,
    NotEW,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Flat => "Flat",
            Verdict::Case1 => "Case1",
            Verdict::Case2 => "Case2",
            Verdict::NotScalarFlat => "NotScalarFlat",
            Verdict::NotEW => "NotEW",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// `∗F`, for non-flat structures.
    pub dual: Option<Tensor>,
    /// `P = D(∗F)` at weight 3/2, for non-flat structures.
    pub parallelism: Option<Tensor>,
    /// Case 1: the closed one-form with `P_ij = α_i (∗F)_j`.
    pub alpha: Option<Tensor>,
    /// Case 2: a nonzero component of `D(f ∗F)` for a formal `f` of the
    /// last coordinate, as `(i, j, value)`.
    pub witness: Option<(usize, usize, Expr)>,
}

impl Classification {
    fn simple(verdict: Verdict) -> Classification {
        Classification {
            verdict,
            dual: None,
            parallelism: None,
            alpha: None,
            witness: None,
        }
    }
}

/// Rank-one factorization `P_ij = α_i β_j`, if it exists.
fn factor_rank_one(p: &Tensor, beta: &Tensor) -> Result<Option<Tensor>, WeylError> {
    let Some(k) = (0..3).find(|&k| !beta.get(&[k]).is_zero()) else {
        return Ok(None);
    };
    for i in 0..3 {
        for j in 0..3 {
            let minor = &(p.get(&[i, j]) * beta.get(&[k])) - &(p.get(&[i, k]) * beta.get(&[j]));
            if !minor.is_zero() {
                return Ok(None);
            }
        }
    }
    let alpha = Tensor::try_from_fn::<WeylError>(p.chart(), &[Slot::Down], |idx| {
        Ok(p.get(&[idx[0], k]).checked_div(beta.get(&[k]))?)
    })?;
    Ok(Some(alpha))
}

/// Decides between flat, case 1 and case 2 for a scalar-flat Einstein-Weyl
/// structure.
pub fn classify(s: &WeylStructure) -> Result<Classification, WeylError> {
    if !ew_residual(s)?.is_zero() {
        return Err(WeylError::NotEW);
    }
    if !weyl_scalar(s)?.is_zero() {
        return Err(WeylError::NotScalarFlat);
    }
    if weyl_curvature(s)?.is_zero() {
        return Ok(Classification::simple(Verdict::Flat));
    }
    let beta = star_faraday(s)?;
    if beta.is_zero() {
        return Err(WeylError::DegenerateDual);
    }
    let m = BigRational::new(3.into(), 2.into());
    let p = weighted_derivative_oneform(s, &beta, &m)?;
    if let Some(alpha) = factor_rank_one(&p, &beta)? {
        if exterior_derivative(&alpha)?.is_zero() {
            return Ok(Classification {
                verdict: Verdict::Case1,
                dual: Some(beta),
                parallelism: Some(p),
                alpha: Some(alpha),
                witness: None,
            });
        }
    }
    let t = s.chart().coord(2);
    let f = Function::new("f", &[t]).formal();
    let fbeta = beta.scale(&f);
    let dfb = weighted_derivative_oneform(s, &fbeta, &m)?;
    let witness = first_nonzero_off_gradient(&dfb, &beta);
    Ok(Classification {
        verdict: Verdict::Case2,
        dual: Some(beta),
        parallelism: Some(p),
        alpha: None,
        witness,
    })
}

/// The first component of `D(f β)` not involving `f'`, preferring one in a
/// column where `β` is nonzero.
fn first_nonzero_off_gradient(d: &Tensor, beta: &Tensor) -> Option<(usize, usize, Expr)> {
    let free_of_jets = |e: &Expr| {
        e.symbols()
            .iter()
            .all(|s| s.jet().is_none_or(|j| j.function.name() != "f" || j.total_order() == 0))
    };
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for j in 0..3 {
        if !beta.get(&[j]).is_zero() {
            candidates.extend((0..3).map(|i| (i, j)));
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            if !candidates.contains(&(i, j)) {
                candidates.push((i, j));
            }
        }
    }
    candidates
        .into_iter()
        .map(|(i, j)| (i, j, d.get(&[i, j]).clone()))
        .find(|(_, _, e)| !e.is_zero() && free_of_jets(e))
}
