//! Weyl structures `(h, ω)` with `D_i h_jk = ω_i h_jk`, and their curvature.
//!
//! Conventions: `A_(ij)` and `A_[ij]` carry a factor 1/2, so `F = ½ dω`;
//! `(∗F)_i = ε_ilm F^lm` with `ε_123 = orientation * sqrt|det h|`; the
//! Riemann tensor is `R^a_bcd = ∂_c Γ^a_db - ∂_d Γ^a_cb + Γ^a_ce Γ^e_db -
//! Γ^a_de Γ^e_cb` and `R_ij = R^k_ikj`.

mod classify;
mod report;

use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::expr::{Bindings, Expr, ExprError};
use crate::tensor::{
    antisym2, exterior_derivative, hodge_star_two_form, levi_civita, metric_trace, raise_index, sym2, tracefree, Chart,
    Metric, Slot, Tensor, TensorError,
};

pub use classify::{classify, Classification, Verdict};
pub use report::{curvature_report, excluded_loci, CurvatureReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeylError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("conformal factor is zero")]
    ZeroConformalFactor,
    #[error("structure is not Einstein-Weyl")]
    NotEW,
    #[error("structure is not scalar-flat")]
    NotScalarFlat,
    #[error("non-flat structure with vanishing dual Faraday form")]
    DegenerateDual,
    #[error("one-form has the wrong chart or valence")]
    BadOneForm,
}

impl From<ExprError> for WeylError {
    fn from(e: ExprError) -> Self {
        WeylError::Tensor(TensorError::Expr(e))
    }
}

type Cached<T> = OnceLock<Result<T, WeylError>>;

#[derive(Default, Debug)]
struct Cache {
    gamma: Cached<Tensor>,
    ricci: Cached<(Tensor, Expr)>,
    nabla_omega: Cached<Tensor>,
    omega_up: Cached<Tensor>,
    weyl_gamma: Cached<Tensor>,
}

/// A representative metric `h` and one-form `ω` of a Weyl structure, with
/// the orientation and reference point used to fix `ε`.
#[derive(Clone, Debug)]
pub struct WeylStructure {
    h: Metric,
    omega: Tensor,
    orientation: i8,
    refpoint: [BigRational; 3],
    cache: Arc<Cache>,
}

impl PartialEq for WeylStructure {
    fn eq(&self, other: &Self) -> bool {
        self.h == other.h
            && self.omega == other.omega
            && self.orientation == other.orientation
            && self.refpoint == other.refpoint
    }
}

fn ones() -> [BigRational; 3] {
    std::array::from_fn(|_| BigRational::from_integer(BigInt::from(1)))
}

impl WeylStructure {
    pub fn new(h: Metric, omega: Tensor) -> Result<WeylStructure, WeylError> {
        if omega.slots() != [Slot::Down] || omega.chart() != h.chart() {
            return Err(WeylError::BadOneForm);
        }
        Ok(WeylStructure {
            h,
            omega,
            orientation: 1,
            refpoint: ones(),
            cache: Arc::default(),
        })
    }

    /// Builds from component arrays; `metric` must be symmetric.
    pub fn from_components(
        chart: &Chart,
        metric: [[Expr; 3]; 3],
        omega: [Expr; 3],
    ) -> Result<WeylStructure, WeylError> {
        let h = Metric::new(chart, metric)?;
        WeylStructure::new(h, Tensor::one_form(chart, omega))
    }

    pub fn with_orientation(mut self, orientation: i8) -> WeylStructure {
        self.orientation = if orientation < 0 { -1 } else { 1 };
        self
    }

    pub fn with_refpoint(mut self, refpoint: [BigRational; 3]) -> WeylStructure {
        self.refpoint = refpoint;
        self
    }

    pub fn chart(&self) -> &Chart {
        self.h.chart()
    }

    pub fn metric(&self) -> &Metric {
        &self.h
    }

    pub fn omega(&self) -> &Tensor {
        &self.omega
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn refpoint(&self) -> &[BigRational; 3] {
        &self.refpoint
    }

    pub fn substitute(&self, b: &Bindings) -> Result<WeylStructure, WeylError> {
        let h = self.h.substitute(b)?;
        let omega = self.omega.substitute(b)?;
        Ok(WeylStructure::new(h, omega)?
            .with_orientation(self.orientation)
            .with_refpoint(self.refpoint.clone()))
    }

    fn cached<T: Clone>(cell: &Cached<T>, f: impl FnOnce() -> Result<T, WeylError>) -> Result<T, WeylError> {
        cell.get_or_init(f).clone()
    }

    /// Levi-Civita Christoffel symbols `Γ^k_ij`.
    pub fn christoffel(&self) -> Result<Tensor, WeylError> {
        Self::cached(&self.cache.gamma, || christoffel(&self.h))
    }

    /// `(R_ij, r)` of the Levi-Civita connection.
    pub fn ricci(&self) -> Result<(Tensor, Expr), WeylError> {
        Self::cached(&self.cache.ricci, || ricci_from(&self.h, &self.christoffel()?))
    }

    /// `∇_i ω_j`.
    pub fn nabla_omega(&self) -> Result<Tensor, WeylError> {
        Self::cached(&self.cache.nabla_omega, || {
            Ok(self.omega.covariant_derivative(&self.christoffel()?)?)
        })
    }

    /// `ω^i`.
    pub fn omega_up(&self) -> Result<Tensor, WeylError> {
        Self::cached(&self.cache.omega_up, || Ok(raise_index(&self.omega, 0, &self.h)?))
    }

    /// `∇_k ω^k`.
    pub fn div_omega(&self) -> Result<Expr, WeylError> {
        Ok(metric_trace(&self.nabla_omega()?, &self.h))
    }

    /// `ω_k ω^k`.
    pub fn omega_sq(&self) -> Result<Expr, WeylError> {
        let up = self.omega_up()?;
        Ok((0..3).map(|k| self.omega.get(&[k]) * up.get(&[k])).sum())
    }

    /// `ε_ijk` for this structure's orientation and reference point.
    pub fn levi_civita(&self) -> Result<Tensor, WeylError> {
        Ok(levi_civita(&self.h, self.orientation, &self.refpoint)?)
    }
}

/// `Γ^k_ij = ½ h^kl (∂_i h_jl + ∂_j h_il - ∂_l h_ij)`.
pub fn christoffel(h: &Metric) -> Result<Tensor, WeylError> {
    let chart = h.chart().clone();
    // dh[l][i][j] = ∂_l h_ij
    let dh = Tensor::try_from_fn::<ExprError>(&chart, &[Slot::Down; 3], |idx| {
        h.get(idx[1], idx[2]).diff(chart.coord(idx[0]))
    })?;
    let lowered = Tensor::from_fn(&chart, &[Slot::Down; 3], |idx| {
        let (l, i, j) = (idx[0], idx[1], idx[2]);
        let s = &(dh.get(&[i, j, l]) + dh.get(&[j, i, l])) - dh.get(&[l, i, j]);
        &s * &Expr::rational(1, 2)
    });
    Ok(Tensor::from_fn(&chart, &[Slot::Up, Slot::Down, Slot::Down], |idx| {
        let (k, i, j) = (idx[0], idx[1], idx[2]);
        let mut acc = Expr::zero();
        for l in 0..3 {
            let g = h.inv(k, l);
            let c = lowered.get(&[l, i, j]);
            if !g.is_zero() && !c.is_zero() {
                acc = &acc + &(g * c);
            }
        }
        acc
    }))
}

/// Riemann tensor `R^a_bcd` of an arbitrary torsion-free connection.
pub fn riemann(chart: &Chart, gamma: &Tensor) -> Result<Tensor, WeylError> {
    let dg = Tensor::try_from_fn::<ExprError>(chart, &[Slot::Down, Slot::Up, Slot::Down, Slot::Down], |idx| {
        gamma.get(&idx[1..]).diff(chart.coord(idx[0]))
    })?;
    Ok(Tensor::from_fn(
        chart,
        &[Slot::Up, Slot::Down, Slot::Down, Slot::Down],
        |idx| {
            let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = dg.get(&[c, a, d, b]) - dg.get(&[d, a, c, b]);
            for e in 0..3 {
                let p = gamma.get(&[a, c, e]) * gamma.get(&[e, d, b]);
                let q = gamma.get(&[a, d, e]) * gamma.get(&[e, c, b]);
                acc = &acc + &(&p - &q);
            }
            acc
        },
    ))
}

fn ricci_from(h: &Metric, gamma: &Tensor) -> Result<(Tensor, Expr), WeylError> {
    let chart = h.chart().clone();
    // R_ij = ∂_k Γ^k_ij - ∂_i Γ^k_kj + Γ^k_kl Γ^l_ij - Γ^k_il Γ^l_kj
    let ric = Tensor::try_from_fn::<ExprError>(&chart, &[Slot::Down, Slot::Down], |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut acc = Expr::zero();
        for k in 0..3 {
            acc = &acc + &gamma.get(&[k, i, j]).diff(chart.coord(k))?;
            acc = &acc - &gamma.get(&[k, k, j]).diff(chart.coord(i))?;
            for l in 0..3 {
                acc = &acc + &(gamma.get(&[k, k, l]) * gamma.get(&[l, i, j]));
                acc = &acc - &(gamma.get(&[k, i, l]) * gamma.get(&[l, k, j]));
            }
        }
        Ok(acc)
    })?;
    let r = metric_trace(&ric, h);
    Ok((ric, r))
}

/// `(R_ij, r)` of the Levi-Civita connection of `h`.
pub fn ricci_lc(h: &Metric) -> Result<(Tensor, Expr), WeylError> {
    ricci_from(h, &christoffel(h)?)
}

/// `F_ij = ∇_[i ω_j] = ½ (dω)_ij`.
pub fn faraday(omega: &Tensor) -> Result<Tensor, WeylError> {
    Ok(exterior_derivative(omega)?.scale(&Expr::rational(1, 2)))
}

/// `W_ij = R_ij + ∇_i ω_j - ½ ∇_j ω_i + ¼ ω_i ω_j + h_ij (-¼ ω_k ω^k + ½ ∇_k ω^k)`.
pub fn weyl_ricci(s: &WeylStructure) -> Result<Tensor, WeylError> {
    let (ric, _) = s.ricci()?;
    let nw = s.nabla_omega()?;
    let shift = &(&s.omega_sq()? * &Expr::rational(-1, 4)) + &(&s.div_omega()? * &Expr::rational(1, 2));
    let w = s.omega();
    Ok(Tensor::from_fn(s.chart(), &[Slot::Down, Slot::Down], |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut acc = ric.get(&[i, j]) + nw.get(&[i, j]);
        acc = &acc - &(nw.get(&[j, i]) * &Expr::rational(1, 2));
        acc = &acc + &(&(w.get(&[i]) * w.get(&[j])) * &Expr::rational(1, 4));
        &acc + &(s.metric().get(i, j) * &shift)
    }))
}

/// `W = r + 2 ∇^k ω_k - ½ ω^k ω_k`.
pub fn weyl_scalar(s: &WeylStructure) -> Result<Expr, WeylError> {
    let (_, r) = s.ricci()?;
    Ok(&(&r + &(&s.div_omega()? * &Expr::int(2))) - &(&s.omega_sq()? * &Expr::rational(1, 2)))
}

/// `χ_ij = R_ij + ½ ∇_(i ω_j) + ¼ ω_i ω_j - ⅓ (r + ½ ∇^k ω_k + ¼ ω^k ω_k) h_ij`.
pub fn ew_residual(s: &WeylStructure) -> Result<Tensor, WeylError> {
    let (ric, r) = s.ricci()?;
    let sym = sym2(&s.nabla_omega()?);
    let trace = &(&r + &(&s.div_omega()? * &Expr::rational(1, 2))) + &(&s.omega_sq()? * &Expr::rational(1, 4));
    let third = &trace * &Expr::rational(1, 3);
    let w = s.omega();
    Ok(Tensor::from_fn(s.chart(), &[Slot::Down, Slot::Down], |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut acc = ric.get(&[i, j]) + &(sym.get(&[i, j]) * &Expr::rational(1, 2));
        acc = &acc + &(&(w.get(&[i]) * w.get(&[j])) * &Expr::rational(1, 4));
        &acc - &(s.metric().get(i, j) * &third)
    }))
}

/// The same `χ_ij` computed as `tracefree(sym2(W_ij))`.
pub fn ew_residual_from_weyl_ricci(s: &WeylStructure) -> Result<Tensor, WeylError> {
    Ok(tracefree(&sym2(&weyl_ricci(s)?), s.metric()))
}

fn check_one_form(s: &WeylStructure, v: &Tensor, slot: Slot) -> Result<(), WeylError> {
    if v.slots() != [slot] || v.chart() != s.chart() {
        return Err(WeylError::BadOneForm);
    }
    Ok(())
}

/// `D_i V_j = ∇_i V_j + ½ ((1 - m) ω_i V_j + ω_j V_i - h_ij ω_k V^k)` for a
/// one-form of weight `m`.
pub fn weighted_derivative_oneform(s: &WeylStructure, v: &Tensor, m: &BigRational) -> Result<Tensor, WeylError> {
    check_one_form(s, v, Slot::Down)?;
    let nv = v.covariant_derivative(&s.christoffel()?)?;
    let wu = s.omega_up()?;
    let wv: Expr = (0..3).map(|k| wu.get(&[k]) * v.get(&[k])).sum();
    let one_minus_m = Expr::from_rational(&(BigRational::from_integer(1.into()) - m));
    let w = s.omega();
    let out = Tensor::from_fn(s.chart(), &[Slot::Down, Slot::Down], |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut extra = &(&one_minus_m * w.get(&[i])) * v.get(&[j]);
        extra = &extra + &(w.get(&[j]) * v.get(&[i]));
        extra = &extra - &(s.metric().get(i, j) * &wv);
        nv.get(&[i, j]) + &(&extra * &Expr::rational(1, 2))
    });
    Ok(out.with_weight(m.clone()))
}

/// `D_i V^j = ∇_i V^j - ½ δ_i^j ω_k V^k - ((m + 1)/2) ω_i V^j + ½ ω^j V_i`
/// for a vector of weight `m`.
pub fn weighted_derivative_vector(s: &WeylStructure, v: &Tensor, m: &BigRational) -> Result<Tensor, WeylError> {
    check_one_form(s, v, Slot::Up)?;
    let nv = v.covariant_derivative(&s.christoffel()?)?;
    let lowered = crate::tensor::lower_index(v, 0, s.metric())?;
    let w = s.omega();
    let wu = s.omega_up()?;
    let wv: Expr = (0..3).map(|k| w.get(&[k]) * v.get(&[k])).sum();
    let half_m1 =
        Expr::from_rational(&((m + BigRational::from_integer(1.into())) / BigRational::from_integer(2.into())));
    let out = Tensor::from_fn(s.chart(), &[Slot::Down, Slot::Up], |idx| {
        let (i, j) = (idx[0], idx[1]);
        let mut acc = nv.get(&[i, j]).clone();
        if i == j {
            acc = &acc - &(&wv * &Expr::rational(1, 2));
        }
        acc = &acc - &(&(&half_m1 * w.get(&[i])) * v.get(&[j]));
        &acc + &(&(wu.get(&[j]) * lowered.get(&[i])) * &Expr::rational(1, 2))
    });
    Ok(out.with_weight(m.clone()))
}

/// `h^ik ∇_k T_ij...` contracted on the first slot of a covariant tensor.
fn divergence(s: &WeylStructure, t: &Tensor) -> Result<Tensor, WeylError> {
    let nt = t.covariant_derivative(&s.christoffel()?)?;
    let up = raise_index(&nt, 0, s.metric())?;
    Ok(up.contract(0, 1)?)
}

/// `ω^i T_ij`.
fn omega_contract(s: &WeylStructure, t: &Tensor) -> Result<Tensor, WeylError> {
    Ok(s.omega_up()?.outer(t).contract(0, 1)?)
}

/// `B_j = ∇^i F_ij + ½ ω^i F_ij + ⅓ (∇_j W + ω_j W)`.
pub fn bianchi_residual(s: &WeylStructure) -> Result<Tensor, WeylError> {
    let f = faraday(s.omega())?;
    let div_f = divergence(s, &f)?;
    let wf = omega_contract(s, &f)?;
    let w = weyl_scalar(s)?;
    let dw = exterior_derivative(&Tensor::scalar(s.chart(), w.clone()))?;
    Ok(Tensor::from_fn(s.chart(), &[Slot::Down], |idx| {
        let j = idx[0];
        let mut acc = div_f.get(&[j]) + &(wf.get(&[j]) * &Expr::rational(1, 2));
        let scal = dw.get(&[j]) + &(s.omega().get(&[j]) * &w);
        acc = &acc + &(&scal * &Expr::rational(1, 3));
        acc
    }))
}

/// `B_j - 2 ∇^i χ_ij + ω^i χ_ij`, which vanishes for every Weyl structure;
/// on Einstein-Weyl structures it reduces to `B_j`.
pub fn contracted_bianchi(s: &WeylStructure) -> Result<Tensor, WeylError> {
    let b = bianchi_residual(s)?;
    let chi = ew_residual(s)?;
    let div_chi = divergence(s, &chi)?;
    let wchi = omega_contract(s, &chi)?;
    Ok(Tensor::from_fn(s.chart(), &[Slot::Down], |idx| {
        let j = idx[0];
        &(b.get(&[j]) - &(div_chi.get(&[j]) * &Expr::int(2))) + wchi.get(&[j])
    }))
}

/// `(F^ij F_ij, ω^i ω^j F_ij)`.
pub fn nullity(s: &WeylStructure) -> Result<(Expr, Expr), WeylError> {
    let f = faraday(s.omega())?;
    let up = raise_index(&raise_index(&f, 0, s.metric())?, 1, s.metric())?;
    let ff: Expr = (0..9).map(|k| &up.components()[k] * &f.components()[k]).sum();
    let wu = s.omega_up()?;
    let mut wwf = Expr::zero();
    for i in 0..3 {
        for j in 0..3 {
            wwf = &wwf + &(&(wu.get(&[i]) * wu.get(&[j])) * f.get(&[i, j]));
        }
    }
    Ok((ff, wwf))
}

/// `Γ^D^k_ij = Γ^k_ij - ½ (δ^k_i ω_j + δ^k_j ω_i - h_ij ω^k)`.
pub fn weyl_connection(s: &WeylStructure) -> Result<Tensor, WeylError> {
    WeylStructure::cached(&s.cache.weyl_gamma, || {
        let g = s.christoffel()?;
        let w = s.omega();
        let wu = s.omega_up()?;
        Ok(Tensor::from_fn(s.chart(), &[Slot::Up, Slot::Down, Slot::Down], |idx| {
            let (k, i, j) = (idx[0], idx[1], idx[2]);
            let mut shift = &(s.metric().get(i, j) * wu.get(&[k])) * &Expr::int(-1);
            if k == i {
                shift = &shift + w.get(&[j]);
            }
            if k == j {
                shift = &shift + w.get(&[i]);
            }
            g.get(&[k, i, j]) - &(&shift * &Expr::rational(1, 2))
        }))
    })
}

/// Full curvature `R(D)^a_bcd` of the Weyl connection.
pub fn weyl_curvature(s: &WeylStructure) -> Result<Tensor, WeylError> {
    riemann(s.chart(), &weyl_connection(s)?)
}

/// `D_i h_jk - ω_i h_jk`, identically zero by construction.
pub fn compatibility_residual(s: &WeylStructure) -> Result<Tensor, WeylError> {
    let gd = weyl_connection(s)?;
    let dh = s.metric().tensor().covariant_derivative(&gd)?;
    Ok(Tensor::from_fn(s.chart(), &[Slot::Down; 3], |idx| {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        dh.get(&[i, j, k]) - &(s.omega().get(&[i]) * s.metric().get(j, k))
    }))
}

/// `(φ² h, ω + 2 dφ/φ)`.
pub fn conformal_rescale(s: &WeylStructure, phi: &Expr) -> Result<WeylStructure, WeylError> {
    if phi.is_zero() {
        return Err(WeylError::ZeroConformalFactor);
    }
    let h = s.metric().scale(&(phi * phi))?;
    let dphi = exterior_derivative(&Tensor::scalar(s.chart(), phi.clone()))?;
    let shift = dphi.try_map(|d| (d * &Expr::int(2)).checked_div(phi))?;
    let omega = s.omega().add(&shift)?;
    Ok(WeylStructure::new(h, omega)?
        .with_orientation(s.orientation)
        .with_refpoint(s.refpoint.clone()))
}

/// `∗F` for the structure's own Faraday form.
pub fn star_faraday(s: &WeylStructure) -> Result<Tensor, WeylError> {
    let f = faraday(s.omega())?;
    Ok(hodge_star_two_form(&f, s.metric(), &s.levi_civita()?)?)
}

/// Antisymmetric part of `W_ij`, which equals `(3/2) F_ij`.
pub fn weyl_ricci_antisym(s: &WeylStructure) -> Result<Tensor, WeylError> {
    Ok(antisym2(&weyl_ricci(s)?))
}

#[cfg(test)]
mod tests;
