use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{Chart, Slot, Tensor, TensorError};
use crate::expr::{Bindings, Expr, Symbol};

/// A symmetric nondegenerate rank-2 covariant tensor with its inverse and
/// determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    h: Tensor,
    inv: Tensor,
    det: Expr,
}

/// Determinant of a 3×3 array by cofactor expansion.
pub fn det3(m: &[[Expr; 3]; 3]) -> Expr {
    let minor = |a: usize, b: usize, c: usize, d: usize| &(&m[1][a] * &m[2][b]) - &(&m[1][c] * &m[2][d]);
    &(&(&m[0][0] * &minor(1, 2, 2, 1)) - &(&m[0][1] * &minor(0, 2, 2, 0))) + &(&m[0][2] * &minor(0, 1, 1, 0))
}

impl Metric {
    #[allow(clippy::needless_range_loop)]
    pub fn new(chart: &Chart, comps: [[Expr; 3]; 3]) -> Result<Metric, TensorError> {
        for i in 0..3 {
            for j in 0..i {
                if comps[i][j] != comps[j][i] {
                    return Err(TensorError::NotSymmetric(j, i));
                }
            }
        }
        let det = det3(&comps);
        if det.is_zero() {
            return Err(TensorError::SingularMetric);
        }
        let m = &comps;
        let inv = Tensor::try_from_fn(chart, &[Slot::Up, Slot::Up], |idx| {
            // adjugate: inv_ij = cofactor_ji / det
            let (i, j) = (idx[0], idx[1]);
            let rows: Vec<usize> = (0..3).filter(|&r| r != j).collect();
            let cols: Vec<usize> = (0..3).filter(|&c| c != i).collect();
            let minor = &(&m[rows[0]][cols[0]] * &m[rows[1]][cols[1]]) - &(&m[rows[0]][cols[1]] * &m[rows[1]][cols[0]]);
            let cof = if (i + j) % 2 == 0 { minor } else { -minor };
            cof.checked_div(&det)
        })?;
        let flat: Vec<Expr> = comps.into_iter().flatten().collect();
        Ok(Metric {
            h: Tensor::new(chart, &[Slot::Down, Slot::Down], flat),
            inv,
            det,
        })
    }

    pub fn from_tensor(t: &Tensor) -> Result<Metric, TensorError> {
        if t.slots() != [Slot::Down, Slot::Down] {
            return Err(TensorError::Valence(format!(
                "metric needs two down slots, got {:?}",
                t.slots()
            )));
        }
        let comps = std::array::from_fn(|i| std::array::from_fn(|j| t.get(&[i, j]).clone()));
        Metric::new(t.chart(), comps)
    }

    pub fn chart(&self) -> &Chart {
        self.h.chart()
    }

    pub fn tensor(&self) -> &Tensor {
        &self.h
    }

    pub fn inverse(&self) -> &Tensor {
        &self.inv
    }

    pub fn det(&self) -> &Expr {
        &self.det
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        self.h.get(&[i, j])
    }

    pub fn inv(&self, i: usize, j: usize) -> &Expr {
        self.inv.get(&[i, j])
    }

    pub fn components(&self) -> [[Expr; 3]; 3] {
        std::array::from_fn(|i| std::array::from_fn(|j| self.get(i, j).clone()))
    }

    pub fn scale(&self, k: &Expr) -> Result<Metric, TensorError> {
        Metric::new(
            self.chart(),
            std::array::from_fn(|i| std::array::from_fn(|j| self.get(i, j) * k)),
        )
    }

    pub fn substitute(&self, b: &Bindings) -> Result<Metric, TensorError> {
        let comps = self.components();
        let mut out = comps.clone();
        for (i, row) in comps.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out[i][j] = e.substitute(b)?;
            }
        }
        Metric::new(self.chart(), out)
    }
}

pub fn inverse_metric(h: &Metric) -> Tensor {
    h.inverse().clone()
}

fn move_index(t: &Tensor, slot: usize, with: &Tensor, to: Slot) -> Result<Tensor, TensorError> {
    if slot >= t.rank() || t.slots()[slot] == to {
        return Err(TensorError::Valence(format!(
            "slot {slot} of {:?} cannot become {to:?}",
            t.slots()
        )));
    }
    let mut slots = t.slots().to_vec();
    slots[slot] = to;
    let out = Tensor::from_fn(t.chart(), &slots, |idx| {
        let mut probe = idx.to_vec();
        let mut acc = Expr::zero();
        for k in 0..3 {
            let g = with.get(&[idx[slot], k]);
            if g.is_zero() {
                continue;
            }
            probe[slot] = k;
            let c = t.get(&probe);
            if !c.is_zero() {
                acc = &acc + &(g * c);
            }
        }
        acc
    });
    Ok(out.with_weight(t.weight().clone()))
}

pub fn raise_index(t: &Tensor, slot: usize, h: &Metric) -> Result<Tensor, TensorError> {
    move_index(t, slot, h.inverse(), Slot::Up)
}

pub fn lower_index(t: &Tensor, slot: usize, h: &Metric) -> Result<Tensor, TensorError> {
    move_index(t, slot, h.tensor(), Slot::Down)
}

fn sign_of(q: &BigRational) -> i8 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// `sqrt(|det h|)`, exactly when it lies in the ring, otherwise as an
/// adjoined positive symbol `σ` with `∂σ = σ ∂D / (2D)`, `D = |det h|`.
/// Also returns the sign of `det h`.
pub fn volume_factor(h: &Metric, refpoint: &[BigRational; 3]) -> Result<(Expr, i8), TensorError> {
    let det = h.det();
    let num = det.numerator();
    let den = det.denominator();
    let cn = num.content() * num.leading_coeff().signum();
    let (pn, pd) = (num.primitive(), den.primitive());
    let sign = if pn.sqrt().is_some() && pd.sqrt().is_some() {
        if cn.is_positive() {
            1
        } else {
            -1
        }
    } else {
        let mut at = Bindings::new();
        for (k, q) in refpoint.iter().enumerate() {
            at.bind(h.chart().coord(k), Expr::from_rational(q));
        }
        match det.substitute(&at).ok().and_then(|v| v.as_rational()) {
            Some(q) if !q.is_zero() => sign_of(&q),
            _ => return Err(TensorError::IndefiniteDeterminantSign),
        }
    };
    let abs = if sign > 0 { det.clone() } else { -det };
    if let (Some(a), Some(b)) = (abs.numerator().sqrt(), abs.denominator().sqrt()) {
        return Ok((Expr::from_polys(a, b)?, sign));
    }
    let coords = h.chart().coords();
    let abs_for_rule = abs.clone();
    let sigma = Symbol::custom("sigma", move |s| {
        let se = Expr::symbol(s);
        let two_d = &abs_for_rule * &Expr::int(2);
        coords
            .iter()
            .filter_map(|&c| {
                let d = abs_for_rule.diff(c).ok()?;
                if d.is_zero() {
                    return None;
                }
                Some((c, (&se * &d).checked_div(&two_d).ok()?))
            })
            .collect()
    });
    Ok((Expr::symbol(sigma), sign))
}

fn perm_sign(i: usize, j: usize, k: usize) -> i64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1,
        _ => 0,
    }
}

/// `ε_ijk = orientation * sqrt|det h| * sign(ijk)`.
pub fn levi_civita(h: &Metric, orientation: i8, refpoint: &[BigRational; 3]) -> Result<Tensor, TensorError> {
    let (root, _) = volume_factor(h, refpoint)?;
    let base = if orientation < 0 { -root } else { root };
    Ok(Tensor::from_fn(h.chart(), &[Slot::Down; 3], |idx| {
        &base * &Expr::int(perm_sign(idx[0], idx[1], idx[2]))
    }))
}

/// `(∗F)_i = ε_ilm h^lj h^mk F_jk`, with no factor 1/2.
pub fn hodge_star_two_form(f: &Tensor, h: &Metric, eps: &Tensor) -> Result<Tensor, TensorError> {
    if f.slots() != [Slot::Down, Slot::Down] {
        return Err(TensorError::Valence(format!("two-form expected, got {:?}", f.slots())));
    }
    let up = raise_index(&raise_index(f, 0, h)?, 1, h)?;
    let out = Tensor::from_fn(h.chart(), &[Slot::Down], |idx| {
        let mut acc = Expr::zero();
        for l in 0..3 {
            for m in 0..3 {
                let e = eps.get(&[idx[0], l, m]);
                let v = up.get(&[l, m]);
                if !e.is_zero() && !v.is_zero() {
                    acc = &acc + &(e * v);
                }
            }
        }
        acc
    });
    Ok(out.with_weight(f.weight().clone()))
}
