//! Weighted tensors over a three-dimensional coordinate chart.
//!
//! Components are stored densely in row-major order over the slot list.
//! Conformal weight is plain metadata: no operation here rescales anything.

mod forms;
mod metric;

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Bindings, Expr, ExprError, Symbol};

pub use forms::{exterior_derivative, wedge, wedge_one_forms};
pub use metric::{
    det3, hodge_star_two_form, inverse_metric, levi_civita, lower_index, raise_index, volume_factor, Metric,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("coordinate `{0}` is declared twice")]
    DuplicateCoordinate(String),
    #[error("metric is not symmetric in slots ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("metric is singular")]
    SingularMetric,
    #[error("sign of det h cannot be decided at the reference point")]
    IndefiniteDeterminantSign,
    #[error("valence mismatch: {0}")]
    Valence(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Three named coordinates, plus an optional declared signature pattern.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    coords: [Symbol; 3],
    signature: Option<[i8; 3]>,
}

impl Chart {
    pub fn new(names: [&str; 3]) -> Result<Chart, TensorError> {
        for i in 0..3 {
            for j in 0..i {
                if names[i] == names[j] {
                    return Err(TensorError::DuplicateCoordinate(names[i].to_string()));
                }
            }
        }
        Ok(Chart {
            coords: names.map(Symbol::coordinate),
            signature: None,
        })
    }

    /// The chart `(y, x, t)`.
    pub fn yxt() -> Chart {
        Chart::new(["y", "x", "t"]).expect("distinct names")
    }

    /// The chart `(v, w, z)`.
    pub fn vwz() -> Chart {
        Chart::new(["v", "w", "z"]).expect("distinct names")
    }

    pub fn with_signature(mut self, signature: [i8; 3]) -> Chart {
        self.signature = Some(signature);
        self
    }

    pub fn coords(&self) -> [Symbol; 3] {
        self.coords
    }

    pub fn coord(&self, i: usize) -> Symbol {
        self.coords[i]
    }

    pub fn names(&self) -> [String; 3] {
        self.coords.map(|c| c.name())
    }

    pub fn signature(&self) -> Option<[i8; 3]> {
        self.signature
    }

    pub fn index_of(&self, s: Symbol) -> Option<usize> {
        self.coords.iter().position(|&c| c == s)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Up,
    Down,
}

#[derive(Clone, PartialEq)]
pub struct Tensor {
    chart: Chart,
    slots: Vec<Slot>,
    weight: BigRational,
    comps: Vec<Expr>,
}

fn unflatten(mut flat: usize, rank: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for k in (0..rank).rev() {
        idx[k] = flat % 3;
        flat /= 3;
    }
    idx
}

fn flatten(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * 3 + i)
}

impl Tensor {
    pub fn new(chart: &Chart, slots: &[Slot], comps: Vec<Expr>) -> Tensor {
        assert_eq!(comps.len(), 3usize.pow(slots.len() as u32), "component count");
        Tensor {
            chart: chart.clone(),
            slots: slots.to_vec(),
            weight: BigRational::zero(),
            comps,
        }
    }

    pub fn zeros(chart: &Chart, slots: &[Slot]) -> Tensor {
        Tensor::new(chart, slots, vec![Expr::zero(); 3usize.pow(slots.len() as u32)])
    }

    pub fn scalar(chart: &Chart, value: Expr) -> Tensor {
        Tensor::new(chart, &[], vec![value])
    }

    pub fn from_fn(chart: &Chart, slots: &[Slot], f: impl Fn(&[usize]) -> Expr + Sync + Send) -> Tensor {
        Self::try_from_fn(chart, slots, |idx| Ok::<_, ExprError>(f(idx))).expect("infallible")
    }

    /// Builds components in parallel; the first error (in index order) wins.
    pub fn try_from_fn<E: Send>(
        chart: &Chart,
        slots: &[Slot],
        f: impl Fn(&[usize]) -> Result<Expr, E> + Sync,
    ) -> Result<Tensor, E> {
        let rank = slots.len();
        let comps = (0..3usize.pow(rank as u32))
            .into_par_iter()
            .map(|flat| f(&unflatten(flat, rank)))
            .collect::<Result<Vec<_>, E>>()?;
        Ok(Tensor::new(chart, slots, comps))
    }

    pub fn one_form(chart: &Chart, comps: [Expr; 3]) -> Tensor {
        Tensor::new(chart, &[Slot::Down], comps.to_vec())
    }

    pub fn vector(chart: &Chart, comps: [Expr; 3]) -> Tensor {
        Tensor::new(chart, &[Slot::Up], comps.to_vec())
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn rank(&self) -> usize {
        self.slots.len()
    }

    pub fn weight(&self) -> &BigRational {
        &self.weight
    }

    pub fn with_weight(mut self, weight: BigRational) -> Tensor {
        self.weight = weight;
        self
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        assert_eq!(idx.len(), self.rank(), "index length");
        &self.comps[flatten(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: Expr) {
        assert_eq!(idx.len(), self.rank(), "index length");
        self.comps[flatten(idx)] = value;
    }

    /// The single component of a scalar.
    pub fn value(&self) -> &Expr {
        self.get(&[])
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// Nonzero components with their indices, in index order.
    pub fn nonzero(&self) -> Vec<(Vec<usize>, &Expr)> {
        self.comps
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(k, e)| (unflatten(k, self.rank()), e))
            .collect()
    }

    fn same_shape(&self, other: &Tensor) -> Result<(), TensorError> {
        if self.slots != other.slots {
            return Err(TensorError::Valence(format!(
                "{:?} against {:?}",
                self.slots, other.slots
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        self.same_shape(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        self.same_shape(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    fn zip(&self, other: &Tensor, f: impl Fn(&Expr, &Expr) -> Expr + Sync + Send) -> Tensor {
        let comps = self
            .comps
            .par_iter()
            .zip(other.comps.par_iter())
            .map(|(a, b)| f(a, b))
            .collect();
        Tensor { comps, ..self.clone() }
    }

    pub fn scale(&self, k: &Expr) -> Tensor {
        self.map(|e| e * k)
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr + Sync + Send) -> Tensor {
        let comps = self.comps.par_iter().map(f).collect();
        Tensor { comps, ..self.clone() }
    }

    pub fn try_map<E: Send>(&self, f: impl Fn(&Expr) -> Result<Expr, E> + Sync + Send) -> Result<Tensor, E> {
        let comps = self.comps.par_iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(Tensor { comps, ..self.clone() })
    }

    pub fn substitute(&self, b: &Bindings) -> Result<Tensor, ExprError> {
        self.try_map(|e| e.substitute(b))
    }

    /// Tensor product; weights add.
    pub fn outer(&self, other: &Tensor) -> Tensor {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        let n = other.comps.len();
        let comps = (0..self.comps.len() * n)
            .into_par_iter()
            .map(|k| &self.comps[k / n] * &other.comps[k % n])
            .collect();
        Tensor {
            chart: self.chart.clone(),
            slots,
            weight: &self.weight + &other.weight,
            comps,
        }
    }

    /// Contracts an up slot against a down slot.
    pub fn contract(&self, a: usize, b: usize) -> Result<Tensor, TensorError> {
        if a == b || a >= self.rank() || b >= self.rank() || self.slots[a] == self.slots[b] {
            return Err(TensorError::Valence(format!(
                "cannot contract slots {a} and {b} of {:?}",
                self.slots
            )));
        }
        let slots: Vec<Slot> = (0..self.rank())
            .filter(|&k| k != a && k != b)
            .map(|k| self.slots[k])
            .collect();
        let rank = self.rank();
        let comps = (0..3usize.pow(slots.len() as u32))
            .into_par_iter()
            .map(|flat| {
                let rest = unflatten(flat, slots.len());
                let mut full = vec![0; rank];
                let mut it = rest.iter();
                for (k, f) in full.iter_mut().enumerate() {
                    if k != a && k != b {
                        *f = *it.next().expect("rank");
                    }
                }
                (0..3)
                    .map(|i| {
                        full[a] = i;
                        full[b] = i;
                        self.comps[flatten(&full)].clone()
                    })
                    .sum()
            })
            .collect();
        Ok(Tensor {
            chart: self.chart.clone(),
            slots,
            weight: self.weight.clone(),
            comps,
        })
    }

    /// Swaps the two slots of a rank-2 tensor.
    pub fn transpose(&self) -> Tensor {
        assert_eq!(self.rank(), 2, "transpose needs rank 2");
        let mut out = self.clone();
        out.slots.swap(0, 1);
        for i in 0..3 {
            for j in 0..3 {
                out.comps[3 * i + j] = self.comps[3 * j + i].clone();
            }
        }
        out
    }

    /// Covariant derivative against the connection `gamma` (slots up, down,
    /// down, indexed `[k, i, j]` for `Γ^k_ij`). The new derivative slot comes
    /// first.
    pub fn covariant_derivative(&self, gamma: &Tensor) -> Result<Tensor, ExprError> {
        let rank = self.rank();
        let mut slots = vec![Slot::Down];
        slots.extend_from_slice(&self.slots);
        let out = Tensor::try_from_fn(&self.chart, &slots, |idx| {
            let i = idx[0];
            let rest = &idx[1..];
            let mut acc = self.get(rest).diff(self.chart.coord(i))?;
            let mut probe = rest.to_vec();
            for s in 0..rank {
                let a = rest[s];
                for c in 0..3 {
                    probe[s] = c;
                    let t = self.get(&probe);
                    if t.is_zero() {
                        continue;
                    }
                    match self.slots[s] {
                        Slot::Up => {
                            let g = gamma.get(&[a, i, c]);
                            if !g.is_zero() {
                                acc = &acc + &(g * t);
                            }
                        }
                        Slot::Down => {
                            let g = gamma.get(&[c, i, a]);
                            if !g.is_zero() {
                                acc = &acc - &(g * t);
                            }
                        }
                    }
                }
                probe[s] = a;
            }
            Ok(acc)
        })?;
        Ok(out.with_weight(self.weight.clone()))
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tensor{:?}", self.slots)?;
        if !self.weight.is_zero() {
            write!(f, " weight {}", self.weight)?;
        }
        let mut map = f.debug_map();
        for (idx, e) in self.nonzero() {
            map.entry(&idx, &e.render());
        }
        map.finish()
    }
}

/// `A_(ij) = (A_ij + A_ji)/2`.
pub fn sym2(t: &Tensor) -> Tensor {
    let tt = t.transpose();
    let half = Expr::rational(1, 2);
    t.zip(&tt, |a, b| &(a + b) * &half)
}

/// `A_[ij] = (A_ij - A_ji)/2`.
pub fn antisym2(t: &Tensor) -> Tensor {
    let tt = t.transpose();
    let half = Expr::rational(1, 2);
    t.zip(&tt, |a, b| &(a - b) * &half)
}

/// `h^kl A_kl` for a rank-2 covariant tensor.
pub fn metric_trace(t: &Tensor, h: &Metric) -> Expr {
    let mut acc = Expr::zero();
    for k in 0..3 {
        for l in 0..3 {
            let (a, b) = (h.inv(k, l), t.get(&[k, l]));
            if !a.is_zero() && !b.is_zero() {
                acc = &acc + &(a * b);
            }
        }
    }
    acc
}

/// Removes the trace: `A_ij - (h^kl A_kl / 3) h_ij`.
pub fn tracefree(t: &Tensor, h: &Metric) -> Tensor {
    let third = &metric_trace(t, h) * &Expr::rational(1, 3);
    t.zip(h.tensor(), |a, g| a - &(g * &third))
}
