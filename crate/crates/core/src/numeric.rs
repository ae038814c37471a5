//! Floating-point oracle: evaluates structures at sample points and rebuilds
//! their curvature by central finite differences.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::{Bindings, Expr, ExprError, Function, Symbol};
use crate::weyl::{ew_residual, excluded_loci, weyl_ricci, weyl_scalar, WeylError, WeylStructure};

pub const DEFAULT_STEP: f64 = 1e-4;
pub const DEFAULT_TOLERANCE: f64 = 1e-5;
/// Minimum distance of a sample point from every excluded locus.
pub const DEFAULT_MARGIN: f64 = 1e-1;
/// Denominators smaller than this in absolute value count as poles.
pub const POLE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("pole at ({}, {}, {}): denominator {denominator} vanishes", point[0], point[1], point[2])]
    PoleAtPoint { point: [f64; 3], denominator: String },
    #[error("symbol `{0}` has no numeric value; instantiate it first")]
    Uninstantiated(String),
    #[error("at least one sample point is required")]
    NoPoints,
    #[error("no sample point found away from the excluded loci")]
    NoSamplePoints,
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

impl From<ExprError> for NumericError {
    fn from(e: ExprError) -> Self {
        NumericError::Weyl(e.into())
    }
}

/// A point in a chart together with concrete values for the formal
/// functions.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub coords: [f64; 3],
    pub instantiation: Bindings,
}

impl SamplePoint {
    pub fn new(coords: [f64; 3], instantiation: Bindings) -> SamplePoint {
        SamplePoint { coords, instantiation }
    }
}

/// `R(t) = t² + 1`, `S(t) = t - 1` and, on the Toda chart, `R(v) = v² + 1`.
pub fn default_instantiation() -> Bindings {
    let t = Expr::symbol(Symbol::coordinate("t"));
    let v = Expr::symbol(Symbol::coordinate("v"));
    Bindings::new()
        .with_function(
            Function::new("R", &[Symbol::coordinate("t")]),
            &(&t * &t) + &Expr::one(),
        )
        .with_function(Function::new("S", &[Symbol::coordinate("t")]), &t - &Expr::one())
        .with_function(
            Function::new("R", &[Symbol::coordinate("v")]),
            &(&v * &v) + &Expr::one(),
        )
}

/// Value of an expression free of everything but the chart coordinates.
pub fn eval_at(e: &Expr, coords: &[Symbol; 3], x: &[f64; 3]) -> Result<f64, NumericError> {
    let mut missing = None;
    let (n, d) = e.eval_parts(
        |s, k| match coords.iter().position(|&c| c == s) {
            Some(i) => x[i].powi(k as i32),
            None => {
                missing = Some(s);
                f64::NAN
            }
        },
        0.0,
        |c| num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN),
    );
    if let Some(s) = missing {
        return Err(NumericError::Uninstantiated(s.name()));
    }
    if d.abs() <= POLE_THRESHOLD {
        return Err(NumericError::PoleAtPoint {
            point: *x,
            denominator: Expr::from_poly(e.denominator().clone()).render(),
        });
    }
    Ok(n / d)
}

/// Instantiates `e` exactly and evaluates it at the point.
pub fn eval(e: &Expr, coords: &[Symbol; 3], p: &SamplePoint) -> Result<f64, NumericError> {
    eval_at(&e.substitute(&p.instantiation)?, coords, &p.coords)
}

type Christoffel = [Matrix3<f64>; 3];

/// Finite-difference curvature at one point.
#[derive(Clone, Debug)]
pub struct FdCurvature {
    /// `christoffel[k][(i, j)] = Γ^k_ij`.
    pub christoffel: Christoffel,
    pub ricci: Matrix3<f64>,
    pub ricci_scalar: f64,
    pub weyl_ricci: Matrix3<f64>,
    pub weyl_scalar: f64,
    pub chi: Matrix3<f64>,
}

struct Sampler<'a> {
    coords: [Symbol; 3],
    h: [[&'a Expr; 3]; 3],
    omega: [&'a Expr; 3],
    steps: [f64; 3],
}

impl<'a> Sampler<'a> {
    fn new(s: &'a WeylStructure, x: &[f64; 3], step: f64) -> Sampler<'a> {
        let m = s.metric();
        Sampler {
            coords: s.chart().coords(),
            h: std::array::from_fn(|i| std::array::from_fn(|j| m.get(i, j))),
            omega: std::array::from_fn(|i| s.omega().get(&[i])),
            steps: std::array::from_fn(|i| step * (1.0 + x[i].abs())),
        }
    }

    fn shifted(&self, x: &[f64; 3], k: usize, sign: f64) -> [f64; 3] {
        let mut y = *x;
        y[k] += sign * self.steps[k];
        y
    }

    fn metric(&self, x: &[f64; 3]) -> Result<Matrix3<f64>, NumericError> {
        let mut out = Matrix3::zeros();
        for i in 0..3 {
            for j in i..3 {
                let v = eval_at(self.h[i][j], &self.coords, x)?;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }

    fn omega(&self, x: &[f64; 3]) -> Result<Vector3<f64>, NumericError> {
        let mut out = Vector3::zeros();
        for i in 0..3 {
            out[i] = eval_at(self.omega[i], &self.coords, x)?;
        }
        Ok(out)
    }

    fn inverse(&self, h: &Matrix3<f64>, x: &[f64; 3]) -> Result<Matrix3<f64>, NumericError> {
        h.try_inverse().ok_or_else(|| NumericError::PoleAtPoint {
            point: *x,
            denominator: "det h".into(),
        })
    }

    fn central<T, F>(&self, x: &[f64; 3], k: usize, f: F) -> Result<T, NumericError>
    where
        T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
        F: Fn(&[f64; 3]) -> Result<T, NumericError>,
    {
        let plus = f(&self.shifted(x, k, 1.0))?;
        let minus = f(&self.shifted(x, k, -1.0))?;
        Ok((plus - minus) * (0.5 / self.steps[k]))
    }

    fn christoffel(&self, x: &[f64; 3]) -> Result<Christoffel, NumericError> {
        let inv = self.inverse(&self.metric(x)?, x)?;
        let mut dh = [Matrix3::zeros(); 3];
        for (l, d) in dh.iter_mut().enumerate() {
            *d = self.central(x, l, |y| self.metric(y))?;
        }
        let mut gamma = [Matrix3::zeros(); 3];
        for (k, g) in gamma.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for l in 0..3 {
                        acc += inv[(k, l)] * (dh[i][(j, l)] + dh[j][(i, l)] - dh[l][(i, j)]);
                    }
                    g[(i, j)] = 0.5 * acc;
                }
            }
        }
        Ok(gamma)
    }
}

fn sub_christoffel(a: Christoffel, b: Christoffel) -> Christoffel {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Curvature of an instantiated structure at `x`, with Christoffel symbols
/// by central differences of the metric and Ricci by central differences of
/// those.
pub fn fd_curvature(s: &WeylStructure, x: &[f64; 3], step: f64) -> Result<FdCurvature, NumericError> {
    let sm = Sampler::new(s, x, step);
    let h = sm.metric(x)?;
    let inv = sm.inverse(&h, x)?;
    let gamma = sm.christoffel(x)?;
    // dgamma[m][k] = ∂_m Γ^k
    let mut dgamma = [[Matrix3::zeros(); 3]; 3];
    for (m, d) in dgamma.iter_mut().enumerate() {
        let plus = sm.christoffel(&sm.shifted(x, m, 1.0))?;
        let minus = sm.christoffel(&sm.shifted(x, m, -1.0))?;
        let diff = sub_christoffel(plus, minus);
        *d = diff.map(|g| g * (0.5 / sm.steps[m]));
    }
    let mut ricci = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for k in 0..3 {
                acc += dgamma[k][k][(i, j)] - dgamma[i][k][(k, j)];
                for l in 0..3 {
                    acc += gamma[k][(k, l)] * gamma[l][(i, j)] - gamma[k][(i, l)] * gamma[l][(k, j)];
                }
            }
            ricci[(i, j)] = acc;
        }
    }
    let trace = |t: &Matrix3<f64>| (inv.component_mul(t)).sum();
    let ricci_scalar = trace(&ricci);

    let w = sm.omega(x)?;
    let mut domega = [Vector3::zeros(); 3];
    for (i, d) in domega.iter_mut().enumerate() {
        *d = sm.central(x, i, |y| sm.omega(y))?;
    }
    let mut nabla = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let corr: f64 = (0..3).map(|k| gamma[k][(i, j)] * w[k]).sum();
            nabla[(i, j)] = domega[i][j] - corr;
        }
    }
    let w_up = inv * w;
    let omega_sq = w.dot(&w_up);
    let div = trace(&nabla);
    let ww = w * w.transpose();

    let shift = -0.25 * omega_sq + 0.5 * div;
    let weyl_ricci = ricci + nabla - nabla.transpose() * 0.5 + ww * 0.25 + h * shift;
    let weyl_scalar = ricci_scalar + 2.0 * div - 0.5 * omega_sq;
    let sym = (nabla + nabla.transpose()) * 0.5;
    let third = (ricci_scalar + 0.5 * div + 0.25 * omega_sq) / 3.0;
    let chi = ricci + sym * 0.5 + ww * 0.25 - h * third;
    Ok(FdCurvature {
        christoffel: gamma,
        ricci,
        ricci_scalar,
        weyl_ricci,
        weyl_scalar,
        chi,
    })
}

/// `|a - b| / (1 + max(|a|, |b|))`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossCheckEntry {
    pub point: usize,
    pub quantity: String,
    pub symbolic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossCheckReport {
    pub points: Vec<[f64; 3]>,
    pub tolerance: f64,
    pub entries: Vec<CrossCheckEntry>,
}

impl CrossCheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.relative_error <= self.tolerance)
    }

    pub fn max_error(&self) -> f64 {
        self.entries.iter().map(|e| e.relative_error).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CrossCheckEntry> {
        self.entries.iter().filter(|e| e.relative_error > self.tolerance)
    }
}

/// Symbolic values of Γ, R_ij, r, W_ij, W and χ_ij, keyed as in the
/// finite-difference report.
struct SymbolicQuantities {
    items: Vec<(String, Expr)>,
}

fn label(name: &str, idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("{name}[{}]", parts.join(","))
}

impl SymbolicQuantities {
    fn of(s: &WeylStructure) -> Result<SymbolicQuantities, NumericError> {
        let mut items = Vec::new();
        let gamma = s.christoffel()?;
        let (ric, r) = s.ricci()?;
        let wr = weyl_ricci(s)?;
        let chi = ew_residual(s)?;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    items.push((label("Gamma", &[k, i, j]), gamma.get(&[k, i, j]).clone()));
                }
            }
        }
        for (name, t) in [("Ric", &ric), ("W", &wr), ("chi", &chi)] {
            for i in 0..3 {
                for j in 0..3 {
                    items.push((label(name, &[i, j]), t.get(&[i, j]).clone()));
                }
            }
        }
        items.push(("r".into(), r));
        items.push(("Wscalar".into(), weyl_scalar(s)?));
        Ok(SymbolicQuantities { items })
    }
}

fn numeric_values(fd: &FdCurvature) -> Vec<f64> {
    let mut out = Vec::with_capacity(56);
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                out.push(fd.christoffel[k][(i, j)]);
            }
        }
    }
    for t in [&fd.ricci, &fd.weyl_ricci, &fd.chi] {
        for i in 0..3 {
            for j in 0..3 {
                out.push(t[(i, j)]);
            }
        }
    }
    out.push(fd.ricci_scalar);
    out.push(fd.weyl_scalar);
    out
}

/// Compares the symbolic curvature of `symbolic` against finite differences
/// of `numeric` at each point. Both are instantiated with the point's
/// function values first.
pub fn cross_check_pair(
    symbolic: &WeylStructure,
    numeric: &WeylStructure,
    points: &[SamplePoint],
    tol: f64,
) -> Result<CrossCheckReport, NumericError> {
    if points.is_empty() {
        return Err(NumericError::NoPoints);
    }
    let per_point: Vec<Result<Vec<CrossCheckEntry>, NumericError>> = points
        .par_iter()
        .enumerate()
        .map(|(n, p)| {
            let sym_s = symbolic.substitute(&p.instantiation)?;
            let num_s = numeric.substitute(&p.instantiation)?;
            let quantities = SymbolicQuantities::of(&sym_s)?;
            let fd = fd_curvature(&num_s, &p.coords, DEFAULT_STEP)?;
            let coords = sym_s.chart().coords();
            quantities
                .items
                .iter()
                .zip(numeric_values(&fd))
                .map(|((name, e), b)| {
                    let a = eval_at(e, &coords, &p.coords)?;
                    Ok(CrossCheckEntry {
                        point: n,
                        quantity: name.clone(),
                        symbolic: a,
                        numeric: b,
                        relative_error: relative_error(a, b),
                    })
                })
                .collect()
        })
        .collect();
    let mut entries = Vec::new();
    for r in per_point {
        entries.extend(r?);
    }
    Ok(CrossCheckReport {
        points: points.iter().map(|p| p.coords).collect(),
        tolerance: tol,
        entries,
    })
}

/// Symbolic against finite-difference curvature of the same structure.
pub fn cross_check(s: &WeylStructure, points: &[SamplePoint], tol: f64) -> Result<CrossCheckReport, NumericError> {
    cross_check_pair(s, s, points, tol)
}

/// `n` seeded points in `[lo, hi]³` whose distance to every excluded locus
/// of the instantiated structure, measured as `|p(x)|`, is at least `margin`.
pub fn sample_points(
    s: &WeylStructure,
    instantiation: &Bindings,
    n: usize,
    seed: u64,
    margin: f64,
) -> Result<Vec<SamplePoint>, NumericError> {
    const BOX: (f64, f64) = (0.5, 2.0);
    let inst = s.substitute(instantiation)?;
    let loci = excluded_loci(&inst)?;
    let coords = inst.chart().coords();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > 1000 * n.max(1) {
            return Err(NumericError::NoSamplePoints);
        }
        let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(BOX.0..BOX.1));
        let clear = loci
            .iter()
            .all(|l| eval_at(l, &coords, &x).is_ok_and(|v| v.abs() >= margin));
        if clear {
            out.push(SamplePoint::new(x, instantiation.clone()));
        }
    }
    Ok(out)
}

/// Error of the finite-difference Christoffel symbols and Ricci tensor
/// against the symbolic ones, in the max norm.
pub fn fd_error(s: &WeylStructure, x: &[f64; 3], step: f64) -> Result<f64, NumericError> {
    let coords = s.chart().coords();
    let gamma = s.christoffel()?;
    let (ric, _) = s.ricci()?;
    let fd = fd_curvature(s, x, step)?;
    let mut err: f64 = 0.0;
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let a = eval_at(gamma.get(&[k, i, j]), &coords, x)?;
                err = err.max((a - fd.christoffel[k][(i, j)]).abs());
            }
            let a = eval_at(ric.get(&[k, i]), &coords, x)?;
            err = err.max((a - fd.ricci[(k, i)]).abs());
        }
    }
    Ok(err)
}

/// Ratio of finite-difference errors at `step` and `step / 2`; close to 4
/// for a second-order scheme.
pub fn convergence_ratio(s: &WeylStructure, x: &[f64; 3], step: f64) -> Result<f64, NumericError> {
    Ok(fd_error(s, x, step)? / fd_error(s, x, step / 2.0)?)
}

/// Signs of the eigenvalues of the metric at `x`, positive first.
pub fn signature_at(s: &WeylStructure, x: &[f64; 3]) -> Result<[i8; 3], NumericError> {
    let sm = Sampler::new(s, x, DEFAULT_STEP);
    let h = sm.metric(x)?;
    let eig = h.symmetric_eigenvalues();
    let mut signs: Vec<i8> = eig.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect();
    if eig.iter().any(|v| v.abs() <= POLE_THRESHOLD) {
        return Err(NumericError::PoleAtPoint {
            point: *x,
            denominator: "det h".into(),
        });
    }
    signs.sort_by(|a, b| b.cmp(a));
    Ok([signs[0], signs[1], signs[2]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{case1, case1_formal, case2_formal, flat, toda_formal};

    fn yxt() -> [Symbol; 3] {
        crate::tensor::Chart::yxt().coords()
    }

    fn c(name: &str) -> Expr {
        Expr::symbol(Symbol::coordinate(name))
    }

    #[test]
    fn evaluates_rational_values() {
        let e = c("y").pow(4).unwrap().checked_div(&Expr::int(48)).unwrap();
        let v = eval_at(&e, &yxt(), &[2.0, 0.0, 0.0]).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn case1_coefficient() {
        let inst = Bindings::new()
            .with_function(Function::new("R", &[Symbol::coordinate("t")]), c("t"))
            .with_function(Function::new("S", &[Symbol::coordinate("t")]), Expr::one());
        let g = case1_formal().metric().get(2, 2).clone();
        let v = eval(&g, &yxt(), &SamplePoint::new([1.0, 1.0, 1.0], inst)).unwrap();
        assert!((v - 77.0 / 48.0).abs() < 1e-15);
    }

    #[test]
    fn pole_and_missing_symbol() {
        let e = c("y").recip().unwrap();
        assert!(matches!(
            eval_at(&e, &yxt(), &[0.0, 1.0, 1.0]),
            Err(NumericError::PoleAtPoint { .. })
        ));
        let r = crate::catalog::function_of_t("R");
        assert!(matches!(
            eval_at(&r, &yxt(), &[1.0, 1.0, 1.0]),
            Err(NumericError::Uninstantiated(_))
        ));
    }

    #[test]
    fn flat_is_flat() {
        let fd = fd_curvature(&flat(), &[1.0, 2.0, 3.0], DEFAULT_STEP).unwrap();
        assert!(fd.ricci.amax() < 1e-8 && fd.chi.amax() < 1e-8 && fd.weyl_scalar.abs() < 1e-8);
    }

    #[test]
    fn case1_at_one_is_einstein_weyl() {
        let s = case1(&c("t"), &Expr::one()).unwrap();
        let fd = fd_curvature(&s, &[1.0, 1.0, 1.0], DEFAULT_STEP).unwrap();
        assert!(fd.chi.amax() < 1e-5, "{}", fd.chi);
    }

    #[test]
    fn case2_at_one_is_scalar_flat() {
        let s = case2_formal().substitute(&default_instantiation()).unwrap();
        let fd = fd_curvature(&s, &[1.0, 1.0, 1.0], DEFAULT_STEP).unwrap();
        assert!(fd.weyl_scalar.abs() < 1e-5);
    }

    #[test]
    fn toda_cross_check_passes() {
        let inst =
            Bindings::new().with_function(Function::new("R", &[Symbol::coordinate("v")]), c("v").pow(2).unwrap());
        let s = toda_formal();
        let points = sample_points(&s, &inst, 5, 7, DEFAULT_MARGIN).unwrap();
        let report = cross_check(&s, &points, DEFAULT_TOLERANCE).unwrap();
        assert!(report.passed(), "max error {}", report.max_error());
        assert_eq!(report.entries.len(), 5 * 56);
    }

    #[test]
    fn perturbed_metric_fails_on_chi() {
        let s = case1_formal();
        let mut m = s.metric().components();
        let bump = &c("x").pow(3).unwrap() * &Expr::rational(1, 1000);
        m[2][2] = &m[2][2] + &bump;
        let perturbed =
            WeylStructure::from_components(s.chart(), m, std::array::from_fn(|i| s.omega().get(&[i]).clone())).unwrap();
        let points = sample_points(&s, &default_instantiation(), 5, 1, DEFAULT_MARGIN).unwrap();
        let report = cross_check_pair(&s, &perturbed, &points, DEFAULT_TOLERANCE).unwrap();
        assert!(!report.passed());
        assert!(report.failures().any(|e| e.quantity.starts_with("chi")));
    }

    #[test]
    fn toda_signature() {
        let s = crate::catalog::toda_structure(&Expr::zero()).unwrap();
        assert_eq!(signature_at(&s, &[1.0, 1.0, 1.0]).unwrap(), [1, 1, -1]);
        assert_eq!(signature_at(&flat(), &[0.0, 0.0, 0.0]).unwrap(), [1, 1, -1]);
    }

    #[test]
    fn second_order_convergence() {
        let s = case1_formal().substitute(&default_instantiation()).unwrap();
        let ratio = convergence_ratio(&s, &[1.25, 0.75, 1.5], 1e-2).unwrap();
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }
}
