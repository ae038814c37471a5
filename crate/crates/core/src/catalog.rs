//! Catalogued Einstein-Weyl structures, the residual gauge and coordinate
//! freedom of the adapted chart, and the Toda operations.

use num_rational::BigRational;
use thiserror::Error;

use crate::expr::{Bindings, Expr, ExprError, Function, Symbol};
use crate::tensor::{det3, raise_index, Chart, Tensor, TensorError};
use crate::weyl::{classify, Verdict, WeylError, WeylStructure};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("structure is not of case 1")]
    NotCase1,
    #[error("supplied inverse does not invert T")]
    NonInvertibleT,
    #[error("coordinate change has zero Jacobian")]
    ZeroJacobian,
    #[error("Toda kernel is zero")]
    ZeroKernel,
    #[error(transparent)]
    Weyl(#[from] WeylError),
}

impl From<ExprError> for CatalogError {
    fn from(e: ExprError) -> Self {
        CatalogError::Weyl(e.into())
    }
}

impl From<TensorError> for CatalogError {
    fn from(e: TensorError) -> Self {
        CatalogError::Weyl(e.into())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CatalogId {
    Flat,
    Case1,
    Case2,
    GeneralAnsatz,
    Toda,
}

fn c(name: &str) -> Expr {
    Expr::symbol(Symbol::coordinate(name))
}

fn q(n: i64, d: i64) -> Expr {
    Expr::rational(n, d)
}

/// The formal function `name(t)`.
pub fn function_of_t(name: &str) -> Expr {
    Function::new(name, &[Symbol::coordinate("t")]).formal()
}

fn adapted(f: Expr, g: Expr) -> Result<WeylStructure, CatalogError> {
    let (z, o) = (Expr::zero(), Expr::one());
    let metric = [
        [o.clone(), z.clone(), f.clone()],
        [z.clone(), z.clone(), o.clone()],
        [f, o, g],
    ];
    Ok(WeylStructure::from_components(
        &Chart::yxt(),
        metric,
        [z.clone(), z, c("y")],
    )?)
}

/// `h = dy² + 2 dx dt`, `ω = 0`.
pub fn flat() -> WeylStructure {
    let (z, o) = (Expr::zero(), Expr::one());
    let metric = [
        [o.clone(), z.clone(), z.clone()],
        [z.clone(), z.clone(), o.clone()],
        [z.clone(), o, z.clone()],
    ];
    WeylStructure::from_components(&Chart::yxt(), metric, [z.clone(), z.clone(), z]).expect("flat metric")
}

/// The `dt²` coefficient of the case-1 metric.
pub fn case1_g(r: &Expr, s: &Expr) -> Expr {
    let (y, x) = (c("y"), c("x"));
    let y3 = y.pow(3).expect("power");
    let mut g = &x * &(r - &(&y * &q(1, 2)));
    g = &g + &(&y.pow(4).expect("power") * &q(1, 48));
    g = &g + &(&(r * &y3) * &q(1, 12));
    &g + &(s * &y)
}

/// `h1 = dy² + 2 dx dt + (x(R - y/2) + y⁴/48 + R y³/12 + S y) dt²`, `ω = y dt`.
pub fn case1(r: &Expr, s: &Expr) -> Result<WeylStructure, CatalogError> {
    adapted(Expr::zero(), case1_g(r, s))
}

/// `h2 = dy² + 2 dx dt - (4x/y) dy dt + (x²/y² + xy/2 + y⁴/8 + R y² + S y) dt²`,
/// `ω = y dt`.
pub fn case2(r: &Expr, s: &Expr) -> Result<WeylStructure, CatalogError> {
    let (y, x) = (c("y"), c("x"));
    let f = -(&(&x * &Expr::int(2)).checked_div(&y)?);
    let mut g = (&x * &x).checked_div(&(&y * &y))?;
    g = &g + &(&(&x * &y) * &q(1, 2));
    g = &g + &(&y.pow(4)? * &q(1, 8));
    g = &g + &(r * &(&y * &y));
    g = &g + &(s * &y);
    adapted(f, g)
}

pub fn case1_formal() -> WeylStructure {
    case1(&function_of_t("R"), &function_of_t("S")).expect("case 1")
}

pub fn case2_formal() -> WeylStructure {
    case2(&function_of_t("R"), &function_of_t("S")).expect("case 2")
}

/// `h = dy² + 2 dx dt + 2F dy dt + G dt²`, `ω = y dt`.
pub fn general_ansatz(f: &Expr, g: &Expr) -> Result<WeylStructure, CatalogError> {
    adapted(f.clone(), g.clone())
}

/// Pulls back `(Ω h, ω + d ln Ω)` along the change of chart
/// `t̃ = T(t)`, `ỹ = y/T_t - 2 T_tt/T_t`, `x̃ = x/T_t³ + P(y, t)`, `Ω = T_t²`.
/// `t_inv` must satisfy `T(t_inv(t)) = t`. The result uses the same
/// coordinate names for the new chart.
pub fn apply_gauge_transform(
    s: &WeylStructure,
    t_fn: &Expr,
    t_inv: &Expr,
    p: &Expr,
) -> Result<WeylStructure, CatalogError> {
    let chart = s.chart().clone();
    let [y, x, t] = chart.coords();
    let at_inv = Bindings::new().with(t, t_inv.clone());
    if t_fn.substitute(&at_inv)? != Expr::symbol(t) {
        return Err(CatalogError::NonInvertibleT);
    }
    let tt = t_fn.diff(t)?;
    if tt.is_zero() {
        return Err(CatalogError::NonInvertibleT);
    }
    let ttt = tt.diff(t)?;
    let tt_new = tt.substitute(&at_inv)?;
    let ttt_new = ttt.substitute(&at_inv)?;
    let y_old = &(&tt_new * &Expr::symbol(y)) + &(&ttt_new * &Expr::int(2));
    let t_old = t_inv.clone();
    let p_old = p.substitute(&Bindings::new().with(y, y_old.clone()).with(t, t_old.clone()))?;
    let x_old = &tt_new.pow(3)? * &(&Expr::symbol(x) - &p_old);
    let old = [y_old, x_old, t_old];
    let jac: [[Expr; 3]; 3] = {
        let mut m: [[Expr; 3]; 3] = Default::default();
        for (a, row) in m.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                *cell = old[a].diff(chart.coord(b))?;
            }
        }
        m
    };
    let jdet = det3(&jac);
    if jdet.is_zero() {
        return Err(CatalogError::ZeroJacobian);
    }
    let to_new = Bindings::new()
        .with(y, old[0].clone())
        .with(x, old[1].clone())
        .with(t, old[2].clone());
    let h_old = s.metric().components();
    let mut h_at = h_old.clone();
    for (i, row) in h_old.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            h_at[i][j] = e.substitute(&to_new)?;
        }
    }
    let omega_at: Vec<Expr> = s
        .omega()
        .components()
        .iter()
        .map(|e| e.substitute(&to_new))
        .collect::<Result<_, _>>()?;
    let conf = &tt_new * &tt_new;
    let mut h_new: [[Expr; 3]; 3] = Default::default();
    for b in 0..3 {
        for cc in 0..3 {
            let mut acc = Expr::zero();
            for a in 0..3 {
                for d in 0..3 {
                    if jac[a][b].is_zero() || jac[d][cc].is_zero() || h_at[a][d].is_zero() {
                        continue;
                    }
                    acc = &acc + &(&(&jac[a][b] * &jac[d][cc]) * &h_at[a][d]);
                }
            }
            h_new[b][cc] = &acc * &conf;
        }
    }
    let mut omega_new: [Expr; 3] = Default::default();
    for (b, slot) in omega_new.iter_mut().enumerate() {
        let mut acc = conf.diff(chart.coord(b))?.checked_div(&conf)?;
        for a in 0..3 {
            acc = &acc + &(&jac[a][b] * &omega_at[a]);
        }
        *slot = acc;
    }
    Ok(WeylStructure::from_components(&chart, h_new, omega_new)?
        .with_orientation(s.orientation())
        .with_refpoint(s.refpoint().clone()))
}

/// `h = 4 (z + R(v))² / (1 + vw)² dv dw + dz²`, `ω = 4/(z + R(v)) dz`.
pub fn toda_structure(r: &Expr) -> Result<WeylStructure, CatalogError> {
    let (v, w, z) = (c("v"), c("w"), c("z"));
    let zr = &z + r;
    let one_vw = &Expr::one() + &(&v * &w);
    let g = (&(&zr * &zr) * &Expr::int(2)).checked_div(&(&one_vw * &one_vw))?;
    let zero = Expr::zero();
    let metric = [
        [zero.clone(), g.clone(), zero.clone()],
        [g, zero.clone(), zero.clone()],
        [zero.clone(), zero.clone(), Expr::one()],
    ];
    let omega = [zero.clone(), zero, Expr::int(4).checked_div(&zr)?];
    Ok(WeylStructure::from_components(&Chart::vwz(), metric, omega)?)
}

pub fn toda_formal() -> WeylStructure {
    let r = Function::new("R", &[Symbol::coordinate("v")]).formal();
    toda_structure(&r).expect("toda structure")
}

/// The kernel `N = 2 (z + R(v)) / (1 + vw)` of the Toda solution.
pub fn toda_kernel(r: &Expr) -> Expr {
    let (v, w, z) = (c("v"), c("w"), c("z"));
    (&(&z + r) * &Expr::int(2))
        .checked_div(&(&Expr::one() + &(&v * &w)))
        .expect("nonzero denominator")
}

/// `h = N² dv dw + dz²` (so `h_vw = N²/2`), `ω = (4 N_z/N) dz`: the Toda
/// form with `e^u = N²`.
pub fn toda_form(n: &Expr) -> Result<WeylStructure, CatalogError> {
    if n.is_zero() {
        return Err(CatalogError::ZeroKernel);
    }
    let z = Symbol::coordinate("z");
    let half = &(n * n) * &q(1, 2);
    let zero = Expr::zero();
    let metric = [
        [zero.clone(), half.clone(), zero.clone()],
        [half, zero.clone(), zero.clone()],
        [zero.clone(), zero.clone(), Expr::one()],
    ];
    let omega = [zero.clone(), zero, (&n.diff(z)? * &Expr::int(4)).checked_div(n)?];
    Ok(WeylStructure::from_components(&Chart::vwz(), metric, omega)?)
}

/// `4 ∂_w(2 N_v/N) + ∂_z²(N²)`, the Toda operator on `u = 2 log N`.
pub fn toda_residual(n: &Expr) -> Result<Expr, CatalogError> {
    if n.is_zero() {
        return Err(CatalogError::ZeroKernel);
    }
    let [v, w, z] = Chart::vwz().coords();
    let uv = (&n.diff(v)? * &Expr::int(2)).checked_div(n)?;
    let first = &uv.diff(w)? * &Expr::int(4);
    let second = (n * n).diff(z)?.diff(z)?;
    Ok(&first + &second)
}

/// `½ u_zz + ¼ u_z²` with `u_z = 2 N_z/N`.
pub fn toda_weyl_scalar(n: &Expr) -> Result<Expr, CatalogError> {
    if n.is_zero() {
        return Err(CatalogError::ZeroKernel);
    }
    let z = Symbol::coordinate("z");
    let uz = (&n.diff(z)? * &Expr::int(2)).checked_div(n)?;
    Ok(&(&uz.diff(z)? * &q(1, 2)) + &(&(&uz * &uz) * &q(1, 4)))
}

/// The weighted vector `V = f ∂_x` of weight -1/2 on a case-1 structure,
/// with `f` adjoined through `d log f = -α` where `D(∗F) = α ⊗ ∗F`.
pub fn dkp_constant_vector(s: &WeylStructure) -> Result<(Tensor, BigRational), CatalogError> {
    let cls = match classify(s) {
        Ok(cls) if cls.verdict == Verdict::Case1 => cls,
        Ok(_) | Err(WeylError::NotEW) | Err(WeylError::NotScalarFlat) | Err(WeylError::DegenerateDual) => {
            return Err(CatalogError::NotCase1)
        }
        Err(e) => return Err(e.into()),
    };
    let alpha = cls.alpha.expect("case 1 carries alpha");
    let beta = cls.dual.expect("case 1 carries the dual");
    let coords = s.chart().coords();
    let alpha_c: Vec<Expr> = alpha.components().to_vec();
    let f = Symbol::custom("f", move |f| {
        let fe = Expr::symbol(f);
        coords
            .iter()
            .zip(&alpha_c)
            .filter(|(_, a)| !a.is_zero())
            .map(|(&c, a)| (c, -(&(a * &fe))))
            .collect()
    });
    let v = raise_index(&beta, 0, s.metric())?.scale(&Expr::symbol(f));
    let weight = BigRational::new((-1).into(), 2.into());
    Ok((v.with_weight(weight.clone()), weight))
}
