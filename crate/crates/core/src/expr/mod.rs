//! Exact symbolic kernel: canonical rational functions over the rationals in
//! coordinates and function-symbol jets, with formal partial derivatives.
//!
//! An [`Expr`] is stored as `num / den` with integer-coefficient polynomials:
//! `num` and `den` are coprime, `den` has positive leading coefficient, and the
//! integer contents of `num` and `den` are coprime. Dividing through by the
//! leading coefficient of `den` gives the monic-denominator form over the
//! rationals, so two values are equal exactly when their stored forms are.

mod gcd;
pub mod poly;
mod render;
mod subst;
pub mod symbol;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

pub use gcd::gcd as poly_gcd;
pub use poly::{Monomial, Poly};
pub use subst::Bindings;
pub use symbol::{max_jet_order, set_max_jet_order, Function, Jet, Symbol, SymbolKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by an expression that is identically zero")]
    DivisionByZeroExpr,
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("inconsistent binding for `{0}`")]
    InconsistentJetBinding(String),
    #[error("jet of `{function}` of order {order} exceeds the cap {max}")]
    JetDepthExceeded { function: String, order: u32, max: u32 },
    #[error("`{function}` takes {expected} arguments, got {found}")]
    ArityMismatch {
        function: String,
        expected: usize,
        found: usize,
    },
}

#[derive(PartialEq, Eq, Hash)]
struct Fraction {
    num: Poly,
    den: Poly,
}

/// Canonical rational function. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<Fraction>);

/// Unnormalized expression tree, as produced by a parser.
#[derive(Clone, Debug, PartialEq)]
pub enum RawExpr {
    Int(BigInt),
    Atom(Expr),
    Neg(Box<RawExpr>),
    Add(Box<RawExpr>, Box<RawExpr>),
    Sub(Box<RawExpr>, Box<RawExpr>),
    Mul(Box<RawExpr>, Box<RawExpr>),
    Div(Box<RawExpr>, Box<RawExpr>),
    Pow(Box<RawExpr>, i64),
}

/// Builds the canonical form of a raw tree.
pub fn normalize(e: &RawExpr) -> Result<Expr, ExprError> {
    Ok(match e {
        RawExpr::Int(n) => Expr::from_bigint(n.clone()),
        RawExpr::Atom(a) => a.clone(),
        RawExpr::Neg(a) => -normalize(a)?,
        RawExpr::Add(a, b) => normalize(a)? + normalize(b)?,
        RawExpr::Sub(a, b) => normalize(a)? - normalize(b)?,
        RawExpr::Mul(a, b) => normalize(a)? * normalize(b)?,
        RawExpr::Div(a, b) => normalize(a)?.checked_div(&normalize(b)?)?,
        RawExpr::Pow(a, k) => normalize(a)?.pow(*k)?,
    })
}

impl Expr {
    fn from_coprime(num: Poly, den: Poly) -> Expr {
        debug_assert!(!den.is_zero());
        let mut num = num;
        let mut den = den;
        if num.is_zero() {
            return Expr::zero();
        }
        let c = num.content().gcd(&den.content());
        if !c.is_one() {
            num = num.div_scalar(&c);
            den = den.div_scalar(&c);
        }
        if den.leading_coeff().is_negative() {
            num = num.neg();
            den = den.neg();
        }
        Expr(Arc::new(Fraction { num, den }))
    }

    /// Canonical form of `num / den` for arbitrary polynomials.
    pub fn from_polys(num: Poly, den: Poly) -> Result<Expr, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZeroExpr);
        }
        let g = gcd::gcd(&num, &den);
        if g.is_one() {
            return Ok(Self::from_coprime(num, den));
        }
        let num = num.div_exact(&g).expect("gcd divides numerator");
        let den = den.div_exact(&g).expect("gcd divides denominator");
        Ok(Self::from_coprime(num, den))
    }

    pub fn from_poly(p: Poly) -> Expr {
        Self::from_coprime(p, Poly::one())
    }

    pub fn zero() -> Expr {
        Expr(Arc::new(Fraction {
            num: Poly::zero(),
            den: Poly::one(),
        }))
    }

    pub fn one() -> Expr {
        Self::int(1)
    }

    pub fn int(n: i64) -> Expr {
        Self::from_bigint(BigInt::from(n))
    }

    pub fn from_bigint(n: BigInt) -> Expr {
        Self::from_coprime(Poly::constant(n), Poly::one())
    }

    /// `n / d`; panics if `d == 0`.
    pub fn rational(n: i64, d: i64) -> Expr {
        Self::from_rational(&BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(q: &BigRational) -> Expr {
        Self::from_coprime(Poly::constant(q.numer().clone()), Poly::constant(q.denom().clone()))
    }

    pub fn symbol(s: Symbol) -> Expr {
        Self::from_coprime(Poly::var(s), Poly::one())
    }

    pub fn numerator(&self) -> &Poly {
        &self.0.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.0.den
    }

    pub fn is_zero(&self) -> bool {
        self.0.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.num.is_one() && self.0.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.0.num.is_constant() && self.0.den.is_constant()
    }

    pub fn is_polynomial(&self) -> bool {
        self.0.den.is_constant()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let n = self.0.num.constant_value()?;
        let d = self.0.den.constant_value()?;
        Some(BigRational::new(n, d))
    }

    /// The value as a plain symbol, if it is one.
    pub fn as_symbol(&self) -> Option<Symbol> {
        if !self.0.den.is_one() || !self.0.num.is_monomial() {
            return None;
        }
        let (m, c) = &self.0.num.terms()[0];
        if !c.is_one() {
            return None;
        }
        let mut it = m.factors();
        match (it.next(), it.next()) {
            (Some((s, 1)), None) => Some(s),
            _ => None,
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut s = self.0.num.variables();
        s.extend(self.0.den.variables());
        s
    }

    /// True when no indeterminate of the expression depends on `c`.
    pub fn is_free_of(&self, c: Symbol) -> Result<bool, ExprError> {
        Ok(self.diff(c)?.is_zero())
    }

    pub fn recip(&self) -> Result<Expr, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZeroExpr);
        }
        Ok(Self::from_coprime(self.0.den.clone(), self.0.num.clone()))
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        Ok(self * &other.recip()?)
    }

    pub fn pow(&self, k: i64) -> Result<Expr, ExprError> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let e = k.unsigned_abs() as u32;
        Ok(Self::from_coprime(base.0.num.pow(e), base.0.den.pow(e)))
    }

    pub fn scale(&self, q: &BigRational) -> Expr {
        self * &Expr::from_rational(q)
    }

    /// Formal partial derivative with respect to the coordinate `c`.
    pub fn diff(&self, c: Symbol) -> Result<Expr, ExprError> {
        if !c.is_coordinate() {
            return Err(ExprError::UnknownSymbol(c.name()));
        }
        let dn = diff_poly(&self.0.num, c)?;
        if self.0.den.is_constant() {
            let d = Expr::from_coprime(Poly::one(), self.0.den.clone());
            return Ok(&dn * &d);
        }
        let dd = diff_poly(&self.0.den, c)?;
        if dd.is_zero() {
            let d = Expr::from_coprime(Poly::one(), self.0.den.clone());
            return Ok(&dn * &d);
        }
        if dn.is_polynomial() && dd.is_polynomial() {
            // (a' b - a b') / b^2 with a', b' polynomial up to a constant.
            let scale_n = dn.0.den.clone();
            let scale_d = dd.0.den.clone();
            let num =
                dn.0.num
                    .mul(&self.0.den)
                    .mul(&scale_d)
                    .sub(&self.0.num.mul(&dd.0.num).mul(&scale_n));
            return Ok(reduce_over_square(num, &self.0.den, scale_n.mul(&scale_d)));
        }
        let den = Expr::from_coprime(self.0.den.clone(), Poly::one());
        let num = Expr::from_coprime(self.0.num.clone(), Poly::one());
        (&(&dn * &den) - &(&num * &dd)).checked_div(&(&den * &den))
    }

    /// Simultaneous substitution, then normalization.
    pub fn substitute(&self, bindings: &Bindings) -> Result<Expr, ExprError> {
        subst::substitute(self, bindings)
    }

    /// Canonical infix rendering; parses back to the same value.
    pub fn render(&self) -> String {
        render::render(self)
    }

    /// Evaluates the numerator and denominator with a caller-supplied value
    /// for each indeterminate.
    pub fn eval_parts<T, F>(&self, mut value: F, zero: T, from_int: impl Fn(&BigInt) -> T) -> (T, T)
    where
        T: Clone + Add<Output = T> + Mul<Output = T>,
        F: FnMut(Symbol, u32) -> T,
    {
        let n = self.0.num.eval_with(&mut value, zero.clone(), &from_int);
        let d = self.0.den.eval_with(&mut value, zero, &from_int);
        (n, d)
    }
}

/// Reduces `num / (b^2 * k)` given that `b` is coprime to the original
/// numerator it was derived from, cancelling via two gcds against `b`.
fn reduce_over_square(num: Poly, b: &Poly, k: Poly) -> Expr {
    if num.is_zero() {
        return Expr::zero();
    }
    let g1 = gcd::gcd(&num, b);
    let num = num.div_exact(&g1).unwrap();
    let b1 = b.div_exact(&g1).unwrap();
    let g2 = gcd::gcd(&num, b);
    let num = num.div_exact(&g2).unwrap();
    let b2 = b.div_exact(&g2).unwrap();
    let den = b1.mul(&b2).mul(&k);
    // `k` is an integer constant, handled by the content normalisation.
    Expr::from_coprime(num, den)
}

fn diff_poly(p: &Poly, c: Symbol) -> Result<Expr, ExprError> {
    let mut poly_acc = Poly::zero();
    let mut poly_scale = BigInt::one();
    let mut rest: Option<Expr> = None;
    for v in p.variables() {
        let dv = v.partial(c)?;
        if dv.is_zero() {
            continue;
        }
        let dp = p.derivative(v);
        if dv.is_polynomial() {
            // dv = n / k with constant k; accumulate over a common integer scale.
            let k = dv.0.den.constant_value().unwrap();
            let l = poly_scale.lcm(&k);
            let acc_factor = &l / &poly_scale;
            let term_factor = &l / &k;
            poly_acc = poly_acc.scale(&acc_factor).add(&dp.mul(&dv.0.num).scale(&term_factor));
            poly_scale = l;
        } else {
            let term = &Expr::from_coprime(dp, Poly::one()) * &dv;
            rest = Some(match rest {
                Some(r) => &r + &term,
                None => term,
            });
        }
    }
    let base = Expr::from_coprime(poly_acc, Poly::constant(poly_scale));
    Ok(match rest {
        Some(r) => &base + &r,
        None => base,
    })
}

fn add_fractions(a: &Expr, b: &Expr, subtract: bool) -> Expr {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return if subtract { -b } else { b.clone() };
    }
    let (an, ad) = (&a.0.num, &a.0.den);
    let bn = if subtract { b.0.num.neg() } else { b.0.num.clone() };
    let bd = &b.0.den;
    if ad == bd {
        let num = an.add(&bn);
        if ad.is_constant() {
            return Expr::from_coprime(num, ad.clone());
        }
        return Expr::from_polys(num, ad.clone()).unwrap();
    }
    if ad.is_constant() && bd.is_constant() {
        let num = an.scale(&bd.leading_coeff()).add(&bn.scale(&ad.leading_coeff()));
        return Expr::from_coprime(num, ad.mul(bd));
    }
    let g = gcd::gcd(ad, bd);
    if g.is_one() {
        let num = an.mul(bd).add(&bn.mul(ad));
        return Expr::from_coprime(num, ad.mul(bd));
    }
    let ad1 = ad.div_exact(&g).unwrap();
    let bd1 = bd.div_exact(&g).unwrap();
    let num = an.mul(&bd1).add(&bn.mul(&ad1));
    let den = ad1.mul(bd);
    if num.is_zero() {
        return Expr::zero();
    }
    let g2 = gcd::gcd(&num, &g);
    if g2.is_one() {
        Expr::from_coprime(num, den)
    } else {
        Expr::from_coprime(num.div_exact(&g2).unwrap(), den.div_exact(&g2).unwrap())
    }
}

fn mul_fractions(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    let (an, ad, bn, bd) = (&a.0.num, &a.0.den, &b.0.num, &b.0.den);
    let g1 = if bd.is_constant() {
        Poly::one()
    } else {
        gcd::gcd(an, bd)
    };
    let g2 = if ad.is_constant() {
        Poly::one()
    } else {
        gcd::gcd(bn, ad)
    };
    let (an, bd) = cancel(an, bd, &g1);
    let (bn, ad) = cancel(bn, ad, &g2);
    Expr::from_coprime(an.mul(&bn), ad.mul(&bd))
}

fn cancel(n: &Poly, d: &Poly, g: &Poly) -> (Poly, Poly) {
    if g.is_one() {
        (n.clone(), d.clone())
    } else {
        (n.div_exact(g).unwrap(), d.div_exact(g).unwrap())
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        add_fractions(self, rhs, false)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        add_fractions(self, rhs, true)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        mul_fractions(self, rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr(Arc::new(Fraction {
            num: self.0.num.neg(),
            den: self.0.den.clone(),
        }))
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| a + b)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Expr {
        Expr::symbol(s)
    }
}

impl Default for Expr {
    fn default() -> Expr {
        Expr::zero()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(name: &str) -> Expr {
        Expr::symbol(Symbol::coordinate(name))
    }

    #[test]
    fn polynomial_cancellation() {
        let y = c("y");
        let e = (&(&y * &y) - &Expr::one()).checked_div(&(&y - &Expr::one())).unwrap();
        assert_eq!(e, &y + &Expr::one());
    }

    #[test]
    fn distributivity_cancels() {
        let (x, y) = (c("x"), c("y"));
        let t = Symbol::coordinate("t");
        let r = Function::new("R", &[t]).formal();
        let half_y = y.scale(&BigRational::new(1.into(), 2.into()));
        let lhs = &x * &(&r - &half_y);
        let rhs = &(&x * &r) - &(&x * &half_y);
        assert!((&lhs - &rhs).is_zero());
    }

    #[test]
    fn additive_inverse() {
        let y = c("y");
        let a = y.recip().unwrap();
        let b = (-&y).recip().unwrap();
        assert!((&a + &b).is_zero());
    }

    #[test]
    fn zero_has_unit_denominator() {
        let y = c("y");
        let z = &y.recip().unwrap() - &y.recip().unwrap();
        assert!(z.is_zero());
        assert!(z.denominator().is_one());
    }

    #[test]
    fn division_by_zero_is_reported() {
        let y = c("y");
        let zero = &y - &y;
        assert_eq!(y.checked_div(&zero), Err(ExprError::DivisionByZeroExpr));
        assert_eq!(zero.pow(-1), Err(ExprError::DivisionByZeroExpr));
    }

    #[test]
    fn square_expansion_is_zero() {
        let y = c("y");
        let one = Expr::one();
        let e = &(&(&y + &one).pow(2).unwrap() - &y.pow(2).unwrap()) - &(&(&Expr::int(2) * &y) + &one);
        assert!(e.is_zero());
        assert!(Expr::zero().is_zero());
    }

    #[test]
    fn jets_are_independent() {
        let t = Symbol::coordinate("t");
        let r = Function::new("R", &[t]);
        assert!(!r.derivative(&[1]).unwrap().is_zero());
    }

    #[test]
    fn derivative_examples() {
        let (y, tt) = (c("y"), c("t"));
        let t = Symbol::coordinate("t");
        assert_eq!((&y * &tt).diff(t).unwrap(), y);
        let r = Function::new("R", &[t]);
        let e = &r.formal() * &y.pow(3).unwrap().scale(&BigRational::new(1.into(), 12.into()));
        let want = &r.derivative(&[1]).unwrap() * &y.pow(3).unwrap().scale(&BigRational::new(1.into(), 12.into()));
        assert_eq!(e.diff(t).unwrap(), want);
    }

    #[test]
    fn custom_rule_derivative() {
        let t = Symbol::coordinate("t");
        let r = Function::new("R", &[t]).formal();
        let f = Symbol::custom("f", |f| {
            vec![(
                t,
                (&r * &Expr::symbol(f)).scale(&BigRational::new((-1).into(), 2.into())),
            )]
        });
        let d = Expr::symbol(f).diff(t).unwrap();
        let want = (&r * &Expr::symbol(f)).scale(&BigRational::new((-1).into(), 2.into()));
        assert_eq!(d, want);
        assert!(Expr::symbol(f).diff(Symbol::coordinate("y")).unwrap().is_zero());
    }

    #[test]
    fn quotient_rule() {
        let (y, x) = (c("y"), c("x"));
        let ys = Symbol::coordinate("y");
        let e = x.checked_div(&(&y * &y + Expr::one())).unwrap();
        let d = e.diff(ys).unwrap();
        let want = (&Expr::int(-2) * &x * &y)
            .checked_div(&(&y * &y + Expr::one()).pow(2).unwrap())
            .unwrap();
        assert_eq!(d, want);
    }

    #[test]
    fn diff_wrt_non_coordinate_fails() {
        let t = Symbol::coordinate("t");
        let r = Function::new("R", &[t]).formal();
        let s = r.as_symbol().unwrap();
        assert!(matches!(c("y").diff(s), Err(ExprError::UnknownSymbol(_))));
    }
}
