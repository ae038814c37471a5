//! Multivariate polynomial GCD over the integers.
//!
//! Strategy: strip integer and monomial content, certify the common coprime
//! case with modular univariate images, try direct divisibility, and fall back
//! to a recursive primitive remainder sequence.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use super::poly::{Monomial, Poly};
use super::symbol::Symbol;

const PRIME: u64 = (1u64 << 61) - 1;

/// Primitive GCD with positive leading coefficient. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.primitive();
    }
    if b.is_zero() {
        return a.primitive();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mono = ma.gcd(&mb);
    let a = strip(a, &ma);
    let b = strip(b, &mb);
    let g = gcd_stripped(&a, &b);
    if mono.is_one() {
        g
    } else {
        g.mul_monomial(&mono, &BigInt::one())
    }
}

fn strip(p: &Poly, m: &Monomial) -> Poly {
    let q = if m.is_one() { p.clone() } else { p.div_monomial(m) };
    q.primitive()
}

/// GCD of primitive polynomials with no monomial content.
fn gcd_stripped(a: &Poly, b: &Poly) -> Poly {
    if a.is_constant() || b.is_constant() {
        return Poly::one();
    }
    if a == b {
        return a.clone();
    }
    let va = a.variables();
    let vb = b.variables();
    // A variable present in only one argument cannot occur in the gcd.
    if let Some(&v) = va.difference(&vb).next() {
        return gcd_with_coefficients(b, a, v);
    }
    if let Some(&v) = vb.difference(&va).next() {
        return gcd_with_coefficients(a, b, v);
    }
    let vars: Vec<Symbol> = va.into_iter().collect();
    let bounds = match modular_degree_bounds(a, b, &vars) {
        Some(bounds) => bounds,
        None => vars.iter().map(|&v| a.degree_in(v).min(b.degree_in(v))).collect(),
    };
    if bounds.iter().all(|&d| d == 0) {
        return Poly::one();
    }
    let matches = |p: &Poly| vars.iter().zip(&bounds).all(|(&v, &d)| p.degree_in(v) == d);
    if matches(b) && b.divides(a) {
        return b.clone();
    }
    if matches(a) && a.divides(b) {
        return a.clone();
    }
    if let Some(g) = heuristic_gcd(a, b, &vars) {
        return g.primitive();
    }
    // Main variable: smallest positive bound keeps the remainder sequence short.
    let (main, _) = vars
        .iter()
        .zip(&bounds)
        .filter(|(_, &d)| d > 0)
        .min_by_key(|(&v, &d)| (d, a.degree_in(v).max(b.degree_in(v))))
        .unwrap();
    prs_gcd(a, b, *main)
}

/// gcd(p, q) where `v` occurs in `q` but not in `p`: reduce `p` against each
/// coefficient of `q` with respect to `v`.
fn gcd_with_coefficients(p: &Poly, q: &Poly, v: Symbol) -> Poly {
    let mut g = p.clone();
    let mut coeffs = q.coefficients_in(v);
    coeffs.sort_by_key(|c| c.len());
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

/// Upper bounds for the degree of the gcd in each variable, from univariate
/// images modulo a prime. Each bound is exact unless the evaluation point is
/// unlucky; a bound of zero is always certified.
fn modular_degree_bounds(a: &Poly, b: &Poly, vars: &[Symbol]) -> Option<Vec<u32>> {
    let ra = reduce_mod(a);
    let rb = reduce_mod(b);
    let mut out = Vec::with_capacity(vars.len());
    for &v in vars {
        let da = a.degree_in(v);
        let db = b.degree_in(v);
        let mut found = None;
        for _ in 0..4 {
            let point: Vec<(Symbol, u64)> = vars
                .iter()
                .filter(|&&w| w != v)
                .map(|&w| (w, next_random() % (PRIME - 2) + 2))
                .collect();
            let ia = univariate_image(&ra, v, &point);
            let ib = univariate_image(&rb, v, &point);
            if degree(&ia) != Some(da as usize) || degree(&ib) != Some(db as usize) {
                continue;
            }
            found = Some(degree(&gcd_mod(ia, ib)).unwrap_or(0) as u32);
            break;
        }
        out.push(found?);
    }
    Some(out)
}

fn reduce_mod(p: &Poly) -> Vec<(Vec<(Symbol, u32)>, u64)> {
    let pm = BigInt::from(PRIME);
    p.terms()
        .iter()
        .map(|(m, c)| {
            let r = c.mod_floor(&pm).to_u64().unwrap();
            (m.factors().collect(), r)
        })
        .collect()
}

fn univariate_image(terms: &[(Vec<(Symbol, u32)>, u64)], v: Symbol, point: &[(Symbol, u64)]) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for (m, c) in terms {
        let mut val = *c;
        let mut k = 0usize;
        for &(s, e) in m {
            if s == v {
                k = e as usize;
            } else {
                let x = point.iter().find(|(w, _)| *w == s).unwrap().1;
                val = mulmod(val, powmod(x, e as u64));
            }
        }
        if out.len() <= k {
            out.resize(k + 1, 0);
        }
        out[k] = addmod(out[k], val);
    }
    trim(&mut out);
    out
}

fn degree(p: &[u64]) -> Option<usize> {
    if p.is_empty() {
        None
    } else {
        Some(p.len() - 1)
    }
}

fn trim(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn gcd_mod(mut a: Vec<u64>, mut b: Vec<u64>) -> Vec<u64> {
    while !b.is_empty() {
        let r = rem_mod(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn rem_mod(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let inv = invmod(b[db]);
    while r.len() > db {
        let k = r.len() - 1;
        let f = mulmod(r[k], inv);
        let shift = k - db;
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = submod(r[shift + i], mulmod(f, bi));
        }
        r.pop();
        trim(&mut r);
    }
    r
}

fn addmod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= PRIME {
        s - PRIME
    } else {
        s
    }
}

fn submod(a: u64, b: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + PRIME - b
    }
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    acc
}

fn invmod(a: u64) -> u64 {
    powmod(a, PRIME - 2)
}

/// Deterministic splitmix64 stream; only affects which images are sampled.
fn next_random() -> u64 {
    static STATE: AtomicU64 = AtomicU64::new(0x9e37_79b9_7f4a_7c15);
    let mut z = STATE.fetch_add(0x9e37_79b9_7f4a_7c15, Ordering::Relaxed);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn max_norm(p: &Poly) -> BigInt {
    p.terms().iter().map(|(_, c)| c.abs()).max().unwrap_or_default()
}

/// Heuristic GCD: evaluate the first variable at a large integer, recurse,
/// and recover the candidate by symmetric ξ-adic expansion. A candidate
/// that divides both inputs is the gcd, because ξ exceeds twice the smaller
/// coefficient norm.
fn heuristic_gcd(a: &Poly, b: &Poly, vars: &[Symbol]) -> Option<Poly> {
    let Some((&v, rest)) = vars.split_first() else {
        let (x, y) = (a.constant_value()?, b.constant_value()?);
        return Some(Poly::constant(x.gcd(&y)));
    };
    let content = a.content().gcd(&b.content());
    let a = a.div_scalar(&content);
    let b = b.div_scalar(&content);
    let mut xi = max_norm(&a).min(max_norm(&b)) * 2 + 29;
    for _ in 0..6 {
        let ea = eval_at(&a, v, &xi);
        let eb = eval_at(&b, v, &xi);
        if !ea.is_zero() && !eb.is_zero() {
            let rest_vars: Vec<Symbol> = rest
                .iter()
                .copied()
                .filter(|w| ea.degree_in(*w) > 0 || eb.degree_in(*w) > 0)
                .collect();
            if let Some(h) = heuristic_gcd(&ea, &eb, &rest_vars) {
                let cand = interpolate(&h, v, &xi).primitive();
                if !cand.is_zero() && cand.divides(&a) && cand.divides(&b) {
                    return Some(cand.scale(&content));
                }
            }
        }
        xi = &xi * 73794 * xi.sqrt().sqrt() / 27011 + 1;
    }
    None
}

fn eval_at(p: &Poly, v: Symbol, xi: &BigInt) -> Poly {
    let mut acc = Poly::zero();
    for c in p.coefficients_in(v).iter().rev() {
        acc = acc.scale(xi).add(c);
    }
    acc
}

/// Inverse of [`eval_at`] under the symmetric residue system modulo `xi`.
fn interpolate(h: &Poly, v: Symbol, xi: &BigInt) -> Poly {
    let half = xi / 2;
    let mut h = h.clone();
    let mut coeffs = Vec::new();
    while !h.is_zero() {
        let digit = Poly::from_terms(
            h.terms()
                .iter()
                .map(|(m, c)| {
                    let mut r = c.mod_floor(xi);
                    if r > half {
                        r -= xi;
                    }
                    (m.clone(), r)
                })
                .collect(),
        );
        h = h.sub(&digit).div_scalar(xi);
        coeffs.push(digit);
    }
    Poly::from_coefficients_in(v, &coeffs)
}

/// Primitive remainder sequence in the main variable `v`, with coefficients
/// in the polynomial ring of the remaining variables.
fn prs_gcd(a: &Poly, b: &Poly, v: Symbol) -> Poly {
    let mut pa = a.coefficients_in(v);
    let mut pb = b.coefficients_in(v);
    let ca = coeff_content(&pa);
    let cb = coeff_content(&pb);
    let c = gcd(&ca, &cb);
    pa = divide_coeffs(&pa, &ca);
    pb = divide_coeffs(&pb, &cb);
    if pa.len() < pb.len() {
        std::mem::swap(&mut pa, &mut pb);
    }
    let g = loop {
        let r = pseudo_remainder(&pa, &pb);
        if r.is_empty() {
            break pb;
        }
        if r.len() == 1 {
            break vec![Poly::one()];
        }
        let cr = coeff_content(&r);
        let r = divide_coeffs(&r, &cr);
        pa = pb;
        pb = r;
    };
    let g = Poly::from_coefficients_in(v, &g).primitive();
    c.mul(&g).primitive()
}

fn coeff_content(cs: &[Poly]) -> Poly {
    let mut sorted: Vec<&Poly> = cs.iter().filter(|c| !c.is_zero()).collect();
    sorted.sort_by_key(|c| c.len());
    let mut g = Poly::zero();
    for c in sorted {
        g = gcd(&g, c);
        if g.is_constant() {
            return Poly::one();
        }
    }
    g
}

fn divide_coeffs(cs: &[Poly], d: &Poly) -> Vec<Poly> {
    if d.is_one() {
        return cs.to_vec();
    }
    cs.iter()
        .map(|c| c.div_exact(d).expect("content divides every coefficient"))
        .collect()
}

/// Pseudo-remainder of univariate polynomials over a polynomial ring.
/// Inputs are coefficient vectors, lowest degree first, with nonzero top
/// coefficient. Returns the remainder trimmed of leading zeros.
fn pseudo_remainder(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let db = b.len() - 1;
    let lb = &b[db];
    let mut r: Vec<Poly> = a.to_vec();
    while r.len() > db {
        let k = r.len() - 1;
        let lr = r[k].clone();
        let shift = k - db;
        for c in r.iter_mut() {
            *c = c.mul(lb);
        }
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = r[shift + i].sub(&bi.mul(&lr));
        }
        debug_assert!(r[k].is_zero());
        r.pop();
        while r.last().is_some_and(|c| c.is_zero()) {
            r.pop();
        }
    }
    r
}
