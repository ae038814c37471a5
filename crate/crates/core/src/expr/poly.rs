//! Sparse multivariate polynomials with integer coefficients.
//!
//! Terms are kept sorted in descending graded-lexicographic order, with no
//! zero coefficients. Variables are ordered by symbol id: a smaller id is a
//! larger variable for the lexicographic tie-break.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use super::symbol::Symbol;

/// A power product, stored as `(variable, exponent)` pairs sorted by variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(SmallVec<[(Symbol, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(s: Symbol, e: u32) -> Self {
        if e == 0 {
            return Self::one();
        }
        let mut v = SmallVec::new();
        v.push((s, e));
        Monomial(v)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, s: Symbol) -> u32 {
        self.0.iter().find(|&&(v, _)| v == s).map(|&(_, e)| e).unwrap_or(0)
    }

    pub fn factors(&self) -> impl Iterator<Item = (Symbol, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = SmallVec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < v {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == v {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((v, e - f)),
                }
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let mut out = SmallVec::new();
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1.min(b[j].1)));
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial(out)
    }

    /// Removes variable `s`, returning its exponent and the remaining monomial.
    pub fn split_off(&self, s: Symbol) -> (u32, Monomial) {
        let mut out = SmallVec::with_capacity(self.0.len());
        let mut e = 0;
        for &(v, k) in &self.0 {
            if v == s {
                e = k;
            } else {
                out.push((v, k));
            }
        }
        (e, Monomial(out))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (a, b) = (&self.0, &other.0);
        for (x, y) in a.iter().zip(b.iter()) {
            match x.0.cmp(&y.0) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match x.1.cmp(&y.1) {
                    Ordering::Equal => {}
                    ord => return ord,
                },
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub type Term = (Monomial, BigInt);

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    terms: Vec<Term>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly {
            terms: vec![(Monomial::one(), c)],
        }
    }

    pub fn var(s: Symbol) -> Self {
        Self::monomial(Monomial::var(s, 1), BigInt::one())
    }

    pub fn monomial(m: Monomial, c: BigInt) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Poly { terms: vec![(m, c)] }
    }

    /// Builds a polynomial from unsorted, possibly repeated terms.
    pub fn from_terms(mut terms: Vec<Term>) -> Self {
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some(last) if last.0 == m => last.1 += c,
                _ => {
                    if let Some(last) = out.last() {
                        if last.1.is_zero() {
                            out.pop();
                        }
                    }
                    out.push((m, c));
                }
            }
        }
        if let Some(last) = out.last() {
            if last.1.is_zero() {
                out.pop();
            }
        }
        Poly { terms: out }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.is_one())
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn constant_value(&self) -> Option<BigInt> {
        if self.is_zero() {
            Some(BigInt::zero())
        } else if self.is_constant() {
            Some(self.terms[0].1.clone())
        } else {
            None
        }
    }

    pub fn leading(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn leading_coeff(&self) -> BigInt {
        self.terms.first().map(|t| t.1.clone()).unwrap_or_else(BigInt::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map(|t| t.0.degree()).unwrap_or(0)
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.terms.iter().map(|(m, _)| m.exponent(s)).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for (m, _) in &self.terms {
            for (v, _) in m.factors() {
                out.insert(v);
            }
        }
        out
    }

    /// Integer content (nonnegative gcd of the coefficients).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Greatest common monomial divisor of all terms.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.iter();
        let Some((first, _)) = it.next() else {
            return Monomial::one();
        };
        let mut g = first.clone();
        for (m, _) in it {
            if g.is_one() {
                break;
            }
            g = g.gcd(m);
        }
        g
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// Exact division of every coefficient by `k`.
    pub fn div_scalar(&self, k: &BigInt) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    debug_assert!((c % k).is_zero());
                    (m.clone(), c / k)
                })
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, k: &BigInt) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(t, c)| (t.mul(m), c * k)).collect(),
        }
    }

    /// Exact division by a monomial that divides every term.
    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.div(m).expect("monomial divides every term"), c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        merge(&self.terms, &other.terms, false)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        merge(&self.terms, &other.terms, true)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        // Multiplying by a single term preserves the order, so the product is
        // a merge of `small.len()` sorted runs.
        let mut runs: Vec<Poly> = small.terms.iter().map(|(m, c)| large.mul_monomial(m, c)).collect();
        while runs.len() > 1 {
            let mut next = Vec::with_capacity(runs.len() / 2 + 1);
            let mut it = runs.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.add(&b)),
                    None => next.push(a),
                }
            }
            runs = next;
        }
        runs.pop().unwrap_or_default()
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`
    /// with an integer-coefficient quotient.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(k) = d.constant_value() {
            if self.terms.iter().all(|(_, c)| (c % &k).is_zero()) {
                return Some(self.div_scalar(&k));
            }
            return None;
        }
        if d.is_monomial() {
            let (dm, dc) = &d.terms[0];
            let mut out = Vec::with_capacity(self.len());
            for (m, c) in &self.terms {
                let q = m.div(dm)?;
                let (qc, r) = c.div_rem(dc);
                if !r.is_zero() {
                    return None;
                }
                out.push((q, qc));
            }
            return Some(Poly { terms: out });
        }
        let (dm, dc) = d.leading().unwrap();
        if self.total_degree() < d.total_degree() {
            return None;
        }
        if d.variables().into_iter().any(|v| d.degree_in(v) > self.degree_in(v)) {
            return None;
        }
        let mut rem = self.clone();
        let mut quot = Vec::new();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.div(dm)?;
            let (qc, r) = rc.div_rem(dc);
            if !r.is_zero() {
                return None;
            }
            rem = rem.sub(&d.mul_monomial(&qm, &qc));
            quot.push((qm, qc));
        }
        Some(Poly { terms: quot })
    }

    pub fn divides(&self, other: &Poly) -> bool {
        other.div_exact(self).is_some()
    }

    /// Formal partial derivative with respect to the indeterminate `s`.
    pub fn derivative(&self, s: Symbol) -> Poly {
        let mut out = Vec::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(s);
            if e > 0 {
                out.push((rest.mul(&Monomial::var(s, e - 1)), c * BigInt::from(e)));
            }
        }
        Poly::from_terms(out)
    }

    /// Coefficients with respect to `s`: index k holds the coefficient of `s^k`.
    pub fn coefficients_in(&self, s: Symbol) -> Vec<Poly> {
        let deg = self.degree_in(s) as usize;
        let mut buckets: Vec<Vec<Term>> = vec![Vec::new(); deg + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split_off(s);
            buckets[e as usize].push((rest, c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    pub fn from_coefficients_in(s: Symbol, coeffs: &[Poly]) -> Poly {
        let mut terms = Vec::new();
        for (k, p) in coeffs.iter().enumerate() {
            let xm = Monomial::var(s, k as u32);
            for (m, c) in &p.terms {
                terms.push((m.mul(&xm), c.clone()));
            }
        }
        Poly::from_terms(terms)
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = self.content();
        if self.leading_coeff().is_negative() {
            c = -c;
        }
        if c.is_one() {
            self.clone()
        } else {
            self.div_scalar(&c)
        }
    }

    /// Exact square root, if this polynomial is the square of one with
    /// positive leading coefficient.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let (lm, lc) = self.leading()?;
        if lc.is_negative() || lm.0.iter().any(|&(_, e)| e % 2 == 1) {
            return None;
        }
        let c = lc.sqrt();
        if &(&c * &c) != lc {
            return None;
        }
        let half = Monomial(lm.0.iter().map(|&(v, e)| (v, e / 2)).collect());
        let lead = (half, c);
        let mut root = Poly::monomial(lead.0.clone(), lead.1.clone());
        let twice = &lead.1 * 2;
        loop {
            let rest = self.sub(&root.mul(&root));
            let Some((rm, rc)) = rest.leading() else {
                return Some(root);
            };
            let m = rm.div(&lead.0)?;
            let (q, r) = rc.div_rem(&twice);
            if !r.is_zero() {
                return None;
            }
            if root.terms.last().is_some_and(|t| t.0 <= m) {
                return None;
            }
            root = root.add(&Poly::monomial(m, q));
        }
    }

    /// Evaluates with every variable mapped through `value`, in arithmetic
    /// supplied by the caller.
    pub fn eval_with<T, F>(&self, mut value: F, zero: T, from_int: impl Fn(&BigInt) -> T) -> T
    where
        T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
        F: FnMut(Symbol, u32) -> T,
    {
        let mut acc = zero;
        for (m, c) in &self.terms {
            let mut t = from_int(c);
            for (v, e) in m.factors() {
                t = t * value(v, e);
            }
            acc = acc + t;
        }
        acc
    }
}

fn merge(a: &[Term], b: &[Term], negate_b: bool) -> Poly {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                let c = if negate_b { -&b[j].1 } else { b[j].1.clone() };
                out.push((b[j].0.clone(), c));
                j += 1;
            }
            Ordering::Equal => {
                let c = if negate_b { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                if !c.is_zero() {
                    out.push((a[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    for t in &b[j..] {
        let c = if negate_b { -&t.1 } else { t.1.clone() };
        out.push((t.0.clone(), c));
    }
    Poly { terms: out }
}
