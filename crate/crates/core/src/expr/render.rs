//! Canonical text form of an [`Expr`].
//!
//! The rendering is independent of symbol interning order: variables are
//! ordered by name, terms by graded-lex under that order, and the sign is
//! fixed so the leading denominator coefficient is positive.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::poly::Poly;
use super::symbol::Symbol;
use super::Expr;

type Key = (u8, String, u32);

pub(super) fn render(e: &Expr) -> String {
    let mut keys: BTreeMap<Symbol, Key> = BTreeMap::new();
    for s in e.symbols() {
        keys.insert(s, s.sort_key());
    }
    let mut order: Vec<(Key, Symbol)> = keys.iter().map(|(s, k)| (k.clone(), *s)).collect();
    order.sort();
    let rank: BTreeMap<Symbol, usize> = order.iter().enumerate().map(|(i, (_, s))| (*s, i)).collect();
    let names: Vec<String> = order.iter().map(|(k, _)| k.1.clone()).collect();

    let mut num = sorted_terms(e.numerator(), &rank);
    let mut den = sorted_terms(e.denominator(), &rank);
    if den.first().is_some_and(|t| t.1.is_negative()) {
        for t in num.iter_mut().chain(den.iter_mut()) {
            t.1 = -t.1.clone();
        }
    }
    let num_s = render_terms(&num, &names);
    if den.len() == 1 && den[0].0.iter().all(|&e| e == 0) && den[0].1.is_one() {
        return num_s;
    }
    let den_s = render_terms(&den, &names);
    let num_wrapped = if num.len() > 1 { format!("({num_s})") } else { num_s };
    let den_atomic = den.len() == 1 && {
        let (exps, c) = &den[0];
        let nvars = exps.iter().filter(|&&e| e > 0).count();
        (nvars == 0) || (nvars == 1 && c.is_one())
    };
    if den_atomic {
        format!("{num_wrapped}/{den_s}")
    } else {
        format!("{num_wrapped}/({den_s})")
    }
}

/// Terms as dense exponent vectors in name order, sorted descending grlex.
fn sorted_terms(p: &Poly, rank: &BTreeMap<Symbol, usize>) -> Vec<(Vec<u32>, BigInt)> {
    let n = rank.len();
    let mut out: Vec<(Vec<u32>, BigInt)> = p
        .terms()
        .iter()
        .map(|(m, c)| {
            let mut exps = vec![0u32; n];
            for (v, e) in m.factors() {
                exps[rank[&v]] = e;
            }
            (exps, c.clone())
        })
        .collect();
    out.sort_by(|a, b| {
        let da: u32 = a.0.iter().sum();
        let db: u32 = b.0.iter().sum();
        db.cmp(&da).then_with(|| b.0.cmp(&a.0))
    });
    out
}

fn render_terms(terms: &[(Vec<u32>, BigInt)], names: &[String]) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (exps, c)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        let mag = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let factors: Vec<String> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, &e)| {
                if e == 1 {
                    names[k].clone()
                } else {
                    format!("{}^{}", names[k], e)
                }
            })
            .collect();
        if factors.is_empty() {
            out.push_str(&mag.to_string());
        } else {
            if !mag.is_one() {
                out.push_str(&mag.to_string());
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn renders_fractions() {
        let y = Expr::symbol(Symbol::coordinate("y"));
        let x = Expr::symbol(Symbol::coordinate("x"));
        assert_eq!(Expr::rational(1, 3).render(), "1/3");
        assert_eq!(Expr::int(-4).render(), "-4");
        assert_eq!(y.recip().unwrap().render(), "1/y");
        let e = (&x - &y).checked_div(&(&Expr::int(2) * &y)).unwrap();
        assert_eq!(e.render(), "(x - y)/(2*y)");
        let q = y.pow(4).unwrap().scale(&BigRational::new(1.into(), 48.into()));
        assert_eq!(q.render(), "y^4/48");
        assert_eq!((-&y).checked_div(&(&x + &Expr::one())).unwrap().render(), "-y/(x + 1)");
    }
}
