#![allow(dead_code)]

use ewcheck::expr::{Expr, Symbol};
use ewcheck::tensor::Chart;
use ewcheck::weyl::WeylStructure;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn coord(name: &str) -> Expr {
    Expr::symbol(Symbol::coordinate(name))
}

pub fn vars(chart: &Chart) -> [Expr; 3] {
    chart.coords().map(Expr::symbol)
}

/// A polynomial with `terms` monomials of total degree at most `deg` and
/// nonzero coefficients in `[-3, 3]`.
pub fn random_poly(rng: &mut ChaCha8Rng, vars: &[Expr; 3], terms: usize, deg: u32) -> Expr {
    let mut acc = Expr::zero();
    for _ in 0..terms {
        let mut coeff = rng.gen_range(1..=3i64);
        if rng.gen_bool(0.5) {
            coeff = -coeff;
        }
        let mut m = Expr::int(coeff);
        let d = rng.gen_range(0..=deg);
        for _ in 0..d {
            m = &m * &vars[rng.gen_range(0..3)];
        }
        acc = &acc + &m;
    }
    acc
}

/// A Weyl structure in `(y, x, t)` with polynomial metric close to
/// `diag(1, 1, -1)` and polynomial `ω`, optionally with one component
/// divided by a positive quadratic.
#[allow(clippy::needless_range_loop)]
pub fn random_structure(rng: &mut ChaCha8Rng) -> WeylStructure {
    let chart = Chart::yxt();
    let v = vars(&chart);
    loop {
        let mut metric: [[Expr; 3]; 3] = Default::default();
        for i in 0..3 {
            let base = Expr::int([1, 1, -1][i]);
            metric[i][i] = if rng.gen_bool(0.5) {
                &base + &random_poly(rng, &v, 1, 2)
            } else {
                base
            };
            for j in (i + 1)..3 {
                if rng.gen_bool(0.5) {
                    let e = random_poly(rng, &v, 1, 1);
                    metric[i][j] = e.clone();
                    metric[j][i] = e;
                }
            }
        }
        let mut omega: [Expr; 3] = std::array::from_fn(|_| random_poly(rng, &v, 2, 1));
        if rng.gen_bool(0.3) {
            let k = rng.gen_range(0..3);
            let den = &Expr::one() + &(&v[k] * &v[k]);
            omega[k] = omega[k].checked_div(&den).expect("positive denominator");
        }
        if let Ok(s) = WeylStructure::from_components(&chart, metric, omega) {
            return s;
        }
    }
}

/// A nonzero rational function `p/q` in the given variables with `q`
/// positive on the positive octant.
pub fn random_rational(rng: &mut ChaCha8Rng, v: &[Expr; 3]) -> Expr {
    loop {
        let p = &Expr::int(rng.gen_range(1..=4)) + &random_poly(rng, v, 2, 2);
        if p.is_zero() {
            continue;
        }
        let k = rng.gen_range(0..3);
        let q = &Expr::int(rng.gen_range(1..=3)) + &(&v[k] * &v[k]);
        return p.checked_div(&q).expect("nonzero denominator");
    }
}
