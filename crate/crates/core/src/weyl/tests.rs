use super::*;
use crate::catalog::{case1_formal, case2_formal, flat, toda_formal};
use crate::expr::{Function, Symbol};
use crate::tensor::Chart;

fn c(name: &str) -> Expr {
    Expr::symbol(Symbol::coordinate(name))
}

fn e(n: i64) -> Expr {
    Expr::int(n)
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn structure(metric: [[Expr; 3]; 3], omega: [Expr; 3]) -> WeylStructure {
    WeylStructure::from_components(&Chart::yxt(), metric, omega).unwrap()
}

fn flat_with(omega: [Expr; 3]) -> WeylStructure {
    structure([[e(1), e(0), e(0)], [e(0), e(1), e(0)], [e(0), e(0), e(-1)]], omega)
}

#[test]
fn flat_has_no_curvature() {
    let s = flat();
    assert!(s.christoffel().unwrap().is_zero());
    let (ric, r) = s.ricci().unwrap();
    assert!(ric.is_zero() && r.is_zero());
    assert!(ew_residual(&s).unwrap().is_zero());
    assert!(weyl_scalar(&s).unwrap().is_zero());
    assert!(weyl_curvature(&s).unwrap().is_zero());
    assert_eq!(classify(&s).unwrap().verdict, Verdict::Flat);
}

#[test]
fn conformally_flat_christoffels() {
    // h = φ² δ with φ = 1 + y: Γ^k_ij = δ^k_i ∂_jψ + δ^k_j ∂_iψ - δ_ij ∂^kψ, ψ = ln φ
    let phi = &e(1) + &c("y");
    let p2 = &phi * &phi;
    let s = structure(
        [[p2.clone(), e(0), e(0)], [e(0), p2.clone(), e(0)], [e(0), e(0), p2]],
        [e(0), e(0), e(0)],
    );
    let g = s.christoffel().unwrap();
    let dpsi = phi.recip().unwrap();
    assert_eq!(g.get(&[0, 0, 0]), &dpsi);
    assert_eq!(g.get(&[0, 1, 1]), &-dpsi.clone());
    assert_eq!(g.get(&[1, 0, 1]), &dpsi);
    assert!(g.get(&[2, 0, 1]).is_zero());
}

#[test]
fn faraday_of_y_dt() {
    let w = Tensor::one_form(&Chart::yxt(), [e(0), e(0), c("y")]);
    let f = faraday(&w).unwrap();
    assert_eq!(f.get(&[0, 2]), &Expr::rational(1, 2));
    assert_eq!(f.get(&[2, 0]), &Expr::rational(-1, 2));
    let exact = Tensor::one_form(&Chart::yxt(), [c("x"), c("y"), e(0)]);
    assert!(faraday(&exact).unwrap().is_zero());
}

#[test]
fn weyl_ricci_without_omega_is_ricci() {
    let s = case1_formal();
    let s0 = WeylStructure::new(s.metric().clone(), Tensor::zeros(s.chart(), &[Slot::Down])).unwrap();
    assert_eq!(weyl_ricci(&s0).unwrap(), s0.ricci().unwrap().0);
}

#[test]
fn ricci_is_symmetric_on_case1() {
    let (ric, _) = case1_formal().ricci().unwrap();
    assert_eq!(ric, ric.transpose());
}

#[test]
fn two_paths_for_chi_agree() {
    let (y, x, t) = (c("y"), c("x"), c("t"));
    let s = structure(
        [
            [&e(1) + &(&x * &x), e(0), t.clone()],
            [e(0), e(2), e(1)],
            [t.clone(), e(1), &y * &t],
        ],
        [&x * &y, e(1), &t - &y],
    );
    assert_eq!(ew_residual(&s).unwrap(), ew_residual_from_weyl_ricci(&s).unwrap());
    let trace = metric_trace(&weyl_ricci(&s).unwrap(), s.metric());
    assert_eq!(trace, weyl_scalar(&s).unwrap());
    let anti = weyl_ricci_antisym(&s).unwrap();
    assert_eq!(anti, faraday(s.omega()).unwrap().scale(&Expr::rational(3, 2)));
    assert!(compatibility_residual(&s).unwrap().is_zero());
}

#[test]
fn not_ew_without_g() {
    let s = structure(
        [[e(1), e(0), e(0)], [e(0), e(0), e(1)], [e(0), e(1), e(0)]],
        [e(0), e(0), c("y")],
    );
    assert!(!ew_residual(&s).unwrap().is_zero());
    assert_eq!(classify(&s), Err(WeylError::NotEW));
}

#[test]
fn catalog_structures_are_scalar_flat_ew() {
    for s in [case1_formal(), case2_formal()] {
        assert!(ew_residual(&s).unwrap().is_zero());
        assert!(weyl_scalar(&s).unwrap().is_zero());
        assert!(bianchi_residual(&s).unwrap().is_zero());
        assert_eq!(nullity(&s).unwrap(), (Expr::zero(), Expr::zero()));
        let star = star_faraday(&s).unwrap();
        assert_eq!(star.components(), &[e(0), e(0), e(1)]);
    }
    let toda = toda_formal();
    assert!(weyl_scalar(&toda).unwrap().is_zero());
    assert!(bianchi_residual(&toda).unwrap().is_zero());
}

#[test]
fn classification_of_both_cases() {
    let c1 = classify(&case1_formal()).unwrap();
    assert_eq!(c1.verdict, Verdict::Case1);
    let r = Function::new("R", &[Symbol::coordinate("t")]).formal();
    let alpha = c1.alpha.unwrap();
    assert_eq!(alpha.components(), &[e(0), e(0), &r * &Expr::rational(1, 2)]);
    let c2 = classify(&case2_formal()).unwrap();
    assert_eq!(c2.verdict, Verdict::Case2);
    let (i, j, w) = c2.witness.unwrap();
    assert_eq!((i, j), (0, 2));
    let f = Function::new("f", &[Symbol::coordinate("t")]).formal();
    assert_eq!(w, -(f.checked_div(&c("y")).unwrap()));
}

#[test]
fn weighted_derivatives_reduce_without_omega() {
    let s = flat_with([e(0), e(0), e(0)]);
    let v = Tensor::one_form(s.chart(), [c("x"), &c("y") * &c("t"), e(3)]);
    let d = weighted_derivative_oneform(&s, &v, &q(7, 3)).unwrap();
    assert_eq!(d.get(&[2, 1]), &c("y"));
    let u = Tensor::vector(s.chart(), [c("x"), e(0), e(0)]);
    let du = weighted_derivative_vector(&s, &u, &q(-1, 2)).unwrap();
    assert_eq!(du.get(&[1, 0]), &e(1));
}

#[test]
fn lowered_vector_derivative_matches_one_form_derivative() {
    let s = case2_formal();
    let (y, x) = (c("y"), c("x"));
    let v = Tensor::vector(s.chart(), [&x * &y, e(1), y.clone()]);
    let m = q(1, 3);
    let dv = weighted_derivative_vector(&s, &v, &m).unwrap();
    let lowered_out = crate::tensor::lower_index(&dv, 1, s.metric()).unwrap();
    let vj = crate::tensor::lower_index(&v, 0, s.metric()).unwrap();
    let dvj = weighted_derivative_oneform(&s, &vj, &(&m + &q(2, 1))).unwrap();
    assert_eq!(lowered_out.components(), dvj.components());
}

#[test]
fn pure_gauge_is_flat() {
    let s = flat_with([e(0), e(0), e(0)]);
    let phi = &(&e(2) + &c("y")) + &(&c("x") * &c("t"));
    let g = conformal_rescale(&s, &phi).unwrap();
    assert!(weyl_curvature(&g).unwrap().is_zero());
    // With the metric itself kept flat, ω = 2 dφ/φ is flat exactly when
    // φ⁻² h is flat, e.g. for the inversion factor φ = y² + x² - t².
    let inv = &(&(&c("y") * &c("y")) + &(&c("x") * &c("x"))) - &(&c("t") * &c("t"));
    let d = |n: &str| {
        (&inv.diff(Symbol::coordinate(n)).unwrap() * &e(2))
            .checked_div(&inv)
            .unwrap()
    };
    let back = structure(s.metric().components(), [d("y"), d("x"), d("t")]);
    assert!(weyl_curvature(&back).unwrap().is_zero());
    let d = |n: &str| {
        (&phi.diff(Symbol::coordinate(n)).unwrap() * &e(2))
            .checked_div(&phi)
            .unwrap()
    };
    let generic = structure(s.metric().components(), [d("y"), d("x"), d("t")]);
    assert!(!weyl_curvature(&generic).unwrap().is_zero());
    assert_eq!(
        conformal_rescale(&s, &Expr::zero()),
        Err(WeylError::ZeroConformalFactor)
    );
}

#[test]
fn rescaling_by_one_is_identity() {
    let s = case1_formal();
    assert_eq!(conformal_rescale(&s, &Expr::one()).unwrap(), s);
}

#[test]
fn riemannian_flat_nullity() {
    let s = structure(
        [[e(1), e(0), e(0)], [e(0), e(1), e(0)], [e(0), e(0), e(1)]],
        [e(0), e(0), c("y")],
    );
    let (ff, wwf) = nullity(&s).unwrap();
    assert_eq!(ff, Expr::rational(1, 2));
    assert!(wwf.is_zero());
}

#[test]
fn case1_with_vanishing_functions_is_not_flat() {
    let s = crate::catalog::case1(&Expr::zero(), &Expr::zero()).unwrap();
    assert!(!weyl_curvature(&s).unwrap().is_zero());
}

#[test]
fn excluded_loci_of_case2_and_toda() {
    let loci: Vec<String> = excluded_loci(&case2_formal())
        .unwrap()
        .iter()
        .map(Expr::render)
        .collect();
    assert_eq!(loci, vec!["y"]);
    let loci: Vec<String> = excluded_loci(&toda_formal())
        .unwrap()
        .iter()
        .map(Expr::render)
        .collect();
    assert!(loci.contains(&"v*w + 1".to_string()), "{loci:?}");
    assert!(loci.contains(&"z + R(v)".to_string()), "{loci:?}");
}
