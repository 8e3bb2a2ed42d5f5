mod common;

use common::*;
use ga3ph_core::ratfun::poly_rel_error;
use ga3ph_core::{Complex64, Poly, RatFun};
use proptest::prelude::*;

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 1..=max_len)
}

proptest! {
    #[test]
    fn ring_axioms_pointwise(a in coeffs(5), b in coeffs(5), c in coeffs(4), x in -2.0..2.0f64) {
        let (a, b, c) = (Poly::new(a), Poly::new(b), Poly::new(c));
        let lhs = (&(&a + &b) * &c).eval(x);
        let rhs = (&(&a * &c) + &(&b * &c)).eval(x);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        prop_assert!(((&a * &b).eval(x) - a.eval(x) * b.eval(x)).abs() <= 1e-9 * (1.0 + (a.eval(x) * b.eval(x)).abs()));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn roots_rebuild_polynomial(roots in prop::collection::vec(-100.0..-0.1f64, 1..6)) {
        let zs: Vec<Complex64> = roots.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        let p = Poly::from_roots(&zs).scale(2.5);
        let found = p.roots().unwrap();
        prop_assert_eq!(found.len(), zs.len());
        let rebuilt = Poly::from_roots(&found).scale(2.5);
        prop_assert!(poly_rel_error(&p, &rebuilt) < 1e-6);
    }

    #[test]
    fn hurwitz_agrees_with_root_signs(c in prop::collection::vec(-5.0..5.0f64, 2..7)) {
        let p = Poly::new(c);
        prop_assume!(p.degree().unwrap_or(0) >= 1 && p.coeff(0) != 0.0);
        let roots = p.roots().unwrap();
        let margin = roots.iter().map(|z| z.re.abs() / z.norm().max(1e-300)).fold(f64::INFINITY, f64::min);
        // skip polynomials with roots too close to the imaginary axis to classify
        prop_assume!(margin > 1e-6);
        let by_roots = roots.iter().all(|z| z.re < 0.0);
        prop_assert_eq!(p.is_hurwitz().unwrap(), by_roots);
    }

    #[test]
    fn div_rem_identity(a in coeffs(6), b in coeffs(3)) {
        let (a, b) = (Poly::new(a), Poly::new(b));
        prop_assume!(!b.is_zero() && b.leading().abs() > 1e-3);
        let (q, r) = a.div_rem(&b).unwrap();
        prop_assert!(r.degree().unwrap_or(0) < b.degree().unwrap_or(0).max(1) || r.is_zero());
        let back = &(&q * &b) + &r;
        let scale = 1.0 + a.max_abs() + q.max_abs() * b.max_abs();
        for i in 0..=a.degree().unwrap_or(0) {
            prop_assert!((back.coeff(i) - a.coeff(i)).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn reduction_preserves_values() {
    let mut r = rng(7);
    let pts = sample_points();
    for _ in 0..200 {
        let common = stable_den(&mut r, 1);
        let a = RatFun::new(
            &random_poly(&mut r, 1) * &common,
            &stable_den(&mut r, 2) * &common,
        )
        .unwrap();
        let b = random_ratfun(&mut r);
        let s = &a + &b;
        let want = |z: Complex64| a.eval_complex(z) + b.eval_complex(z);
        for &z in &pts {
            let got = s.eval_complex(z);
            assert!((got - want(z)).norm() <= 1e-8 * (1.0 + want(z).norm()));
        }
        // the common factor never survives in a
        assert!(a.den().degree().unwrap() <= 2);
    }
}

#[test]
fn products_and_quotients() {
    let mut r = rng(8);
    let pts = sample_points();
    for _ in 0..200 {
        let a = random_ratfun(&mut r);
        let b = random_ratfun(&mut r);
        if b.is_zero() {
            continue;
        }
        let q = a.checked_div(&b).unwrap();
        let back = &q * &b;
        assert!(back.value_rel_error(&a, &pts) < 1e-8);
    }
    assert!(RatFun::one().checked_div(&RatFun::zero()).is_err());
}
