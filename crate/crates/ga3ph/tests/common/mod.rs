#![allow(dead_code)]

use ga3ph_core::ga::{GaTf, Mv4};
use ga3ph_core::models::RealMimo2;
use ga3ph_core::{Complex64, Poly, RatFun};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Monic polynomial with random stable roots (real or complex pairs).
pub fn stable_den(r: &mut ChaCha8Rng, degree: usize) -> Poly {
    let mut roots = Vec::new();
    while roots.len() < degree {
        if degree - roots.len() >= 2 && r.gen_bool(0.3) {
            let re = -r.gen_range(0.5..50.0);
            let im = r.gen_range(0.5..50.0);
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
        } else {
            roots.push(Complex64::new(-r.gen_range(0.5..50.0), 0.0));
        }
    }
    Poly::from_roots(&roots)
}

pub fn random_poly(r: &mut ChaCha8Rng, degree: usize) -> Poly {
    Poly::new((0..=degree).map(|_| r.gen_range(-3.0..3.0)).collect())
}

pub fn random_ratfun(r: &mut ChaCha8Rng) -> RatFun {
    let dd = r.gen_range(0..=2);
    let nd = r.gen_range(0..=dd);
    RatFun::new(random_poly(r, nd), stable_den(r, dd)).unwrap()
}

pub fn random_mimo(r: &mut ChaCha8Rng) -> RealMimo2 {
    RealMimo2::new(
        random_ratfun(r),
        random_ratfun(r),
        random_ratfun(r),
        random_ratfun(r),
    )
}

/// Stable proper GA transfer function over a random denominator.
pub fn random_stable_gatf(r: &mut ChaCha8Rng, max_degree: usize) -> GaTf {
    let dd = r.gen_range(1..=max_degree);
    let num = Mv4::new(
        random_poly(r, dd),
        random_poly(r, dd),
        random_poly(r, dd),
        random_poly(r, dd),
    );
    GaTf::new(num, stable_den(r, dd)).unwrap()
}

pub fn random_mv(r: &mut ChaCha8Rng, scale: f64) -> Mv4<f64> {
    Mv4::new(
        r.gen_range(-scale..scale),
        r.gen_range(-scale..scale),
        r.gen_range(-scale..scale),
        r.gen_range(-scale..scale),
    )
}

pub fn sample_points() -> Vec<Complex64> {
    [0.3, 1.7, 11.0, 120.0]
        .iter()
        .map(|&w| Complex64::new(0.1, w))
        .collect()
}

/// Entries over denominators drawn from a fixed pool of well separated
/// first- and second-order factors, so products share factors exactly.
pub fn pooled_mimo(r: &mut ChaCha8Rng) -> RealMimo2 {
    let pool = [
        Poly::linear(2.0, 1.0),
        Poly::linear(15.0, 1.0),
        Poly::new(vec![125.0, 10.0, 1.0]),
        Poly::linear(40.0, 1.0),
    ];
    let mut entry = || {
        let d = match r.gen_range(0..3) {
            0 => Poly::one(),
            1 => pool[r.gen_range(0..pool.len())].clone(),
            _ => {
                let i = r.gen_range(0..pool.len());
                let j = (i + r.gen_range(1..pool.len())) % pool.len();
                &pool[i] * &pool[j]
            }
        };
        let nd = r.gen_range(0..=d.degree().unwrap_or(0));
        RatFun::new(random_poly(r, nd), d).unwrap()
    };
    RealMimo2::new(entry(), entry(), entry(), entry())
}
