//! Real polynomials in the operator `p`, stored with ascending powers.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::{Error, Result};

/// A coefficient produced by cancellation is snapped to zero when it is this
/// small relative to the magnitude of the terms that produced it.
pub const CANCEL_EPS: f64 = 1e-12;

/// Roots whose imaginary part is below this fraction of their modulus are
/// reported as real.
/// Imaginary parts below this (relative) of an unpaired root are dropped.
const UNPAIRED_REAL_EPS: f64 = 1e-4;
const REAL_ROOT_EPS: f64 = 1e-10;

const ABERTH_MAX_ITER: usize = 800;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial from ascending coefficients; trailing exact zeros
    /// are dropped so the zero polynomial is always the empty list.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim_exact();
        p
    }

    pub fn from_slice(coeffs: &[f64]) -> Self {
        Self::new(coeffs.to_vec())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `c0 + c1·p`
    pub fn linear(c0: f64, c1: f64) -> Self {
        Self::new(vec![c0, c1])
    }

    /// The monomial `c·p^degree`.
    pub fn monomial(c: f64, degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = c;
        Self::new(coeffs)
    }

    /// Monic polynomial with the given roots. Complex roots are expected in
    /// conjugate pairs; the residual imaginary parts are discarded.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * r;
            }
            acc = next;
        }
        Self::new(acc.into_iter().map(|c| c.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `p^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, k: f64) -> Poly {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Divides by the leading coefficient. The zero polynomial stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            l if l == 0.0 => Poly::zero(),
            l => self.scale(1.0 / l),
        }
    }

    /// Drops trailing coefficients with `|c| <= eps·max|c|`.
    pub fn trimmed(&self, eps: f64) -> Poly {
        let limit = eps * self.max_abs();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.abs() <= limit) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::one(), |acc, _| &acc * self)
    }

    /// Euclidean division `self = q·divisor + r`.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly)> {
        let dd = divisor.degree().ok_or(Error::ZeroPolynomial)?;
        let Some(nd) = self.degree() else {
            return Ok((Poly::zero(), Poly::zero()));
        };
        if nd < dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * d;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd);
        Ok((Poly::new(quot), Poly::new(rem)))
    }

    /// All `degree` roots with multiplicity, conjugate-symmetric and sorted
    /// by real then imaginary part.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        match self.degree() {
            None | Some(0) => return Err(Error::NoRoots),
            Some(_) => {}
        }
        let lo = self.coeffs.iter().position(|c| *c != 0.0).unwrap_or(0);
        let mut roots = vec![Complex64::new(0.0, 0.0); lo];
        let rest = &self.coeffs[lo..];
        if rest.len() > 1 {
            roots.extend(aberth(rest));
        }
        enforce_conjugate_symmetry(&mut roots);
        roots.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap_or(Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
        });
        Ok(roots)
    }

    /// Strict Hurwitz test (all roots in the open left half plane) by the
    /// Routh array. Degree-0 polynomials are vacuously stable.
    pub fn is_hurwitz(&self) -> Result<bool> {
        let n = self.degree().ok_or(Error::ZeroPolynomial)?;
        if n == 0 {
            return Ok(true);
        }
        if self.coeffs[0] == 0.0 {
            return Ok(false);
        }
        let s = root_scale(&self.coeffs);
        let lead = self.coeffs[n];
        // descending, normalized so a[0] = 1
        let a: Vec<f64> = (0..=n)
            .map(|k| {
                let i = n - k;
                self.coeffs[i] / lead * libm::pow(s, i as f64 - n as f64)
            })
            .collect();
        if a.iter().any(|x| *x <= 0.0 || !x.is_finite()) {
            return Ok(false);
        }
        let at = |v: &[f64], j: usize| v.get(j).copied().unwrap_or(0.0);
        let mut prev: Vec<f64> = a.iter().step_by(2).copied().collect();
        let mut cur: Vec<f64> = a.iter().skip(1).step_by(2).copied().collect();
        for _ in 2..=n {
            let len = prev.len().max(cur.len()).saturating_sub(1).max(1);
            let mut next = vec![0.0; len];
            let mut first_scale = 0.0;
            for (j, slot) in next.iter_mut().enumerate() {
                let t1 = cur[0] * at(&prev, j + 1);
                let t2 = prev[0] * at(&cur, j + 1);
                *slot = (t1 - t2) / cur[0];
                if j == 0 {
                    first_scale = t1.abs().max(t2.abs()) / cur[0];
                }
            }
            if !(next[0] > CANCEL_EPS * first_scale) {
                return Ok(false);
            }
            prev = cur;
            cur = next;
        }
        Ok(true)
    }

    fn trim_exact(&mut self) {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
    }

    fn add_signed(&self, other: &Poly, sign: f64) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let x = self.coeff(i);
                let y = sign * other.coeff(i);
                snap(x + y, x.abs().max(y.abs()))
            })
            .collect();
        Poly::new(coeffs)
    }
}

fn snap(value: f64, magnitude: f64) -> f64 {
    if value.abs() <= CANCEL_EPS * magnitude {
        0.0
    } else {
        value
    }
}

/// Geometric mean of the root moduli of a polynomial with nonzero constant
/// and leading coefficients.
fn root_scale(c: &[f64]) -> f64 {
    let n = c.len() - 1;
    let s = libm::pow((c[0] / c[n]).abs(), 1.0 / n as f64);
    if s.is_finite() && s > 0.0 {
        s
    } else {
        1.0
    }
}

fn horner(b: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let m = b.len() - 1;
    let mut p = Complex64::new(b[m], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in b[..m].iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Aberth-Ehrlich simultaneous iteration on a polynomial with nonzero
/// constant term. The variable is rescaled so the roots' geometric mean
/// modulus is one.
fn aberth(c: &[f64]) -> Vec<Complex64> {
    let m = c.len() - 1;
    let s = root_scale(c);
    let lead = c[m];
    let b: Vec<f64> = c
        .iter()
        .enumerate()
        .map(|(i, ci)| ci / lead * libm::pow(s, i as f64 - m as f64))
        .collect();
    if m == 1 {
        return vec![Complex64::new(-b[0] * s, 0.0)];
    }
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| {
            let theta = 2.0 * core::f64::consts::PI * k as f64 / m as f64 + 0.4;
            Complex64::from_polar(1.0, theta)
        })
        .collect();
    let mut done = vec![false; m];
    for _ in 0..ABERTH_MAX_ITER {
        let mut all_done = true;
        for i in 0..m {
            if done[i] {
                continue;
            }
            let (pv, dv) = horner(&b, z[i]);
            if pv.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = if dv.norm() == 0.0 {
                Complex64::new(1e-8, 1e-8)
            } else {
                pv / dv
            };
            let sum: Complex64 = (0..m)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            z[i] -= w;
            if w.norm() <= 4.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }
    z.into_iter().map(|r| r * s).collect()
}

fn enforce_conjugate_symmetry(roots: &mut [Complex64]) {
    for r in roots.iter_mut() {
        if r.im.abs() <= REAL_ROOT_EPS * r.norm() {
            r.im = 0.0;
        }
    }
    let n = roots.len();
    let mut paired = vec![false; n];
    for i in 0..n {
        if paired[i] || roots[i].im <= 0.0 {
            continue;
        }
        let dist = |j: usize| (roots[i] - roots[j].conj()).norm();
        let best = (0..n)
            .filter(|&j| !paired[j] && roots[j].im < 0.0)
            .min_by(|&a, &b| dist(a).partial_cmp(&dist(b)).unwrap_or(Ordering::Equal))
            .filter(|&j| dist(j) <= 0.5 * roots[i].im.abs().max(REAL_ROOT_EPS * roots[i].norm()));
        if let Some(j) = best {
            let re = 0.5 * (roots[i].re + roots[j].re);
            let im = 0.5 * (roots[i].im - roots[j].im);
            roots[i] = Complex64::new(re, im);
            roots[j] = Complex64::new(re, -im);
            paired[i] = true;
            paired[j] = true;
        }
    }
    // leftovers come from split multiple roots; keep them off the real axis
    // only when clearly complex
    for i in 0..n {
        if !paired[i] && roots[i].im.abs() <= UNPAIRED_REAL_EPS * roots[i].norm() {
            roots[i].im = 0.0;
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.add_signed(rhs, 1.0)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.add_signed(rhs, -1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let n = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut sum = vec![0.0; n];
        let mut mag = vec![0.0; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                sum[i + j] += a * b;
                mag[i + j] += (a * b).abs();
            }
        }
        Poly::new(sum.into_iter().zip(mag).map(|(s, m)| snap(s, m)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($ty:ty, $($tr:ident $m:ident),*) => {$(
        impl $tr for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty { (&self).$m(&rhs) }
        }
        impl $tr<&$ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: &$ty) -> $ty { (&self).$m(rhs) }
        }
    )*};
}
pub(crate) use forward_owned;

forward_owned!(Poly, Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}
