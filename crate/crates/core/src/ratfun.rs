//! Rational functions in `p` with a monic denominator and approximate
//! common-factor cancellation.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::poly::{forward_owned, Poly};
use crate::{Error, Result};

/// Tolerances for canonicalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Relative cancellation threshold for coefficients.
    pub coeff_eps: f64,
    /// Two root clusters coincide when their centroids are closer than this
    /// fraction of their modulus.
    pub cluster_rel: f64,
    /// Radius (relative) used to group the computed roots of one polynomial
    /// into multiple-root clusters.
    pub multiplicity_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            coeff_eps: 1e-12,
            cluster_rel: 1e-8,
            multiplicity_rel: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    /// Canonical quotient: common factors cancelled, denominator monic.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        Ok(Self::unreduced(num, den)?.reduce())
    }

    /// Like [`RatFun::new`], with the denominator roots already known
    /// (typically from its factors).
    pub(crate) fn new_hinted(
        num: Poly,
        den: Poly,
        den_roots: Option<&[Complex64]>,
    ) -> Result<Self> {
        let f = Self::unreduced(num, den)?;
        if f.num.is_zero() {
            return Ok(f);
        }
        Ok(
            match cancel_common(
                &f.den,
                core::slice::from_ref(&f.num),
                &Tolerance::default(),
                den_roots,
            ) {
                Some((den, mut nums, _)) => RatFun {
                    num: nums.pop().unwrap_or_default(),
                    den,
                },
                None => f,
            },
        )
    }

    /// Normalizes the denominator to monic without cancelling factors.
    pub fn unreduced(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let lead = den.leading();
        Ok(RatFun {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        })
    }

    pub fn zero() -> Self {
        RatFun {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        RatFun {
            num: Poly::constant(c),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFun {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.num.eval(x) / self.den.eval(x)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.num.eval_complex(z) / self.den.eval_complex(z)
    }

    /// `deg(num) <= deg(den)`; the zero function is proper.
    pub fn is_proper(&self) -> bool {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => true,
            (Some(n), Some(d)) => n <= d,
            (Some(_), None) => false,
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots().unwrap_or_default()
    }

    pub fn scale(&self, k: f64) -> RatFun {
        if k == 0.0 {
            return Self::zero();
        }
        RatFun {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn reduce(&self) -> RatFun {
        self.reduce_with(&Tolerance::default())
    }

    /// Cancels approximately common roots of numerator and denominator.
    pub fn reduce_with(&self, tol: &Tolerance) -> RatFun {
        if self.num.is_zero() {
            return Self::zero();
        }
        match cancel_common(&self.den, core::slice::from_ref(&self.num), tol, None) {
            Some((den, mut nums, _)) => RatFun {
                num: nums.pop().unwrap_or_default(),
                den,
            },
            None => self.clone(),
        }
    }

    pub fn inv(&self) -> Result<RatFun> {
        if self.is_zero() {
            return Err(Error::DivByZero);
        }
        RatFun::new(self.den.clone(), self.num.clone())
    }

    pub fn checked_div(&self, rhs: &RatFun) -> Result<RatFun> {
        Ok(self * &rhs.inv()?)
    }

    /// Largest per-coefficient relative difference between the canonical
    /// forms of two functions. Coefficients below `1e-9·max|coeff|` of their
    /// polynomial are compared absolutely against that floor.
    pub fn coeff_rel_error(&self, other: &RatFun) -> f64 {
        poly_rel_error(&self.num, &other.num).max(poly_rel_error(&self.den, &other.den))
    }

    /// Largest relative difference in value over the given points.
    pub fn value_rel_error(&self, other: &RatFun, points: &[Complex64]) -> f64 {
        points
            .iter()
            .map(|z| {
                let a = self.eval_complex(*z);
                let b = other.eval_complex(*z);
                let m = a.norm().max(b.norm());
                if m == 0.0 {
                    0.0
                } else {
                    (a - b).norm() / m
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Largest per-coefficient relative difference, with coefficients below
/// 1e-9 of the largest magnitude compared on that floor.
pub fn poly_rel_error(a: &Poly, b: &Poly) -> f64 {
    let n = a.coeffs().len().max(b.coeffs().len());
    let floor = 1e-9 * a.max_abs().max(b.max_abs());
    (0..n)
        .map(|i| {
            let (x, y) = (a.coeff(i), b.coeff(i));
            let m = x.abs().max(y.abs()).max(floor);
            if m == 0.0 {
                0.0
            } else {
                (x - y).abs() / m
            }
        })
        .fold(0.0, f64::max)
}

/// Same degree and [`poly_rel_error`] within `rel`.
pub fn polys_close(a: &Poly, b: &Poly, rel: f64) -> bool {
    a.degree() == b.degree() && poly_rel_error(a, b) <= rel
}

#[derive(Clone, Copy, Debug)]
struct Cluster {
    center: Complex64,
    count: usize,
}

fn cluster_roots(roots: &[Complex64], radius_rel: f64, floor: f64) -> Vec<Cluster> {
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for r in roots {
        let hit = clusters.iter_mut().find(|(sum, n)| {
            let c = *sum / *n as f64;
            (c - r).norm() <= radius_rel * c.norm().max(r.norm()) + floor
        });
        match hit {
            Some((sum, n)) => {
                *sum += r;
                *n += 1;
            }
            None => clusters.push((*r, 1)),
        }
    }
    clusters
        .into_iter()
        .map(|(sum, n)| Cluster {
            center: sum / n as f64,
            count: n,
        })
        .collect()
}

/// Sharpens the center of an m-fold cluster using Newton's method on the
/// (m-1)-th derivative, where the root is simple.
fn refine_clusters(poly: &Poly, clusters: &mut [Cluster], radius_rel: f64) {
    for c in clusters.iter_mut().filter(|c| c.count > 1) {
        let mut q = poly.clone();
        for _ in 1..c.count {
            q = q.derivative();
        }
        let dq = q.derivative();
        let start = c.center;
        let mut z = start;
        for _ in 0..20 {
            let d = dq.eval_complex(z);
            if d.norm() == 0.0 {
                break;
            }
            let step = q.eval_complex(z) / d;
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * z.norm() {
                break;
            }
        }
        if z.is_finite() && (z - start).norm() <= radius_rel * start.norm() {
            if start.im == 0.0 {
                z.im = 0.0;
            }
            c.center = z;
        }
    }
}

fn remaining(clusters: &[Cluster], removed: &[usize]) -> Vec<Complex64> {
    clusters
        .iter()
        .zip(removed)
        .flat_map(|(c, k)| core::iter::repeat(c.center).take(c.count - k))
        .collect()
}

/// Quotient of `a` by `(p - r)`, remainder dropped. Forward recurrence for
/// the high coefficients and backward for the low ones, split where
/// `|a_k|·|r|^k` peaks.
fn deflate(a: &[Complex64], r: Complex64) -> Vec<Complex64> {
    let n = a.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    if n == 0 {
        return vec![zero];
    }
    let mut q = vec![zero; n];
    let lr = libm::log(r.norm());
    let split = if r.norm() == 0.0 {
        0
    } else {
        (0..=n)
            .filter(|&k| a[k].norm() > 0.0)
            .max_by(|&i, &j| {
                let f = |k: usize| libm::log(a[k].norm()) + k as f64 * lr;
                f(i).total_cmp(&f(j))
            })
            .unwrap_or(0)
    };
    let mut f = a[n];
    for k in (split.max(1)..=n).rev() {
        q[k - 1] = f;
        f = a[k - 1] + r * f;
    }
    if split > 0 {
        let mut b = -a[0] / r;
        q[0] = b;
        for k in 1..split.min(n) {
            b = (b - a[k]) / r;
            q[k] = b;
        }
    }
    q
}

fn divide_out(p: &Poly, roots: &[Complex64]) -> Poly {
    let mut a: Vec<Complex64> = p.coeffs().iter().map(|c| Complex64::new(*c, 0.0)).collect();
    for r in roots {
        a = deflate(&a, *r);
    }
    Poly::new(a.into_iter().map(|c| c.re).collect())
}

/// Roots of `a·b`, found factor by factor. Close roots coming from different
/// factors stay sharp this way.
pub(crate) fn product_roots(a: &Poly, b: &Poly) -> Option<Vec<Complex64>> {
    let mut r = a.roots().ok()?;
    r.extend(b.roots().ok()?);
    Some(r)
}

/// Roots of two computations of the same factor agreeing this closely (relative)
/// are treated as one root when forming a least common denominator.
const LCM_MATCH_REL: f64 = 1e-8;

/// Least common multiple of monic denominators.
pub(crate) struct Lcm {
    pub roots: Vec<Complex64>,
    pub den: Poly,
    /// `den / dens[i]` for every input.
    pub cofactors: Vec<Poly>,
}

pub(crate) fn lcm(dens: &[&Poly]) -> Option<Lcm> {
    let lists = dens
        .iter()
        .map(|d| d.roots().ok())
        .collect::<Option<Vec<_>>>()?;
    Some(lcm_with_roots(dens, &lists))
}

/// [`lcm`] with the roots of every denominator supplied. The largest
/// denominator is kept as is; roots of the others that it lacks are
/// multiplied in.
pub(crate) fn lcm_with_roots(dens: &[&Poly], lists: &[Vec<Complex64>]) -> Lcm {
    // repeated roots come out split; sharpen them so equal factors match
    let tol = Tolerance::default();
    let lists: Vec<Vec<Complex64>> = dens
        .iter()
        .zip(lists)
        .map(|(d, list)| {
            let scale = list.iter().fold(0.0_f64, |m, r| m.max(r.norm()));
            let mut c = cluster_roots(list, tol.multiplicity_rel, tol.cluster_rel * 1e-2 * scale);
            refine_clusters(d, &mut c, tol.multiplicity_rel);
            c.iter()
                .flat_map(|c| core::iter::repeat(c.center).take(c.count))
                .collect()
        })
        .collect();
    let base = (0..dens.len())
        .max_by_key(|&i| (dens[i].degree(), usize::MAX - i))
        .unwrap_or(0);
    let mut roots = lists[base].clone();
    let n_base = roots.len();
    let mut owned: Vec<Vec<bool>> = Vec::with_capacity(lists.len());
    for (i, list) in lists.iter().enumerate() {
        if i == base {
            owned.push(Vec::new());
            continue;
        }
        let mut taken = vec![false; roots.len()];
        for &r in list {
            let hit = (0..roots.len()).find(|&k| {
                !taken[k] && (roots[k] - r).norm() <= LCM_MATCH_REL * roots[k].norm().max(r.norm())
            });
            match hit {
                Some(k) => taken[k] = true,
                None => {
                    roots.push(r);
                    taken.push(true);
                }
            }
        }
        owned.push(taken);
    }
    let extra = Poly::from_roots(&roots[n_base..]);
    let den = dens[base] * &extra;
    let cofactors = (0..dens.len())
        .map(|i| {
            if i == base {
                return extra.clone();
            }
            let mine = &owned[i];
            let shared: Vec<Complex64> =
                (0..n_base).filter(|&k| mine[k]).map(|k| roots[k]).collect();
            let quotient = if shared.len() == n_base {
                Poly::one()
            } else {
                divide_out(dens[base], &shared)
            };
            let missing: Vec<Complex64> = (n_base..roots.len())
                .filter(|&k| !mine.get(k).copied().unwrap_or(false))
                .map(|k| roots[k])
                .collect();
            &quotient * &Poly::from_roots(&missing)
        })
        .collect();
    Lcm {
        den,
        roots,
        cofactors,
    }
}

/// Joint cancellation of the roots shared by `den` and every nonzero
/// polynomial in `nums`. Returns `None` when nothing cancels, otherwise the
/// monic reduced denominator, the rescaled numerators (every quotient keeps
/// its value) and the roots of the reduced denominator.
pub(crate) fn cancel_common(
    den: &Poly,
    nums: &[Poly],
    tol: &Tolerance,
    den_roots: Option<&[Complex64]>,
) -> Option<(Poly, Vec<Poly>, Vec<Complex64>)> {
    if den.degree()? == 0 {
        return None;
    }
    let live: Vec<usize> = (0..nums.len()).filter(|&i| !nums[i].is_zero()).collect();
    if live.is_empty() || live.iter().any(|&i| nums[i].degree() == Some(0)) {
        return None;
    }
    let den_roots = match den_roots {
        Some(r) if Some(r.len()) == den.degree() => r.to_vec(),
        _ => den.roots().ok()?,
    };
    let num_roots: Vec<Vec<Complex64>> = live
        .iter()
        .map(|&i| nums[i].roots().unwrap_or_default())
        .collect();
    let scale = den_roots.iter().fold(0.0_f64, |m, r| m.max(r.norm()));
    let floor = tol.cluster_rel * 1e-2 * scale;
    let mut den_clusters = cluster_roots(&den_roots, tol.multiplicity_rel, floor);
    refine_clusters(den, &mut den_clusters, tol.multiplicity_rel);
    let num_clusters: Vec<Vec<Cluster>> = num_roots
        .iter()
        .zip(&live)
        .map(|(r, &i)| {
            let mut c = cluster_roots(r, tol.multiplicity_rel, floor);
            refine_clusters(&nums[i], &mut c, tol.multiplicity_rel);
            c
        })
        .collect();

    let close = |a: Complex64, b: Complex64| {
        (a - b).norm() <= tol.cluster_rel * a.norm().max(b.norm()) + floor
    };
    let mut den_removed = vec![0usize; den_clusters.len()];
    let mut num_removed: Vec<Vec<usize>> = num_clusters.iter().map(|c| vec![0; c.len()]).collect();
    let mut any = false;
    for (di, dc) in den_clusters.iter().enumerate() {
        let mut k = dc.count;
        let mut hits = Vec::with_capacity(num_clusters.len());
        for nc in &num_clusters {
            match nc.iter().position(|c| close(c.center, dc.center)) {
                Some(j) => {
                    k = k.min(nc[j].count);
                    hits.push(j);
                }
                None => {
                    k = 0;
                    break;
                }
            }
        }
        if k == 0 {
            continue;
        }
        any = true;
        den_removed[di] = k;
        for (n, j) in hits.into_iter().enumerate() {
            num_removed[n][j] += k;
        }
    }
    if !any {
        return None;
    }
    let left = remaining(&den_clusters, &den_removed);
    let gone: Vec<Complex64> = den_clusters
        .iter()
        .zip(&den_removed)
        .flat_map(|(c, k)| core::iter::repeat(c.center).take(*k))
        .collect();
    let lead = den.leading();
    let new_den = divide_out(den, &gone).scale(1.0 / lead);
    let mut out = vec![Poly::zero(); nums.len()];
    for &i in &live {
        out[i] = divide_out(&nums[i], &gone).scale(1.0 / lead);
    }
    Some((new_den, out, left))
}

impl Add for &RatFun {
    type Output = RatFun;
    fn add(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if polys_close(&self.den, &rhs.den, 1e-14) {
            return RatFun {
                num: &self.num + &rhs.num,
                den: self.den.clone(),
            }
            .reduce();
        }
        if let Some(l) = lcm(&[&self.den, &rhs.den]) {
            let num = &(&self.num * &l.cofactors[0]) + &(&rhs.num * &l.cofactors[1]);
            return RatFun::new_hinted(num, l.den, Some(&l.roots)).expect("nonzero denominator");
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RatFun::new(num, &self.den * &rhs.den).expect("product of nonzero denominators")
    }
}

impl Sub for &RatFun {
    type Output = RatFun;
    fn sub(self, rhs: &RatFun) -> RatFun {
        self + &(-rhs)
    }
}

impl Mul for &RatFun {
    type Output = RatFun;
    fn mul(self, rhs: &RatFun) -> RatFun {
        if self.is_zero() || rhs.is_zero() {
            return RatFun::zero();
        }
        let roots = product_roots(&self.den, &rhs.den);
        RatFun::new_hinted(&self.num * &rhs.num, &self.den * &rhs.den, roots.as_deref())
            .expect("product of nonzero denominators")
    }
}

impl Neg for &RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

forward_owned!(RatFun, Add add, Sub sub, Mul mul);

impl Neg for RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        -&self
    }
}

impl From<f64> for RatFun {
    fn from(c: f64) -> Self {
        RatFun::constant(c)
    }
}

impl From<Poly> for RatFun {
    fn from(p: Poly) -> Self {
        RatFun::from_poly(p)
    }
}
