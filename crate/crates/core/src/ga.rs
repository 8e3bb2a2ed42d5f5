//! The geometric algebra G(2,0).
//!
//! Basis `e0` (identity), `e1`, `e2` (square to +1) and `e12 = e1·e2`
//! (squares to -1). A multivector maps to a 2×2 matrix over the same ring by
//!
//! ```text
//! c0·e0 + c1·e1 + c2·e2 + c12·e12  <->  [[c0 + c1, c2 + c12],
//!                                        [c2 - c12, c0 - c1]]
//! ```
//!
//! which is an algebra isomorphism: the geometric product becomes the matrix
//! product and the Clifford norm becomes the determinant.

use alloc::format;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::poly::Poly;
use crate::ratfun::{cancel_common, lcm, lcm_with_roots, polys_close, RatFun, Tolerance};
use crate::{Error, Result};

/// Commutative coefficient ring for multivectors.
pub trait Ring: Clone + Debug + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
}

/// Rings where nonzero elements can be inverted.
pub trait Field: Ring {
    /// `true` when `self` must be treated as zero next to a quantity of
    /// size `scale` (sum of squared coefficient magnitudes).
    fn is_negligible(&self, scale: f64) -> bool;
    fn recip(&self) -> Self;
    fn abs2(&self) -> f64;
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
}

impl Field for f64 {
    fn is_negligible(&self, scale: f64) -> bool {
        self.abs() <= 1e-12 * scale
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
    fn abs2(&self) -> f64 {
        self * self
    }
}

impl Ring for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Field for Complex64 {
    fn is_negligible(&self, scale: f64) -> bool {
        self.norm() <= 1e-12 * scale
    }
    fn recip(&self) -> Self {
        self.inv()
    }
    fn abs2(&self) -> f64 {
        self.norm_sqr()
    }
}

impl Ring for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn one() -> Self {
        Poly::one()
    }
    fn from_f64(x: f64) -> Self {
        Poly::constant(x)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
}

impl Ring for RatFun {
    fn zero() -> Self {
        RatFun::zero()
    }
    fn one() -> Self {
        RatFun::one()
    }
    fn from_f64(x: f64) -> Self {
        RatFun::constant(x)
    }
    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        RatFun::is_zero(self)
    }
}

impl Field for RatFun {
    fn is_negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }
    fn recip(&self) -> Self {
        self.inv().expect("checked nonzero")
    }
    fn abs2(&self) -> f64 {
        0.0
    }
}

/// A G(2,0) multivector `c0·e0 + c1·e1 + c2·e2 + c12·e12`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mv4<T> {
    pub c0: T,
    pub c1: T,
    pub c2: T,
    pub c12: T,
}

impl<T: Ring> Mv4<T> {
    pub fn new(c0: T, c1: T, c2: T, c12: T) -> Self {
        Mv4 { c0, c1, c2, c12 }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn scalar(c0: T) -> Self {
        Self::new(c0, T::zero(), T::zero(), T::zero())
    }

    pub fn e0() -> Self {
        Self::scalar(T::one())
    }

    pub fn e1() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn e2() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn e12() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    pub fn from_array(c: [T; 4]) -> Self {
        let [c0, c1, c2, c12] = c;
        Self::new(c0, c1, c2, c12)
    }

    pub fn to_array(&self) -> [T; 4] {
        [
            self.c0.clone(),
            self.c1.clone(),
            self.c2.clone(),
            self.c12.clone(),
        ]
    }

    pub fn coeffs(&self) -> [&T; 4] {
        [&self.c0, &self.c1, &self.c2, &self.c12]
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Mv4<U> {
        Mv4 {
            c0: f(&self.c0),
            c1: f(&self.c1),
            c2: f(&self.c2),
            c12: f(&self.c12),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs().iter().all(|c| c.is_zero())
    }

    /// True when only the e0 part is nonzero.
    pub fn is_scalar(&self) -> bool {
        self.c1.is_zero() && self.c2.is_zero() && self.c12.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(
            self.c0.add(&rhs.c0),
            self.c1.add(&rhs.c1),
            self.c2.add(&rhs.c2),
            self.c12.add(&rhs.c12),
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::new(
            self.c0.sub(&rhs.c0),
            self.c1.sub(&rhs.c1),
            self.c2.sub(&rhs.c2),
            self.c12.sub(&rhs.c12),
        )
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg())
    }

    /// Multiplication by a ring element (scalars commute with everything).
    pub fn scale(&self, k: &T) -> Self {
        self.map(|c| c.mul(k))
    }

    /// Geometric product `self·rhs`.
    pub fn gp(&self, rhs: &Self) -> Self {
        let (a0, a1, a2, a3) = (&self.c0, &self.c1, &self.c2, &self.c12);
        let (b0, b1, b2, b3) = (&rhs.c0, &rhs.c1, &rhs.c2, &rhs.c12);
        let c0 = a0
            .mul(b0)
            .add(&a1.mul(b1))
            .add(&a2.mul(b2))
            .sub(&a3.mul(b3));
        let c1 = a0
            .mul(b1)
            .add(&a1.mul(b0))
            .sub(&a2.mul(b3))
            .add(&a3.mul(b2));
        let c2 = a0
            .mul(b2)
            .add(&a2.mul(b0))
            .add(&a1.mul(b3))
            .sub(&a3.mul(b1));
        let c12 = a0
            .mul(b3)
            .add(&a3.mul(b0))
            .add(&a1.mul(b2))
            .sub(&a2.mul(b1));
        Self::new(c0, c1, c2, c12)
    }

    /// Clifford conjugate: flips the sign of the e1, e2 and e12 parts.
    pub fn conj(&self) -> Self {
        Self::new(
            self.c0.clone(),
            self.c1.neg(),
            self.c2.neg(),
            self.c12.neg(),
        )
    }

    /// Scalar part of `conj(x)·x`, i.e. `c0² - c1² - c2² + c12²`.
    pub fn cnorm(&self) -> T {
        self.c0
            .mul(&self.c0)
            .sub(&self.c1.mul(&self.c1))
            .sub(&self.c2.mul(&self.c2))
            .add(&self.c12.mul(&self.c12))
    }

    /// Right multiplication by the pseudoscalar e12.
    pub fn dual(&self) -> Self {
        self.gp(&Self::e12())
    }

    pub fn to_mat2(&self) -> Mat2<T> {
        Mat2::new(
            self.c0.add(&self.c1),
            self.c2.add(&self.c12),
            self.c2.sub(&self.c12),
            self.c0.sub(&self.c1),
        )
    }

    /// Inverse of [`Mv4::to_mat2`].
    pub fn from_mat2(m: &Mat2<T>) -> Self {
        let half = T::from_f64(0.5);
        Self::new(
            m.a.add(&m.d).mul(&half),
            m.a.sub(&m.d).mul(&half),
            m.b.add(&m.c).mul(&half),
            m.b.sub(&m.c).mul(&half),
        )
    }
}

impl<T: Field> Mv4<T> {
    /// `conj(x) / cnorm(x)`. Fails when `x` is a zero divisor.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.cnorm();
        let scale: f64 = self.coeffs().iter().map(|c| c.abs2()).sum();
        if n.is_zero() || n.is_negligible(scale) {
            return Err(Error::ZeroDivisor {
                multivector: format!("{:?}", self.coeffs()),
            });
        }
        Ok(self.conj().scale(&n.recip()))
    }
}

impl Mv4<f64> {
    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

macro_rules! mv_ops {
    ($($tr:ident $m:ident $f:ident),*) => {$(
        impl<T: Ring> $tr for &Mv4<T> {
            type Output = Mv4<T>;
            fn $m(self, rhs: &Mv4<T>) -> Mv4<T> { self.$f(rhs) }
        }
    )*};
}
mv_ops!(Add add add, Sub sub sub, Mul mul gp);

impl<T: Ring> Neg for &Mv4<T> {
    type Output = Mv4<T>;
    fn neg(self) -> Mv4<T> {
        Mv4::neg(self)
    }
}

/// 2×2 matrix `[[a, b], [c, d]]` over a ring.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Ring> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn entries(&self) -> [&T; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self::new(
            self.a.mul(&rhs.a).add(&self.b.mul(&rhs.c)),
            self.a.mul(&rhs.b).add(&self.b.mul(&rhs.d)),
            self.c.mul(&rhs.a).add(&self.d.mul(&rhs.c)),
            self.c.mul(&rhs.b).add(&self.d.mul(&rhs.d)),
        )
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(
            self.a.add(&rhs.a),
            self.b.add(&rhs.b),
            self.c.add(&rhs.c),
            self.d.add(&rhs.d),
        )
    }

    pub fn det(&self) -> T {
        self.a.mul(&self.d).sub(&self.b.mul(&self.c))
    }
}

/// Product of 2×2 matrices whose entries are multivectors, using the
/// geometric product for entry products.
pub fn mv_mat_mul<T: Ring>(x: &[[Mv4<T>; 2]; 2], y: &[[Mv4<T>; 2]; 2]) -> [[Mv4<T>; 2]; 2] {
    let entry = |i: usize, j: usize| x[i][0].gp(&y[0][j]).add(&x[i][1].gp(&y[1][j]));
    [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]
}

/// A GA-valued transfer function: a multivector of polynomials over a
/// scalar, monic denominator polynomial.
#[derive(Clone, Debug)]
pub struct GaTf {
    num: Mv4<Poly>,
    den: Poly,
    // denominator roots when known more accurately than the expanded form allows
    roots: Option<Vec<Complex64>>,
}

impl PartialEq for GaTf {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}

impl GaTf {
    /// Canonical form: negligible numerator components dropped, denominator
    /// monic, roots shared by the denominator and all four numerator
    /// coefficients cancelled.
    pub fn new(num: Mv4<Poly>, den: Poly) -> Result<Self> {
        Self::new_with(num, den, &Tolerance::default())
    }

    pub fn new_with(num: Mv4<Poly>, den: Poly, tol: &Tolerance) -> Result<Self> {
        Self::new_hinted(num, den, tol, None)
    }

    fn new_hinted(
        num: Mv4<Poly>,
        den: Poly,
        tol: &Tolerance,
        roots: Option<Vec<Complex64>>,
    ) -> Result<Self> {
        let mut tf = Self::unreduced(num, den)?;
        if tf.num.is_zero() {
            return Ok(tf);
        }
        let roots = roots.filter(|r| Some(r.len()) == tf.den.degree());
        let nums = tf.num.to_array();
        Ok(match cancel_common(&tf.den, &nums, tol, roots.as_deref()) {
            Some((den, nums, left)) => {
                let [c0, c1, c2, c12]: [Poly; 4] = nums.try_into().expect("four coefficients");
                GaTf {
                    num: Mv4::new(c0, c1, c2, c12),
                    den,
                    roots: Some(left),
                }
            }
            None => {
                tf.roots = roots;
                tf
            }
        })
    }

    fn den_roots(&self) -> Option<Vec<Complex64>> {
        match &self.roots {
            Some(r) => Some(r.clone()),
            None => self.den.roots().ok(),
        }
    }

    fn product_hint(&self, rhs: &GaTf) -> Option<Vec<Complex64>> {
        let mut r = self.den_roots()?;
        r.extend(rhs.den_roots()?);
        Some(r)
    }

    /// Monic denominator and dropped negligible components, no cancellation.
    pub fn unreduced(num: Mv4<Poly>, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivByZero);
        }
        let biggest = num.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.max_abs()));
        let lead = den.leading();
        let num = num.map(|c| {
            if c.max_abs() <= 1e-12 * biggest {
                Poly::zero()
            } else {
                c.scale(1.0 / lead)
            }
        });
        if num.is_zero() {
            return Ok(Self::zero());
        }
        Ok(GaTf {
            num,
            den: den.scale(1.0 / lead),
            roots: None,
        })
    }

    pub fn zero() -> Self {
        GaTf {
            num: Mv4::zero(),
            den: Poly::one(),
            roots: None,
        }
    }

    pub fn e0() -> Self {
        Self::from_mv(Mv4::e0())
    }

    /// Constant (static) multivector.
    pub fn from_mv(mv: Mv4<f64>) -> Self {
        Self::unreduced(mv.map(|c| Poly::constant(*c)), Poly::one()).expect("unit denominator")
    }

    /// `f·e0`.
    pub fn scalar(f: &RatFun) -> Self {
        Self::from_ratfuns(&Mv4::scalar(f.clone()))
    }

    /// Brings four rational coefficients over a common scalar denominator.
    pub fn from_ratfuns(m: &Mv4<RatFun>) -> Self {
        let dens: Vec<&Poly> = m.coeffs().iter().map(|c| c.den()).collect();
        let Some(l) = lcm(&dens) else {
            return Self::from_ratfuns_product(m);
        };
        let c = m.coeffs();
        let num = Mv4::new(
            c[0].num() * &l.cofactors[0],
            c[1].num() * &l.cofactors[1],
            c[2].num() * &l.cofactors[2],
            c[3].num() * &l.cofactors[3],
        );
        Self::new_hinted(num, l.den, &Tolerance::default(), Some(l.roots))
            .expect("nonzero common denominator")
    }

    fn from_ratfuns_product(m: &Mv4<RatFun>) -> Self {
        let mut dens: Vec<Poly> = Vec::new();
        for c in m.coeffs() {
            if c.is_zero() || c.den().degree() == Some(0) {
                continue;
            }
            if !dens.iter().any(|d| polys_close(d, c.den(), 1e-12)) {
                dens.push(c.den().clone());
            }
        }
        let den = dens.iter().fold(Poly::one(), |acc, d| &acc * d);
        let num = m.map(|c| {
            if c.is_zero() {
                return Poly::zero();
            }
            let mut n = c.num().clone();
            for d in &dens {
                if !polys_close(d, c.den(), 1e-12) {
                    n = &n * d;
                }
            }
            n
        });
        Self::new(num, den).expect("nonzero common denominator")
    }

    pub fn num(&self) -> &Mv4<Poly> {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_scalar(&self) -> bool {
        self.num.is_scalar()
    }

    /// The four coefficients as separately reduced rational functions.
    pub fn to_ratfuns(&self) -> Mv4<RatFun> {
        self.num.map(|n| self.over_den(n.clone()))
    }

    pub fn coeff(&self, i: usize) -> RatFun {
        self.over_den(self.num.coeffs()[i].clone())
    }

    /// `n/den`, reduced.
    pub(crate) fn over_den(&self, n: Poly) -> RatFun {
        RatFun::new_hinted(n, self.den.clone(), self.roots.as_deref()).expect("nonzero denominator")
    }

    pub fn eval(&self, p: Complex64) -> Mv4<Complex64> {
        let d = self.den.eval_complex(p);
        self.num.map(|n| n.eval_complex(p) / d)
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den_roots().unwrap_or_default()
    }

    /// Every coefficient proper.
    pub fn is_proper(&self) -> bool {
        let dd = self.den.degree().unwrap_or(0);
        self.num
            .coeffs()
            .iter()
            .all(|n| n.degree().map_or(true, |k| k <= dd))
    }

    pub fn conj(&self) -> GaTf {
        GaTf {
            num: self.num.conj(),
            den: self.den.clone(),
            roots: self.roots.clone(),
        }
    }

    pub fn scale(&self, k: f64) -> GaTf {
        if k == 0.0 {
            return Self::zero();
        }
        GaTf {
            num: self.num.map(|n| n.scale(k)),
            den: self.den.clone(),
            roots: self.roots.clone(),
        }
    }

    pub fn add(&self, rhs: &GaTf) -> GaTf {
        let tol = Tolerance::default();
        if polys_close(&self.den, &rhs.den, 1e-14) {
            return Self::new_hinted(
                self.num.add(&rhs.num),
                self.den.clone(),
                &tol,
                self.roots.clone(),
            )
            .expect("nonzero");
        }
        if let (Some(x), Some(y)) = (self.den_roots(), rhs.den_roots()) {
            let l = lcm_with_roots(&[&self.den, &rhs.den], &[x, y]);
            let a = self.num.scale(&l.cofactors[0]);
            let b = rhs.num.scale(&l.cofactors[1]);
            return Self::new_hinted(a.add(&b), l.den, &tol, Some(l.roots)).expect("nonzero");
        }
        let a = self.num.scale(&rhs.den);
        let b = rhs.num.scale(&self.den);
        Self::new_hinted(
            a.add(&b),
            &self.den * &rhs.den,
            &tol,
            self.product_hint(rhs),
        )
        .expect("nonzero")
    }

    pub fn sub(&self, rhs: &GaTf) -> GaTf {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> GaTf {
        GaTf {
            num: self.num.neg(),
            den: self.den.clone(),
            roots: self.roots.clone(),
        }
    }

    /// Geometric product `self·rhs`.
    pub fn gp(&self, rhs: &GaTf) -> GaTf {
        Self::new_hinted(
            self.num.gp(&rhs.num),
            &self.den * &rhs.den,
            &Tolerance::default(),
            self.product_hint(rhs),
        )
        .expect("nonzero")
    }

    /// `den·conj(num) / cnorm(num)`.
    pub fn inverse(&self) -> Result<GaTf> {
        let n = self.num.cnorm();
        if n.is_zero() {
            return Err(Error::ZeroDivisor {
                multivector: format!("{:?}", self.num.coeffs()),
            });
        }
        Self::new(self.num.conj().scale(&self.den), n)
    }

    /// Value at p = 0 when the denominator does not vanish there.
    pub fn dc_gain(&self) -> Option<Mv4<f64>> {
        let d = self.den.eval(0.0);
        if d == 0.0 {
            return None;
        }
        Some(self.num.map(|n| n.eval(0.0) / d))
    }

    /// Largest relative coefficient error against another GA-TF, compared
    /// through the separately reduced coefficients.
    pub fn coeff_rel_error(&self, other: &GaTf) -> f64 {
        let a = self.to_ratfuns();
        let b = other.to_ratfuns();
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .map(|(x, y)| x.coeff_rel_error(y))
            .fold(0.0, f64::max)
    }
}
