//! Plant representations in the αβ frame and the maps between them.
//!
//! * [`RealMimo2`]: 2×2 matrix of rational functions acting on (u_α, u_β).
//! * [`ComplexSiso`]: the pair G1, G2 acting on u_αβ and its conjugate.
//! * [`GaSiso`]: one multivector-valued transfer function.

use crate::ga::{GaTf, Mat2, Mv4};
use crate::poly::Poly;
use crate::ratfun::RatFun;
use crate::{Complex64, Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Line and load parameters of the three-phase RL example circuit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitParams {
    /// Line inductance of the healthy phases (H).
    pub l: f64,
    /// Line inductance of the unbalanced phase (H).
    pub lu: f64,
    /// Load resistance per phase (Ω).
    pub r: f64,
}

impl CircuitParams {
    pub fn new(l: f64, lu: f64, r: f64) -> Result<Self> {
        for (name, v) in [("L", l), ("Lu", lu), ("R", r)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(CircuitParams { l, lu, r })
    }

    /// L = 3 mH, Lu = 30 mH, R = 22 Ω.
    pub fn example() -> Self {
        CircuitParams {
            l: 3e-3,
            lu: 3e-2,
            r: 22.0,
        }
    }

    /// Common denominator 2(R + Lp)(3R + (L + 2Lu)p) of the unbalanced model.
    pub fn unbalanced_den(&self) -> Poly {
        let a = Poly::linear(self.r, self.l);
        let b = Poly::linear(3.0 * self.r, self.l + 2.0 * self.lu);
        (&a * &b).scale(2.0)
    }
}

/// `[[ga, gb], [gc, gd]]` mapping (u_α, u_β) to (y_α, y_β).
#[derive(Clone, Debug, PartialEq)]
pub struct RealMimo2 {
    pub ga: RatFun,
    pub gb: RatFun,
    pub gc: RatFun,
    pub gd: RatFun,
}

impl RealMimo2 {
    pub fn new(ga: RatFun, gb: RatFun, gc: RatFun, gd: RatFun) -> Self {
        RealMimo2 { ga, gb, gc, gd }
    }

    pub fn identity() -> Self {
        Self::new(RatFun::one(), RatFun::zero(), RatFun::zero(), RatFun::one())
    }

    pub fn zero() -> Self {
        Self::new(
            RatFun::zero(),
            RatFun::zero(),
            RatFun::zero(),
            RatFun::zero(),
        )
    }

    pub fn diag(g: RatFun) -> Self {
        Self::new(g.clone(), RatFun::zero(), RatFun::zero(), g)
    }

    pub fn entries(&self) -> [&RatFun; 4] {
        [&self.ga, &self.gb, &self.gc, &self.gd]
    }

    pub fn to_mat2(&self) -> Mat2<RatFun> {
        Mat2::new(
            self.ga.clone(),
            self.gb.clone(),
            self.gc.clone(),
            self.gd.clone(),
        )
    }

    pub fn from_mat2(m: Mat2<RatFun>) -> Self {
        Self::new(m.a, m.b, m.c, m.d)
    }

    pub fn mul(&self, rhs: &RealMimo2) -> RealMimo2 {
        Self::from_mat2(self.to_mat2().mul(&rhs.to_mat2()))
    }

    /// Matrix inverse via the adjugate.
    pub fn inverse(&self) -> Result<RealMimo2> {
        let det = self.to_mat2().det();
        let inv = det.inv()?;
        Ok(Self::new(
            &self.gd * &inv,
            &(-&self.gb) * &inv,
            &(-&self.gc) * &inv,
            &self.ga * &inv,
        ))
    }

    pub fn eval_complex(&self, p: Complex64) -> Mat2<Complex64> {
        Mat2::new(
            self.ga.eval_complex(p),
            self.gb.eval_complex(p),
            self.gc.eval_complex(p),
            self.gd.eval_complex(p),
        )
    }

    /// Largest per-entry relative coefficient error.
    pub fn coeff_rel_error(&self, other: &RealMimo2) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| a.coeff_rel_error(b))
            .fold(0.0, f64::max)
    }
}

/// G1 and G2 as (real part, imaginary part) pairs:
/// `y_αβ = G1·u_αβ + G2·conj(u_αβ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSiso {
    pub g1: (RatFun, RatFun),
    pub g2: (RatFun, RatFun),
}

impl ComplexSiso {
    pub fn eval_complex(&self, p: Complex64) -> (Complex64, Complex64) {
        let j = Complex64::new(0.0, 1.0);
        (
            self.g1.0.eval_complex(p) + j * self.g1.1.eval_complex(p),
            self.g2.0.eval_complex(p) + j * self.g2.1.eval_complex(p),
        )
    }
}

/// A multivector-valued SISO plant.
#[derive(Clone, Debug, PartialEq)]
pub struct GaSiso {
    pub g: GaTf,
}

impl GaSiso {
    pub fn new(g: GaTf) -> Self {
        GaSiso { g }
    }
}

/// Closed-form αβ model of the RL example circuit.
pub fn build_rl_model(params: &CircuitParams, balanced: bool) -> RealMimo2 {
    let CircuitParams { l, lu, r } = *params;
    if balanced {
        let g = RatFun::new(Poly::constant(r), Poly::linear(r, l)).expect("R > 0");
        return RealMimo2::diag(g);
    }
    let d = params.unbalanced_den();
    let entry = |n: Poly| RatFun::new(n, d.clone()).expect("nonzero denominator");
    let ga = entry(Poly::linear(6.0 * r * r, 3.0 * r * (l + lu)));
    let off = entry(Poly::linear(0.0, -SQRT3 * r * (l - lu)));
    let gd = entry(Poly::linear(6.0 * r * r, r * (5.0 * l + lu)));
    RealMimo2::new(ga, off.clone(), off, gd)
}

fn half(x: &RatFun) -> RatFun {
    x.scale(0.5)
}

pub fn real_to_complex(m: &RealMimo2) -> ComplexSiso {
    ComplexSiso {
        g1: (half(&(&m.ga + &m.gd)), half(&(&m.gc - &m.gb))),
        g2: (half(&(&m.ga - &m.gd)), half(&(&m.gb + &m.gc))),
    }
}

pub fn complex_to_real(c: &ComplexSiso) -> RealMimo2 {
    let (r1, i1) = &c.g1;
    let (r2, i2) = &c.g2;
    RealMimo2::new(r1 + r2, i2 - i1, i1 + i2, r1 - r2)
}

/// The four multivector coefficients of a real 2×2 model, each as its own
/// rational function.
pub fn real_to_ga_coeffs(m: &RealMimo2) -> Mv4<RatFun> {
    Mv4::new(
        half(&(&m.ga + &m.gd)),
        half(&(&m.ga - &m.gd)),
        half(&(&m.gb + &m.gc)),
        half(&(&m.gb - &m.gc)),
    )
}

pub fn real_to_ga(m: &RealMimo2) -> GaSiso {
    GaSiso::new(GaTf::from_ratfuns(&real_to_ga_coeffs(m)))
}

pub fn ga_to_real(g: &GaSiso) -> RealMimo2 {
    let n = g.g.num();
    let entry = |x: Poly| g.g.over_den(x);
    RealMimo2::new(
        entry(&n.c0 + &n.c1),
        entry(&n.c2 + &n.c12),
        entry(&n.c2 - &n.c12),
        entry(&n.c0 - &n.c1),
    )
}

/// The involutive transformation ½[[e0+e1, −e2+e12], [−e2−e12, e0−e1]].
pub fn tg_matrix() -> [[Mv4<f64>; 2]; 2] {
    [
        [Mv4::new(0.5, 0.5, 0.0, 0.0), Mv4::new(0.0, 0.0, -0.5, 0.5)],
        [
            Mv4::new(0.0, 0.0, -0.5, -0.5),
            Mv4::new(0.5, -0.5, 0.0, 0.0),
        ],
    ]
}

/// Reflection automorphism e2 → −e2 (and so e12 → −e12).
pub fn reflect_e2<T: crate::ga::Ring>(x: &Mv4<T>) -> Mv4<T> {
    Mv4::new(x.c0.clone(), x.c1.clone(), x.c2.neg(), x.c12.neg())
}

/// Relative threshold below which a coefficient counts as zero.
pub const BALANCED_TOL: f64 = 1e-9;

/// No e1 or e2 part (equivalently G2 = 0), judged against the largest
/// numerator coefficient of the plant.
pub fn is_balanced_ga(g: &GaTf) -> bool {
    let n = g.num();
    let biggest = n.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.max_abs()));
    if biggest == 0.0 {
        return true;
    }
    n.c1.max_abs() < BALANCED_TOL * biggest && n.c2.max_abs() < BALANCED_TOL * biggest
}

pub fn is_balanced(m: &RealMimo2) -> bool {
    is_balanced_ga(&real_to_ga(m).g)
}
