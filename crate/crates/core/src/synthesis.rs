//! Youla parameterization of GA controllers for stable plants, and the
//! decoupling choice of the parameter.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::analysis::closed_loop;
use crate::ga::{GaTf, Mv4};
use crate::poly::Poly;
use crate::ratfun::RatFun;
use crate::{Complex64, Error, Result};

/// A Youla parameter `Q = q0·e0 + q1·e1 + q2·e2 + q3·e12`.
#[derive(Clone, Debug, PartialEq)]
pub struct QParam {
    pub q: GaTf,
}

impl QParam {
    pub fn new(q: GaTf) -> Self {
        QParam { q }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    /// Roots of the scalar denominator with nonnegative real part.
    pub unstable_poles: Vec<Complex64>,
    /// Indices (0 = e0 .. 3 = e12) of coefficients with excess degree.
    pub improper: Vec<usize>,
}

impl Admissibility {
    pub fn describe(&self) -> String {
        if self.admissible {
            return String::from("admissible (stable denominator, all coefficients proper)");
        }
        let mut parts = Vec::new();
        if !self.unstable_poles.is_empty() {
            let poles: Vec<String> = self
                .unstable_poles
                .iter()
                .map(|z| format!("{}{:+}j", z.re, z.im))
                .collect();
            parts.push(format!("unstable poles [{}]", poles.join(", ")));
        }
        if !self.improper.is_empty() {
            const NAMES: [&str; 4] = ["e0", "e1", "e2", "e12"];
            let names: Vec<&str> = self.improper.iter().map(|&i| NAMES[i]).collect();
            parts.push(format!("improper coefficients [{}]", names.join(", ")));
        }
        parts.join("; ")
    }
}

fn rhp_roots(d: &Poly) -> Result<Vec<Complex64>> {
    if d.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    Ok(d.roots()?.into_iter().filter(|z| z.re >= 0.0).collect())
}

/// Stable scalar denominator and proper coefficients.
pub fn q_admissible(q: &QParam) -> Result<Admissibility> {
    let g = &q.q;
    let mut unstable_poles = Vec::new();
    if !g.is_zero() && !g.den().is_hurwitz()? {
        unstable_poles = rhp_roots(g.den())?;
        if unstable_poles.is_empty() {
            // Routh flagged a marginal case that the root finder puts at -0
            unstable_poles = g.den().roots()?;
        }
    }
    let dd = g.den().degree().unwrap_or(0);
    let improper: Vec<usize> = g
        .num()
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, n)| n.degree().is_some_and(|k| k > dd))
        .map(|(i, _)| i)
        .collect();
    Ok(Admissibility {
        admissible: unstable_poles.is_empty() && improper.is_empty(),
        unstable_poles,
        improper,
    })
}

/// Fails unless every pole of the plant lies in the open left half plane.
pub fn check_plant_stable(plant: &GaTf) -> Result<()> {
    if plant.is_zero() || plant.den().is_hurwitz()? {
        return Ok(());
    }
    let mut poles = rhp_roots(plant.den())?;
    if poles.is_empty() {
        poles = plant.den().roots()?;
    }
    Err(Error::PlantNotStable { poles })
}

/// `C = (e0 − Q·G)⁻¹·Q`.
pub fn youla_controller(plant: &GaTf, q: &QParam) -> Result<GaTf> {
    check_plant_stable(plant)?;
    let adm = q_admissible(q)?;
    if !adm.admissible {
        return Err(Error::QNotAdmissible {
            detail: adm.describe(),
        });
    }
    let inner = GaTf::e0().sub(&q.q.gp(plant));
    let inv = inner.inverse().map_err(|_| Error::AlgebraicLoop)?;
    Ok(inv.gp(&q.q))
}

/// Outcome of the decoupling parameter construction.
#[derive(Clone, Debug)]
pub struct DecouplingQ {
    pub q: QParam,
    /// Scalar factor applied to `conj(G)/g0`.
    pub q0: f64,
    pub q0_reason: String,
}

/// `Q = q0·conj(G)/g0`, so that `Q·G = q0·cnorm(G)/g0` is scalar. `q0 = ±1`
/// is picked to make the closed-loop DC gain positive.
pub fn decoupling_q(plant: &GaTf) -> Result<DecouplingQ> {
    let n = plant.num();
    if n.c0.is_zero() {
        return Err(Error::DegeneratePlant);
    }
    // closed loop G·Q = q0·cnorm(n)/(n0·d)
    let num0 = n.cnorm().eval(0.0);
    let den0 = n.c0.eval(0.0) * plant.den().eval(0.0);
    let dc = num0 / den0;
    let (q0, q0_reason) = if dc.is_finite() && dc < 0.0 {
        (
            -1.0,
            format!("q0 = -1: closed-loop DC gain with q0 = +1 would be {dc}"),
        )
    } else if dc.is_finite() && dc != 0.0 {
        (
            1.0,
            format!("q0 = +1: closed-loop DC gain {dc} is positive"),
        )
    } else {
        (
            1.0,
            String::from("q0 = +1: DC gain undefined, defaulting to +1"),
        )
    };
    let q = GaTf::new(n.conj().scale(&Poly::constant(q0)), n.c0.clone())?;
    let q = QParam::new(q);
    let adm = q_admissible(&q)?;
    if !adm.admissible {
        return Err(Error::QNotAdmissible {
            detail: adm.describe(),
        });
    }
    Ok(DecouplingQ { q, q0, q0_reason })
}

#[derive(Clone, Debug)]
pub struct DecouplingCheck {
    /// Largest off-diagonal numerator coefficient over the largest diagonal one.
    pub offdiag_residual: f64,
    /// The common diagonal entry of the real closed-loop matrix, when the two
    /// diagonal entries agree.
    pub diag: Option<RatFun>,
}

/// Measures how far the real 2×2 form of the closed loop is from diagonal.
/// A diagonal loop whose two diagonal entries differ is an error.
pub fn verify_decoupled(plant: &GaTf, ctrl: &GaTf) -> Result<DecouplingCheck> {
    let g = closed_loop(plant, ctrl)?;
    verify_diagonal(&g)
}

/// [`verify_decoupled`] on an already formed closed loop.
pub fn verify_diagonal(g: &GaTf) -> Result<DecouplingCheck> {
    let n = g.num();
    let ga = &n.c0 + &n.c1;
    let gd = &n.c0 - &n.c1;
    let gb = &n.c2 + &n.c12;
    let gc = &n.c2 - &n.c12;
    let diag_scale = ga.max_abs().max(gd.max_abs());
    let off = gb.max_abs().max(gc.max_abs());
    let offdiag_residual = if diag_scale > 0.0 {
        off / diag_scale
    } else if off > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let mismatch = if diag_scale > 0.0 {
        n.c1.max_abs() / diag_scale
    } else {
        0.0
    };
    if mismatch >= 1e-8 && offdiag_residual < 1e-9 {
        return Err(Error::NotSymmetric { mismatch });
    }
    let diag = if mismatch < 1e-8 {
        Some(RatFun::new(n.c0.clone(), g.den().clone())?)
    } else {
        None
    };
    Ok(DecouplingCheck {
        offdiag_residual,
        diag,
    })
}

/// Everything produced by the decoupling design pipeline.
#[derive(Clone, Debug)]
pub struct DecouplingDesign {
    pub q: DecouplingQ,
    pub admissibility: Admissibility,
    pub controller: GaTf,
    /// Every controller coefficient proper (integral action is allowed).
    pub controller_proper: bool,
    pub closed_loop: GaTf,
    pub check: DecouplingCheck,
}

pub fn design_decoupling(plant: &GaTf) -> Result<DecouplingDesign> {
    let q = decoupling_q(plant)?;
    let admissibility = q_admissible(&q.q)?;
    let controller = youla_controller(plant, &q.q)?;
    let closed_loop = closed_loop(plant, &controller)?;
    let check = verify_diagonal(&closed_loop)?;
    Ok(DecouplingDesign {
        controller_proper: controller.is_proper(),
        q,
        admissibility,
        controller,
        closed_loop,
        check,
    })
}

/// Convenience: a constant multivector as a Youla parameter.
pub fn static_q(mv: Mv4<f64>) -> QParam {
    QParam::new(GaTf::from_mv(mv))
}
