//! Unity negative feedback around a GA plant and controller.
//!
//! Writing `G = n_p/d_p` and `C = n_c/d_c` with multivector numerators and
//! scalar denominators, `e0 + G·C = d_pc/(d_p·d_c)` where
//! `d_pc = d_p·d_c·e0 + n_p·n_c`. The closed loop is
//!
//! ```text
//! G·C·(e0 + G·C)⁻¹ = n_p·n_c·conj(d_pc) / d_cl,   d_cl = conj(d_pc)·d_pc
//! ```
//!
//! and `d_cl` is a real polynomial whose roots decide stability.

use alloc::vec::Vec;

use crate::ga::{GaTf, Mv4};
use crate::poly::Poly;
use crate::{Complex64, Error, Result};

#[derive(Clone, Debug)]
pub struct ClosedLoopReport {
    pub g_cl: GaTf,
    /// Unreduced characteristic polynomial.
    pub d_cl: Poly,
    pub minimal_poles: Vec<Complex64>,
    pub stable: bool,
    /// Largest non-scalar coefficient of `conj(d_pc)·d_pc`, relative to `d_cl`.
    pub scalar_residual: f64,
}

struct Loop {
    num: Mv4<Poly>,
    d_cl: Poly,
    scalar_residual: f64,
}

fn build(plant: &GaTf, ctrl: &GaTf) -> Result<Loop> {
    let npnc = plant.num().gp(ctrl.num());
    let dpdc = plant.den() * ctrl.den();
    let d_pc = npnc.add(&Mv4::scalar(dpdc));
    let full = d_pc.conj().gp(&d_pc);
    let d_cl = full.c0.clone();
    if d_cl.is_zero() {
        return Err(Error::AlgebraicLoop);
    }
    let scale = d_cl.max_abs();
    let scalar_residual = [&full.c1, &full.c2, &full.c12]
        .iter()
        .map(|c| c.max_abs() / scale)
        .fold(0.0, f64::max);
    Ok(Loop {
        num: npnc.gp(&d_pc.conj()),
        d_cl,
        scalar_residual,
    })
}

/// `G·C·(e0 + G·C)⁻¹`, reduced.
pub fn closed_loop(plant: &GaTf, ctrl: &GaTf) -> Result<GaTf> {
    let l = build(plant, ctrl)?;
    GaTf::new(l.num, l.d_cl)
}

/// The unreduced characteristic polynomial `conj(d_pc)·d_pc`.
pub fn char_poly(plant: &GaTf, ctrl: &GaTf) -> Result<Poly> {
    Ok(build(plant, ctrl)?.d_cl)
}

/// Collapses numerically repeated roots.
fn distinct(roots: Vec<Complex64>) -> Vec<Complex64> {
    let scale = roots.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    let mut out: Vec<Complex64> = Vec::new();
    for z in roots {
        if !out
            .iter()
            .any(|w| (w - z).norm() <= 1e-5 * w.norm().max(1e-9 * scale))
        {
            out.push(z);
        }
    }
    out
}

fn minimal_from(g_cl: &GaTf, d_cl: &Poly) -> Result<Vec<Complex64>> {
    if g_cl.is_zero() {
        // nothing to cancel against: the loop keeps the plant and controller modes
        return match d_cl.degree() {
            Some(0) => Ok(Vec::new()),
            _ => Ok(distinct(d_cl.roots()?)),
        };
    }
    match g_cl.den().degree() {
        Some(0) => Ok(Vec::new()),
        _ => g_cl.den().roots(),
    }
}

/// Poles of the reduced closed loop.
pub fn minimal_poles(plant: &GaTf, ctrl: &GaTf) -> Result<Vec<Complex64>> {
    let l = build(plant, ctrl)?;
    let g_cl = GaTf::new(l.num, l.d_cl.clone())?;
    minimal_from(&g_cl, &l.d_cl)
}

/// Hurwitz test on the unreduced characteristic polynomial.
pub fn is_cl_stable(plant: &GaTf, ctrl: &GaTf) -> Result<bool> {
    char_poly(plant, ctrl)?.is_hurwitz()
}

pub fn analyze(plant: &GaTf, ctrl: &GaTf) -> Result<ClosedLoopReport> {
    let l = build(plant, ctrl)?;
    let g_cl = GaTf::new(l.num, l.d_cl.clone())?;
    let minimal_poles = minimal_from(&g_cl, &l.d_cl)?;
    let stable = l.d_cl.is_hurwitz()?;
    Ok(ClosedLoopReport {
        g_cl,
        d_cl: l.d_cl,
        minimal_poles,
        stable,
        scalar_residual: l.scalar_residual,
    })
}

fn den_hurwitz(g: &GaTf) -> Result<bool> {
    if g.is_zero() {
        return Ok(true);
    }
    g.den().is_hurwitz()
}

/// All four maps `S`, `C·S`, `S·G` and `C·S·G` with `S = (e0 + G·C)⁻¹` have
/// stable reduced denominators. Unlike [`is_cl_stable`] this tolerates
/// unstable controller modes that cancel against the loop.
pub fn is_internally_stable(plant: &GaTf, ctrl: &GaTf) -> Result<bool> {
    let ret = GaTf::e0().add(&plant.gp(ctrl));
    let s = ret.inverse().map_err(|_| Error::AlgebraicLoop)?;
    let cs = ctrl.gp(&s);
    let sg = s.gp(plant);
    let csg = cs.gp(plant);
    for m in [&s, &cs, &sg, &csg] {
        if !den_hurwitz(m)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_rl_model, real_to_ga, CircuitParams};
    use crate::ratfun::RatFun;

    fn plant(balanced: bool) -> GaTf {
        real_to_ga(&build_rl_model(&CircuitParams::example(), balanced)).g
    }

    fn prop(k: f64) -> GaTf {
        GaTf::from_mv(Mv4::new(k, k, 0.0, 0.0))
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<f64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v.into_iter().map(|z| z.re).collect()
    }

    #[test]
    fn unit_loop() {
        let g = closed_loop(&GaTf::e0(), &GaTf::e0()).unwrap();
        assert!(g.is_scalar());
        assert!((g.coeff(0).eval(3.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn balanced_proportional() {
        let p = CircuitParams::example();
        let k = 10.0;
        let g = closed_loop(&plant(true), &GaTf::from_mv(Mv4::scalar(k))).unwrap();
        let want = RatFun::new(Poly::constant(k * p.r), Poly::linear(p.r + k * p.r, p.l)).unwrap();
        assert!(g.is_scalar());
        assert!(g.coeff(0).coeff_rel_error(&want) < 1e-10);
        let poles = minimal_poles(&plant(true), &GaTf::from_mv(Mv4::scalar(k))).unwrap();
        assert_eq!(poles.len(), 1);
        assert!((poles[0].re + 80666.666_666_7).abs() < 1e-3);
        let d = char_poly(&plant(true), &GaTf::from_mv(Mv4::scalar(k))).unwrap();
        assert_eq!(d.degree(), Some(2));
    }

    #[test]
    fn zero_controller() {
        let g = plant(false);
        let d = char_poly(&g, &GaTf::zero()).unwrap();
        let dp = g.den();
        assert!(crate::ratfun::poly_rel_error(&d, &(dp * dp)) < 1e-12);
        let poles = sorted_re(minimal_poles(&g, &GaTf::zero()).unwrap());
        assert_eq!(poles.len(), 2);
        assert!((poles[0] + 7333.333_333).abs() < 1e-3);
        assert!((poles[1] + 1047.619_047).abs() < 1e-3);
    }

    #[test]
    fn proportional_char_poly_factorization() {
        let p = CircuitParams::example();
        let g = plant(false);
        let k = 10.0;
        let d_cl = char_poly(&g, &prop(k)).unwrap();
        let d = p.unbalanced_den();
        let extra = Poly::linear(6.0 * p.r * k * 2.0 * p.r, 6.0 * p.r * k * (p.l + p.lu));
        let want = (&d * &(&d + &extra)).monic();
        assert!(crate::ratfun::poly_rel_error(&d_cl.monic(), &want) < 1e-10);
        let r = sorted_re(d_cl.roots().unwrap());
        assert!((r.last().unwrap() + 1047.619).abs() < 0.1);
    }

    #[test]
    fn proportional_minimal_poles() {
        let poles = sorted_re(minimal_poles(&plant(false), &prop(10.0)).unwrap());
        assert_eq!(poles.len(), 2);
        assert!((poles[0] + 122_300.0).abs() / 122_300.0 < 1e-3, "{poles:?}");
        assert!((poles[1] + 1319.2).abs() / 1319.2 < 1e-3, "{poles:?}");
    }

    #[test]
    fn proportional_structure() {
        let g = closed_loop(&plant(false), &prop(10.0)).unwrap();
        let r = g.to_ratfuns();
        // only (e0 + e1) and (e2 - e12) directions
        assert!(r.c0.coeff_rel_error(&r.c1) < 1e-9);
        assert!(r.c2.coeff_rel_error(&r.c12.scale(-1.0)) < 1e-9);
        assert!(!r.c2.is_zero());
    }

    #[test]
    fn unstable_open_loop() {
        let g = GaTf::scalar(&RatFun::new(Poly::one(), Poly::linear(-1.0, 1.0)).unwrap());
        assert!(!is_cl_stable(&g, &GaTf::zero()).unwrap());
    }

    #[test]
    fn algebraic_loop() {
        // e0 + G·C vanishes identically
        assert!(matches!(
            closed_loop(&GaTf::e0(), &GaTf::from_mv(Mv4::scalar(-1.0))),
            Err(Error::AlgebraicLoop)
        ));
    }

    #[test]
    fn report_fields() {
        let r = analyze(&plant(false), &prop(1.0)).unwrap();
        assert!(r.stable);
        assert!(r.scalar_residual < 1e-12);
        assert_eq!(r.d_cl.degree(), Some(4));
    }
}
