use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Root finding on a constant or zero polynomial.
    NoRoots,
    /// An operation that needs a nonzero polynomial received zero.
    ZeroPolynomial,
    /// Division by an identically zero rational function.
    DivByZero,
    /// Attempted inversion of a multivector whose Clifford norm vanishes.
    ZeroDivisor {
        multivector: String,
    },
    /// MNA elimination found no usable pivot.
    Singular {
        step: usize,
        detail: String,
    },
    InvalidNetlist(String),
    /// `e0 + G·C` (or `e0 - Q·G`) is not invertible.
    AlgebraicLoop,
    PlantNotStable {
        poles: Vec<Complex64>,
    },
    QNotAdmissible {
        detail: String,
    },
    /// The plant's e0 coefficient vanishes identically.
    DegeneratePlant,
    /// The two diagonal entries of a supposedly decoupled loop differ.
    NotSymmetric {
        mismatch: f64,
    },
    NotRealizable {
        what: String,
    },
    BadPrewarp {
        omega: f64,
        ts: f64,
    },
    Diverged {
        time: f64,
    },
    InvalidParameter(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NoRoots => write!(f, "polynomial of degree 0 has no roots"),
            Error::ZeroPolynomial => write!(f, "zero polynomial"),
            Error::DivByZero => write!(f, "division by an identically zero rational function"),
            Error::ZeroDivisor { multivector } => {
                write!(
                    f,
                    "multivector {multivector} is a zero divisor (Clifford norm vanishes)"
                )
            }
            Error::Singular { step, detail } => {
                write!(
                    f,
                    "singular MNA system at elimination step {step}: {detail}"
                )
            }
            Error::InvalidNetlist(msg) => write!(f, "invalid netlist: {msg}"),
            Error::AlgebraicLoop => write!(f, "algebraic loop: loop operator is not invertible"),
            Error::PlantNotStable { poles } => {
                write!(f, "plant is not open-loop stable; offending poles:")?;
                for p in poles {
                    write!(f, " {}{:+}j", p.re, p.im)?;
                }
                Ok(())
            }
            Error::QNotAdmissible { detail } => {
                write!(f, "Youla parameter not admissible: {detail}")
            }
            Error::DegeneratePlant => write!(f, "plant e0 coefficient is identically zero"),
            Error::NotSymmetric { mismatch } => {
                write!(
                    f,
                    "closed-loop diagonal entries differ (relative mismatch {mismatch:e})"
                )
            }
            Error::NotRealizable { what } => write!(f, "not realizable (improper): {what}"),
            Error::BadPrewarp { omega, ts } => write!(
                f,
                "prewarp frequency {omega} rad/s is at or above Nyquist for Ts = {ts} s"
            ),
            Error::Diverged { time } => write!(f, "simulation diverged at t = {time} s"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}
