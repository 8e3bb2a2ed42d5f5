//! Three-phase electrical systems as transfer functions valued in the
//! geometric algebra G(2,0).
//!
//! The crate is `no_std` (it needs `alloc`). Layers, bottom-up:
//!
//! * [`poly`] and [`ratfun`]: real polynomials in the operator `p` and their
//!   quotients, with root finding and Hurwitz testing.
//! * [`ga`]: multivectors of G(2,0) over a generic coefficient ring, the
//!   2×2 matrix isomorphism, and [`ga::GaTf`], a multivector of polynomials
//!   over a scalar denominator.
//! * [`models`]: real MIMO, complex and GA plant representations and the
//!   conversions between them.
//! * [`circuits`]: modified nodal analysis over rational functions and the
//!   Clarke projection.
//! * [`analysis`] and [`synthesis`]: closed-loop stability, Youla-Kučera
//!   controllers and decoupling design.
//! * [`sim`]: Tustin discretization and sampled-data closed-loop simulation.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod circuits;
mod error;
pub mod ga;
pub mod models;
pub mod poly;
pub mod ratfun;
pub mod sim;
pub mod synthesis;

pub use error::{Error, Result};

pub use ga::{GaTf, Mat2, Mv4};
pub use num_complex::Complex64;
pub use poly::Poly;
pub use ratfun::{RatFun, Tolerance};
