//! Symmetric AM/GM certificates for signomials and polynomials.
//!
//! Exponents are exact rationals and every convex-geometry decision runs on an
//! exact simplex; coefficients are `f64` and certificate checks take an
//! explicit tolerance.

pub mod age;
mod barrier;
pub mod error;
pub mod exactness;
pub mod exponent;
pub mod geometry;
mod lp;
pub mod means;
pub mod reference;
pub mod sage;
pub mod signomial;
pub mod sonc;
pub mod symmetry;

pub use error::{Error, Result};
pub use exponent::{ExponentVector, Rational};
pub use signomial::{Flavor, Signomial, SupportSplit, Term};
