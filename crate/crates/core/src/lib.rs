//! Exact moments of the empirical correlation of two Gaussian diffusions.
//!
//! The moments are obtained from closed-form joint Laplace transforms
//! ([`mgf`]) differentiated with truncated Taylor series ([`jet`]) and
//! integrated over the positive quadrant ([`moments`]). Two independent
//! checks are provided: a backward Riccati integrator ([`riccati`]) for the
//! transforms and path simulation ([`montecarlo`]) for the moments.

pub mod density;
pub mod jet;
pub mod mgf;
pub mod montecarlo;
pub mod moments;
pub mod quad;
pub mod riccati;
pub mod special;

pub use jet::{Jet, JetError};
pub use mgf::{Mgf, MgfError, ProcessKind, ProcessSpec, SymMatrix2};
