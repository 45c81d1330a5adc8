//! Exact and positive reachability for boundary-controlled transport equations on
//! `R^m` and on networks, with static or dynamic vertex conditions.
//!
//! States are vector-valued piecewise polynomials on `[0, 1]`, so semigroup orbits,
//! Dirichlet profiles and controllability maps are all evaluated in one closed
//! polynomial algebra. Exponentials are the only non-polynomial ingredient and are
//! carried as certified Taylor pieces.

pub mod control;
pub mod error;
pub mod funcspace;
pub mod hexfloat;
pub mod linalg;
pub mod network;
pub mod quadrature;
pub mod reach;
pub mod report;
pub mod sample;
pub mod selftest;
pub mod semigroup;

pub use error::{Error, Result};
