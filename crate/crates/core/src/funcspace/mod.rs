//! Piecewise-polynomial function algebra: the concrete carrier of edge states, controls
//! and exponential profiles.

mod exp;
mod norm;
mod piecewise;
mod poly;
pub mod serial;
mod state;

pub use exp::{exp_tensor, exp_tensor_on, ExpProfile, EXP_DEGREE, EXP_TOL};
pub use norm::{l1_norm, l2_norm, lp_norm, sup_norm, LpNorm};
pub use piecewise::{PiecewisePoly, BREAK_EPS, MAX_DEGREE};
pub use poly::Poly;
pub use state::ExtendedState;
