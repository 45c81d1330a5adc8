use nalgebra::DVector;

use super::norm::{lp_norm, LpNorm};
use super::piecewise::PiecewisePoly;
use crate::error::{Error, Result};

/// State of the network flow with dynamic vertex conditions: an edge profile `f` on
/// `[0, 1]` (one component per edge) and a vertex vector `d` (one entry per vertex).
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    pub f: PiecewisePoly,
    pub d: DVector<f64>,
}

impl ExtendedState {
    pub fn new(f: PiecewisePoly, d: DVector<f64>) -> Self {
        ExtendedState { f, d }
    }

    pub fn zero(m: usize, n: usize) -> Self {
        ExtendedState { f: PiecewisePoly::zero(m, 0.0, 1.0), d: DVector::zeros(n) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.d.len() != other.d.len() {
            return Err(Error::DimensionMismatch { expected: self.d.len(), found: other.d.len() });
        }
        Ok(ExtendedState { f: self.f.add(&other.f)?, d: &self.d + &other.d })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        ExtendedState { f: self.f.scale(c), d: &self.d * c }
    }

    /// `max(|f|_p, |d|_2)`; used for residuals.
    pub fn norm(&self, p: LpNorm) -> f64 {
        lp_norm(&self.f, p).max(self.d.norm())
    }
}
