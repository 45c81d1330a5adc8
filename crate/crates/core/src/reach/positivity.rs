//! Positivity of the control operator: `R(e^lambda, B) b >= 0` and
//! `(e^{lambda s} - T(s)) B_lambda >= 0` on a grid of lambdas.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::funcspace::sup_norm;
use crate::linalg;
use crate::semigroup::StaticSystem;

/// Times at which `(e^{lambda s} - T(s)) B_lambda` is inspected.
pub const SAMPLE_TIMES: [f64; 5] = [0.25, 0.5, 0.75, 1.0, 1.5];

#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint {
    pub lambda: f64,
    /// Minimum entry of `R(e^lambda, B) b`.
    pub resolvent_min: Option<f64>,
    /// Minimum of `(e^{lambda s} - T(s)) B_lambda` over the sample times, relative to
    /// the size of `e^{lambda s} B_lambda`.
    pub semigroup_min: Option<f64>,
    pub notice: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub points: Vec<GridPoint>,
    /// Smallest entry seen across all checked quantities.
    pub min_entry: f64,
    /// First `k` with a negative entry in `B^k b` (the Neumann-series term that can
    /// break positivity).
    pub neumann_violation: Option<usize>,
    pub nonnegative: bool,
}

pub fn positivity_preservation_check(
    b_mat: &DMatrix<f64>,
    b: &DVector<f64>,
    lambda_grid: &[f64],
    tol: f64,
) -> Result<PositivityReport> {
    let sys = StaticSystem::new(b_mat.clone(), b.clone())?;
    let m = b.len();
    let mut neumann_violation = None;
    let mut g = b.clone();
    for k in 0..=m {
        if g.iter().any(|&x| x < 0.0) {
            neumann_violation = Some(k);
            break;
        }
        g = b_mat * g;
    }
    let rho = linalg::spectral_radius(b_mat);
    let mut points = Vec::with_capacity(lambda_grid.len());
    let mut min_entry = f64::INFINITY;
    let mut nonnegative = neumann_violation.is_none();
    for &lambda in lambda_grid {
        if lambda.exp() <= rho {
            points.push(GridPoint {
                lambda,
                resolvent_min: None,
                semigroup_min: None,
                notice: Some(format!("e^lambda = {} does not exceed rho(B) = {rho}; skipped", lambda.exp())),
            });
            continue;
        }
        let q = match sys.dirichlet(lambda, b) {
            Ok(q) => q,
            Err(e) => {
                points.push(GridPoint { lambda, resolvent_min: None, semigroup_min: None, notice: Some(e.to_string()) });
                continue;
            }
        };
        let r = q.profile.eval_at_start();
        let rmin = r.min();
        let scale = r.amax().max(f64::MIN_POSITIVE);
        let mut smin = f64::INFINITY;
        for &s in &SAMPLE_TIMES {
            let lifted = q.profile.scale((lambda * s).exp());
            let h = lifted.sub(&sys.apply(&q.profile, s)?)?;
            smin = smin.min(h.min_entry() / sup_norm(&lifted).max(f64::MIN_POSITIVE));
        }
        if rmin < -tol * scale || smin < -tol {
            nonnegative = false;
        }
        min_entry = min_entry.min(rmin).min(smin);
        points.push(GridPoint { lambda, resolvent_min: Some(rmin), semigroup_min: Some(smin), notice: None });
    }
    Ok(PositivityReport { points, min_entry, neumann_violation, nonnegative })
}
