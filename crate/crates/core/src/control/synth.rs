//! Steering the static system to a target profile.
//!
//! The final state is `sum_k u_k(s) B^k b`, so a target is matched pointwise by
//! solving `G c(s) = target(s)` with `G = [b, Bb, ..., B^{n-1} b]` and reading the
//! segments `u_k = c_k` back into a control. Unconstrained synthesis uses the
//! minimum-norm least-squares solution; positive synthesis uses nonnegative least
//! squares at collocation nodes.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::funcspace::{l2_norm, ExtendedState, PiecewisePoly, Poly};
use crate::linalg;
use crate::semigroup::{DynamicSystem, StaticSystem};

use super::characteristics::{simulate_dynamic, simulate_static, StepperOptions};
use super::nnls::nnls;
use super::{assemble, controllability_map_static, ControlSignal};

/// Subdivision depth for positive collocation before falling back to linear pieces.
const MAX_SPLIT_DEPTH: usize = 8;
/// Relative slack under which an interpolated coefficient still counts as nonnegative.
const NONNEG_SLACK: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthesisMode {
    Exact,
    LeastSquares,
    Nonnegative,
}

impl std::fmt::Display for SynthesisMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SynthesisMode::Exact => "exact",
            SynthesisMode::LeastSquares => "least-squares",
            SynthesisMode::Nonnegative => "nonnegative",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    pub control: ControlSignal,
    /// `c_k(s)`, one component per generator `B^k b`.
    pub coefficients: PiecewisePoly,
    pub predicted_final: PiecewisePoly,
    /// `|predicted_final - target|_2`.
    pub residual_to_target: f64,
    pub mode: SynthesisMode,
    /// `residual_to_target <= tol`.
    pub reached: bool,
}

fn generators(sys: &StaticSystem, n: usize) -> DMatrix<f64> {
    let mut cols = Vec::with_capacity(n);
    let mut g = sys.b.clone();
    for _ in 0..n {
        let next = &sys.b_mat * &g;
        cols.push(g);
        g = next;
    }
    linalg::columns_to_matrix(sys.m(), &cols)
}

fn check_target(sys: &StaticSystem, target: &PiecewisePoly, n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if target.dim() != sys.m() {
        return Err(Error::DimensionMismatch { expected: sys.m(), found: target.dim() });
    }
    let (a, b) = target.domain();
    if a.abs() > 1e-12 || (b - 1.0).abs() > 1e-12 {
        return Err(Error::DomainMismatch { a0: 0.0, b0: 1.0, a1: a, b1: b });
    }
    Ok(())
}

fn finish(
    sys: &StaticSystem,
    target: &PiecewisePoly,
    coefficients: PiecewisePoly,
    n: usize,
    tol: f64,
    mode: SynthesisMode,
) -> Result<SynthesisResult> {
    let segs = (0..n).map(|k| coefficients.component(k)).collect::<Result<Vec<_>>>()?;
    let control = assemble(&segs)?;
    let predicted_final = controllability_map_static(sys, &control)?;
    let residual_to_target = l2_norm(&predicted_final.sub(target)?);
    let mode = match mode {
        SynthesisMode::Nonnegative => mode,
        _ if residual_to_target <= tol => SynthesisMode::Exact,
        _ => SynthesisMode::LeastSquares,
    };
    Ok(SynthesisResult {
        control,
        coefficients,
        predicted_final,
        residual_to_target,
        mode,
        reached: residual_to_target <= tol,
    })
}

/// Minimum-norm pointwise least-squares control on `[0, n]`.
pub fn synthesize(sys: &StaticSystem, target: &PiecewisePoly, n: usize, tol: f64) -> Result<SynthesisResult> {
    check_target(sys, target, n)?;
    let pinv = linalg::pinv(&generators(sys, n));
    let coefficients = target.matrix_apply(&pinv)?;
    finish(sys, target, coefficients, n, tol, SynthesisMode::Exact)
}

/// Nonnegative control for nonnegative `(B, b, target)`.
pub fn synthesize_positive(sys: &StaticSystem, target: &PiecewisePoly, n: usize, tol: f64) -> Result<SynthesisResult> {
    check_target(sys, target, n)?;
    if let Some(v) = sys.b_mat.iter().chain(sys.b.iter()).copied().find(|&x| x < 0.0) {
        return Err(Error::Negative { what: "system data".into(), value: v });
    }
    let tmin = target.min_entry();
    if tmin < 0.0 {
        return Err(Error::Negative { what: "target".into(), value: tmin });
    }
    let g = generators(sys, n);
    let mut breaks = vec![target.breakpoints()[0]];
    let mut cells = Vec::new();
    for i in 0..target.num_cells() {
        let (lo, hi) = target.cell_bounds(i);
        fit_cell(&g, target, i, lo, hi, 0, &mut breaks, &mut cells)?;
    }
    let coefficients = PiecewisePoly::new(n, breaks, cells)?;
    finish(sys, target, coefficients, n, tol, SynthesisMode::Nonnegative)
}

fn target_at(target: &PiecewisePoly, cell: usize, s: f64) -> DVector<f64> {
    target.eval_cell(cell, s - target.cell_bounds(cell).0)
}

#[allow(clippy::too_many_arguments)]
fn fit_cell(
    g: &DMatrix<f64>,
    target: &PiecewisePoly,
    cell: usize,
    lo: f64,
    hi: f64,
    depth: usize,
    breaks: &mut Vec<f64>,
    cells: &mut Vec<Vec<Poly>>,
) -> Result<()> {
    let n = g.ncols();
    let h = hi - lo;
    let q = target.cell_degree(cell) + 3;
    let ts: Vec<f64> = (0..q)
        .map(|j| 0.5 * (1.0 - (PI * (2 * j + 1) as f64 / (2 * q) as f64).cos()))
        .collect();
    let sols: Vec<DVector<f64>> = ts.iter().map(|&t| nnls(g, &target_at(target, cell, lo + t * h))).collect();
    let vander = DMatrix::from_fn(q, q, |r, c| ts[r].powi(c as i32));
    let lu = vander.lu();
    let mut polys = Vec::with_capacity(n);
    let mut ok = true;
    for k in 0..n {
        let rhs = DVector::from_iterator(q, sols.iter().map(|s| s[k]));
        let Some(a) = lu.solve(&rhs) else {
            ok = false;
            break;
        };
        let mut p = Poly(a.iter().enumerate().map(|(i, &c)| c / h.powi(i as i32)).collect());
        let (min, max) = p.min_max(0.0, h);
        if min < 0.0 {
            if min >= -NONNEG_SLACK * max.abs().max(1.0) {
                p.0[0] -= min;
            } else {
                ok = false;
                break;
            }
        }
        polys.push(p);
    }
    if ok {
        breaks.push(hi);
        cells.push(polys);
        return Ok(());
    }
    if depth < MAX_SPLIT_DEPTH {
        let mid = 0.5 * (lo + hi);
        fit_cell(g, target, cell, lo, mid, depth + 1, breaks, cells)?;
        return fit_cell(g, target, cell, mid, hi, depth + 1, breaks, cells);
    }
    // linear interpolation of the endpoint solutions stays nonnegative
    let a = nnls(g, &target_at(target, cell, lo));
    let b = nnls(g, &target_at(target, cell, hi));
    breaks.push(hi);
    cells.push((0..n).map(|k| Poly(vec![a[k], (b[k] - a[k]) / h])).collect());
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopReport {
    /// L2 distance between the simulated and the predicted final state (for dynamic
    /// systems the larger of the edge distance and the vertex distance).
    pub sim_vs_predicted: f64,
    pub sim_vs_target: Option<f64>,
    /// Smallest simulated entry at the sample points.
    pub min_entry: f64,
    pub passed: bool,
}

/// Re-simulates a static synthesis with the characteristics stepper.
pub fn verify_closed_loop(
    sys: &StaticSystem,
    result: &SynthesisResult,
    target: Option<&PiecewisePoly>,
    tol: f64,
) -> Result<ClosedLoopReport> {
    let sim = simulate_static(sys, &result.control, None, StepperOptions::default())?;
    let sim_vs_predicted = sim.l2_distance(&result.predicted_final)?;
    let sim_vs_target = target.map(|t| sim.l2_distance(t)).transpose()?;
    let passed = sim_vs_predicted <= tol && sim_vs_target.is_none_or(|d| d <= tol);
    Ok(ClosedLoopReport { sim_vs_predicted, sim_vs_target, min_entry: sim.min_entry(4), passed })
}

/// Re-simulates the dynamic system under `u` and compares with `predicted`.
pub fn verify_dynamic(
    sys: &DynamicSystem,
    u: &ControlSignal,
    predicted: &ExtendedState,
    tol: f64,
) -> Result<ClosedLoopReport> {
    let sim = simulate_dynamic(sys, u, None, StepperOptions::default())?;
    let edge = sim.l2_distance(&predicted.f)?;
    let vertex = sim.vertex.as_ref().map_or(0.0, |d| (d - &predicted.d).norm());
    let sim_vs_predicted = edge.max(vertex);
    Ok(ClosedLoopReport {
        sim_vs_predicted,
        sim_vs_target: None,
        min_entry: sim.min_entry(4),
        passed: sim_vs_predicted <= tol,
    })
}
