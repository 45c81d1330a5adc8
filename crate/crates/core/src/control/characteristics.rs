//! Method-of-characteristics simulation, written independently of the semigroup code.
//!
//! Along characteristics the whole solution is determined by the inflow
//! `h(tau) = x(tau, 1)`, since `x(T, s) = h(T - 1 + s)` for `T >= 1`.
//!
//! * static: `h(tau) = B x(tau, 0) + u(tau) b`
//! * dynamic: `h(tau) = Psi (d(tau) + u(tau) v)` with `d' = Phi_w^+ x(tau, 0)`
//!
//! and `x(tau, 0) = h(tau - 1)` once `tau >= 1`, or the initial profile before that.
//! Time is cut into steps whose endpoints, taken mod 1, contain every breakpoint of
//! the data, so `h` is a polynomial on each step. It is stored by its values at
//! Chebyshev-Lobatto nodes and integrated spectrally.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::funcspace::{ExtendedState, PiecewisePoly, BREAK_EPS};
use crate::quadrature::gauss_legendre;
use crate::semigroup::{DynamicSystem, StaticSystem};

use super::ControlSignal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperOptions {
    /// Uniform sub-steps per unit time on top of the data breakpoints.
    pub substeps: usize,
}

impl Default for StepperOptions {
    fn default() -> Self {
        StepperOptions { substeps: 8 }
    }
}

/// Simulated final state on `[0, 1]`, stored per step at Lobatto nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    grid: Vec<f64>,
    nodes: usize,
    /// `values[a][j]`: value at node `j` of step `a`.
    values: Vec<Vec<DVector<f64>>>,
    /// Vertex component (dynamic systems only).
    pub vertex: Option<DVector<f64>>,
}

impl Simulation {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn eval(&self, s: f64) -> DVector<f64> {
        let a = match self.grid.iter().rposition(|&g| g <= s) {
            Some(a) if a + 1 < self.grid.len() => a,
            Some(_) => self.grid.len() - 2,
            None => 0,
        };
        let (lo, hi) = (self.grid[a], self.grid[a + 1]);
        let x = 2.0 * (s - lo) / (hi - lo) - 1.0;
        lobatto_interpolate(&self.values[a], x)
    }

    /// `(int_0^1 |self - f|^2)^{1/2}` by Gauss-Legendre on every step.
    pub fn l2_distance(&self, f: &PiecewisePoly) -> Result<f64> {
        let mut grid = self.grid.clone();
        grid.extend(f.breakpoints().iter().copied());
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup_by(|a, b| (*a - *b).abs() <= BREAK_EPS);
        let rule = gauss_legendre(self.nodes.max(f.degree() + 1) + 2);
        let mut sum = 0.0;
        for w in grid.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            for (x, wt) in rule.0.iter().zip(&rule.1) {
                let s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
                sum += wt * 0.5 * (hi - lo) * (self.eval(s) - f.eval(s)?).norm_squared();
            }
        }
        Ok(sum.sqrt())
    }

    /// Minimum entry over all stored nodes and `extra` points per step.
    pub fn min_entry(&self, extra: usize) -> f64 {
        let mut m = f64::INFINITY;
        for (a, step) in self.values.iter().enumerate() {
            for v in step {
                m = m.min(v.min());
            }
            let (lo, hi) = (self.grid[a], self.grid[a + 1]);
            for k in 0..extra {
                let s = lo + (hi - lo) * (k as f64 + 0.5) / extra as f64;
                m = m.min(self.eval(s).min());
            }
        }
        if let Some(d) = &self.vertex {
            m = m.min(d.min());
        }
        m
    }
}

/// Lobatto nodes on `[-1, 1]` in increasing order.
fn lobatto_nodes(p: usize) -> Vec<f64> {
    (0..p).map(|j| -(PI * j as f64 / (p - 1) as f64).cos()).collect()
}

fn lobatto_interpolate(values: &[DVector<f64>], x: f64) -> DVector<f64> {
    let p = values.len();
    let nodes = lobatto_nodes(p);
    let mut num = DVector::zeros(values[0].len());
    let mut den = 0.0;
    for j in 0..p {
        let diff = x - nodes[j];
        if diff == 0.0 {
            return values[j].clone();
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == p - 1 {
            w *= 0.5;
        }
        let c = w / diff;
        num += &values[j] * c;
        den += c;
    }
    num / den
}

/// Matrix mapping node values on `[-1, 1]` to `int_{-1}^{x_j}` at every node.
fn integration_matrix(p: usize) -> DMatrix<f64> {
    let n = p - 1;
    let nodes = lobatto_nodes(p);
    let theta = |j: usize| PI * (n - j) as f64 / n as f64; // nodes[j] = cos(theta(j))
    // node values -> Chebyshev coefficients
    let mut to_coef = DMatrix::zeros(p, p);
    for k in 0..p {
        for j in 0..p {
            let mut w = 2.0 / n as f64;
            if j == 0 || j == n {
                w *= 0.5;
            }
            if k == 0 || k == n {
                w *= 0.5;
            }
            to_coef[(k, j)] = w * (k as f64 * theta(j)).cos();
        }
    }
    // antiderivative of T_k, evaluated at the nodes, minus its value at -1
    let t = |k: usize, x: f64| (k as f64 * x.clamp(-1.0, 1.0).acos()).cos();
    let anti = |k: usize, x: f64| match k {
        0 => x,
        1 => 0.5 * x * x,
        _ => 0.5 * (t(k + 1, x) / (k + 1) as f64 - t(k - 1, x) / (k - 1) as f64),
    };
    let mut eval = DMatrix::zeros(p, p);
    for (j, &x) in nodes.iter().enumerate() {
        for k in 0..p {
            eval[(j, k)] = anti(k, x) - anti(k, -1.0);
        }
    }
    eval * to_coef
}

fn unit_grid(points: impl IntoIterator<Item = f64>, substeps: usize) -> Vec<f64> {
    let mut g: Vec<f64> = (0..=substeps.max(1)).map(|k| k as f64 / substeps.max(1) as f64).collect();
    for p in points {
        let f = p - p.floor();
        g.push(f);
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(g.len());
    for x in g {
        if out.last().is_none_or(|&l| x - l > BREAK_EPS) {
            out.push(x);
        }
    }
    if let Some(last) = out.last_mut() {
        if (*last - 1.0).abs() <= BREAK_EPS {
            *last = 1.0;
        } else {
            out.push(1.0);
        }
    }
    out
}

/// Values of `f` at the nodes of the step `[lo, hi]` (one-sided limits at the ends).
fn sample_step(f: &PiecewisePoly, lo: f64, hi: f64, nodes: &[f64]) -> Result<Vec<DVector<f64>>> {
    let mid = 0.5 * (lo + hi);
    let cell = f.cell_index(mid)?;
    let (cl, _) = f.cell_bounds(cell);
    Ok(nodes
        .iter()
        .map(|&x| f.eval_cell(cell, mid + 0.5 * (hi - lo) * x - cl))
        .collect())
}

struct Plan {
    grid: Vec<f64>,
    nodes: Vec<f64>,
    steps: usize,
}

fn plan(u: &ControlSignal, initial: Option<&PiecewisePoly>, extra_degree: usize, opts: StepperOptions) -> Result<Plan> {
    let steps = u.steps()?;
    let mut pts: Vec<f64> = u.u.breakpoints().to_vec();
    let mut degree = u.u.degree();
    if let Some(f0) = initial {
        pts.extend(f0.breakpoints());
        degree = degree.max(f0.degree());
    }
    let grid = unit_grid(pts, opts.substeps);
    let p = degree + extra_degree + 3;
    Ok(Plan { grid, nodes: lobatto_nodes(p), steps })
}

/// Static system from `f0` (zero if `None`) driven by `u` up to its integer horizon.
pub fn simulate_static(
    sys: &StaticSystem,
    u: &ControlSignal,
    f0: Option<&PiecewisePoly>,
    opts: StepperOptions,
) -> Result<Simulation> {
    let m = sys.m();
    if let Some(f) = f0 {
        if f.dim() != m {
            return Err(Error::DimensionMismatch { expected: m, found: f.dim() });
        }
    }
    let plan = plan(u, f0, 0, opts)?;
    let cells = plan.grid.len() - 1;
    // h over the previous unit interval, per step and node
    let mut prev: Vec<Vec<DVector<f64>>> = Vec::with_capacity(cells);
    for unit in 0..plan.steps {
        let mut cur = Vec::with_capacity(cells);
        for a in 0..cells {
            let (lo, hi) = (plan.grid[a], plan.grid[a + 1]);
            let outflow = match (unit, f0) {
                (0, Some(f)) => sample_step(f, lo, hi, &plan.nodes)?,
                (0, None) => vec![DVector::zeros(m); plan.nodes.len()],
                _ => prev[a].clone(),
            };
            let uv = sample_step(&u.u, unit as f64 + lo, unit as f64 + hi, &plan.nodes)?;
            let h: Vec<DVector<f64>> = outflow
                .iter()
                .zip(&uv)
                .map(|(x0, uj)| &sys.b_mat * x0 + &sys.b * uj[0])
                .collect();
            cur.push(h);
        }
        prev = cur;
    }
    Ok(Simulation { grid: plan.grid, nodes: plan.nodes.len(), values: prev, vertex: None })
}

/// Dynamic system from `x0` (zero if `None`) driven by `u` up to its integer horizon.
pub fn simulate_dynamic(
    sys: &DynamicSystem,
    u: &ControlSignal,
    x0: Option<&ExtendedState>,
    opts: StepperOptions,
) -> Result<Simulation> {
    let (m, n) = (sys.m(), sys.n());
    let plan = plan(u, x0.map(|x| &x.f), u.steps()?, opts)?;
    let p = plan.nodes.len();
    let integ = integration_matrix(p);
    let cells = plan.grid.len() - 1;
    let psi = &sys.mats.psi;
    let phi = &sys.mats.phi_plus_w;
    let v = sys.vertex_vector();
    let mut d = x0.map_or_else(|| DVector::zeros(n), |x| x.d.clone());
    let mut prev: Vec<Vec<DVector<f64>>> = Vec::with_capacity(cells);
    for unit in 0..plan.steps {
        let mut cur = Vec::with_capacity(cells);
        for a in 0..cells {
            let (lo, hi) = (plan.grid[a], plan.grid[a + 1]);
            let outflow = match (unit, x0) {
                (0, Some(x)) => sample_step(&x.f, lo, hi, &plan.nodes)?,
                (0, None) => vec![DVector::zeros(m); p],
                _ => prev[a].clone(),
            };
            let uv = sample_step(&u.u, unit as f64 + lo, unit as f64 + hi, &plan.nodes)?;
            let half = 0.5 * (hi - lo);
            let mut h = Vec::with_capacity(p);
            let mut d_node = d.clone();
            for j in 0..p {
                let mut acc = DVector::zeros(m);
                for (k, x0k) in outflow.iter().enumerate() {
                    acc += x0k * (integ[(j, k)] * half);
                }
                d_node = &d + phi * acc;
                h.push(psi * (&d_node + &v * uv[j][0]));
            }
            d = d_node;
            cur.push(h);
        }
        prev = cur;
    }
    Ok(Simulation { grid: plan.grid, nodes: p, values: prev, vertex: Some(d) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::Poly;

    #[test]
    fn integration_matrix_is_exact_on_polynomials() {
        let p = 7;
        let s = integration_matrix(p);
        let nodes = lobatto_nodes(p);
        // f = 3x^4 - x, F = 3/5 (x^5 + 1) - (x^2 - 1)/2
        let f = DVector::from_iterator(p, nodes.iter().map(|x| 3.0 * x.powi(4) - x));
        let got = &s * f;
        for (j, &x) in nodes.iter().enumerate() {
            let want = 0.6 * (x.powi(5) + 1.0) - 0.5 * (x * x - 1.0);
            assert!((got[j] - want).abs() < 1e-13, "{j}");
        }
    }

    #[test]
    fn interpolation_reproduces_polynomial() {
        let nodes = lobatto_nodes(5);
        let vals: Vec<DVector<f64>> = nodes.iter().map(|x| DVector::from_vec(vec![x.powi(3) - 2.0 * x])).collect();
        for x in [-0.9, -0.2, 0.33, 0.8] {
            assert!((lobatto_interpolate(&vals, x)[0] - (x.powi(3) - 2.0 * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn static_ramp_on_two_cycle() {
        let sys = StaticSystem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            DVector::from_vec(vec![1.0, 0.0]),
        )
        .unwrap();
        let u = ControlSignal::new(PiecewisePoly::single(0.0, 2.0, vec![Poly(vec![0.0, 1.0])])).unwrap();
        let sim = simulate_static(&sys, &u, None, StepperOptions::default()).unwrap();
        for s in [0.0, 0.25, 0.6, 1.0] {
            let x = sim.eval(s);
            assert!((x[0] - (1.0 + s)).abs() < 1e-14 && (x[1] - s).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_control_gives_zero() {
        let sys = StaticSystem::new(DMatrix::identity(3, 3), DVector::from_element(3, 1.0)).unwrap();
        let sim = simulate_static(&sys, &ControlSignal::zero(3.0), None, StepperOptions::default()).unwrap();
        assert_eq!(sim.l2_distance(&PiecewisePoly::zero(3, 0.0, 1.0)).unwrap(), 0.0);
    }
}
