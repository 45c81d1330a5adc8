//! Seeded invariant suites, runnable from the command line.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::control::{
    controllability_map_dynamic, controllability_map_static, controllability_map_static_semigroup, simulate_static,
    synthesize, verify_closed_loop, verify_dynamic, ControlSignal, StepperOptions,
};
use crate::error::Result;
use crate::funcspace::{lp_norm, ExtendedState, LpNorm, PiecewisePoly};
use crate::linalg;
use crate::network::{build_matrices, random_network, validate_relations, Mode};
use crate::reach::{cone_reach, cone, krylov_reach, AxisVerdict, ConeOptions};
use crate::sample;
use crate::semigroup::{default_lambda, DynamicSystem, StaticSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Fewer cases per suite.
    pub quick: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual seen (errors count as infinite).
    pub worst: f64,
    pub tol: f64,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn run_suite<F>(name: &'static str, cases: usize, tol: f64, rng: &mut ChaCha8Rng, mut case: F) -> SuiteResult
where
    F: FnMut(&mut ChaCha8Rng) -> Result<f64>,
{
    let mut res = SuiteResult { name, cases, failures: 0, worst: 0.0, tol, first_failure: None };
    for i in 0..cases {
        let (value, msg) = match case(rng) {
            Ok(r) => (r, format!("case {i}: residual {r:e}")),
            Err(e) => (f64::INFINITY, format!("case {i}: {e}")),
        };
        res.worst = res.worst.max(value);
        if !(value <= tol) {
            res.failures += 1;
            res.first_failure.get_or_insert(msg);
        }
    }
    res
}

/// A control on `[0, n]` with random cells and polynomial pieces.
pub fn random_control<R: Rng>(rng: &mut R, n: usize, cells: usize, degree: usize) -> ControlSignal {
    let f = sample::random_piecewise(rng, 1, cells, degree);
    let breaks = f.breakpoints().iter().map(|x| x * n as f64).collect();
    ControlSignal::new(PiecewisePoly::new(1, breaks, f.cells().to_vec()).expect("scaled breakpoints stay valid"))
        .expect("scalar control")
}

fn dyadic_time<R: Rng>(rng: &mut R, max_units: u32) -> f64 {
    rng.random_range(0..=16 * max_units) as f64 / 16.0
}

pub fn run_selftest(opts: SelftestOptions) -> Vec<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = |full: usize| if opts.quick { (full / 5).max(3) } else { full };
    let mut out = Vec::new();

    out.push(run_suite("graph-relations", scale(100), 1e-12, &mut rng, |rng| {
        let n = rng.random_range(1..=8);
        let m = rng.random_range(n..=16);
        let spec = random_network(rng, n, m);
        let mut worst: f64 = 0.0;
        for mode in [Mode::Static, Mode::Dynamic] {
            worst = worst.max(validate_relations(&build_matrices(&spec, mode)?, 1e-12).max_residual());
        }
        Ok(worst)
    }));

    out.push(run_suite("static-semigroup-law", scale(50), 0.0, &mut rng, |rng| {
        let m = rng.random_range(1..=4);
        let sys = StaticSystem::new(sample::integer_matrix(rng, m, m), DVector::zeros(m))?;
        let f = sample::dyadic_piecewise(rng, m, 3, 3);
        let (t, s) = (dyadic_time(rng, 2), dyadic_time(rng, 2));
        let two = sys.apply(&sys.apply(&f, s)?, t)?;
        let one = sys.apply(&f, t + s)?;
        let unit = sys.apply(&f, 1.0)?.coefficient_distance(&f.matrix_apply(&sys.b_mat)?)?;
        Ok(two.coefficient_distance(&one)?.max(unit))
    }));

    out.push(run_suite("dynamic-semigroup-law", scale(30), 1e-10, &mut rng, |rng| {
        let n = rng.random_range(1..=4);
        let m = rng.random_range(n..=6);
        let sys = DynamicSystem::new(build_matrices(&random_network(rng, n, m), Mode::Dynamic)?, 0)?;
        let x = ExtendedState::new(sample::random_piecewise(rng, m, 3, 2), sample::random_vector(rng, n));
        let (t, s) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let two = sys.apply_long(&sys.apply_long(&x, s)?, t)?;
        let one = sys.apply_long(&x, t + s)?;
        Ok(two.sub(&one)?.norm(LpNorm::Inf))
    }));

    out.push(run_suite("admissibility-identity", scale(40), 1e-9, &mut rng, |rng| {
        let m = rng.random_range(1..=4);
        let b_mat = sample::random_matrix(rng, m, m);
        let b = sample::random_vector(rng, m);
        let sys = StaticSystem::new(b_mat, b)?;
        let lambda = default_lambda(&sys.b_mat) + rng.random_range(0.0..1.0);
        let alpha = rng.random_range(0.0..1.0);
        let beta = rng.random_range(alpha..=1.0);
        Ok(sys.admissibility_check(lambda, alpha, beta, rng.random_range(-2.0..2.0))?.residual)
    }));

    out.push(run_suite("krylov-structure", scale(100), 1e-12, &mut rng, |rng| {
        let m = rng.random_range(1..=6);
        let b_mat = sample::integer_matrix(rng, m, m);
        let b = sample::integer_matrix(rng, m, 1).column(0).into_owned();
        let r = krylov_reach(&b_mat, &b)?;
        let mut bad = if r.l <= r.minpoly_degree && r.minpoly_degree <= m { 0.0 } else { 1.0 };
        let mut cols = vec![b.clone()];
        for k in 1..=r.minpoly_degree + 1 {
            cols.push(&b_mat * &cols[k - 1]);
        }
        if linalg::rank(&linalg::columns_to_matrix(m, &cols)) != r.l {
            bad = 1.0;
        }
        Ok(r.gram_residual().max(bad))
    }));

    out.push(run_suite("farkas-certificates", scale(100), 1e-9, &mut rng, |rng| {
        let m = rng.random_range(1..=4);
        let b_mat = sample::random_nonneg_matrix(rng, m, m, 0.5);
        let b = sample::random_nonneg_vector(rng, m, 0.4);
        let r = cone_reach(&b_mat, &b, ConeOptions::default())?;
        let unit: Vec<DVector<f64>> =
            r.generators.iter().filter(|g| g.norm() > 0.0).map(|g| g / g.norm()).collect();
        let mut worst: f64 = 0.0;
        for (i, a) in r.axes.iter().enumerate() {
            let mut e = DVector::zeros(m);
            e[i] = 1.0;
            match a {
                AxisVerdict::Separated { phi, perturbed, .. } => {
                    let ok = cone::verify_certificate(phi, &unit, &e, 1e-12)
                        || perturbed.as_ref().is_some_and(|p| cone::verify_certificate(p, &unit, &e, 1e-12));
                    if !ok {
                        worst = f64::INFINITY;
                    }
                }
                // the simplex solves with normalized columns; allow for the rescaling
                AxisVerdict::Feasible { residual, .. } if *residual > 1e-6 => worst = f64::INFINITY,
                AxisVerdict::Feasible { .. } => {}
            }
        }
        Ok(worst)
    }));

    out.push(run_suite("closed-loop-steering", scale(20), 1e-8, &mut rng, |rng| {
        let m = rng.random_range(1..=6);
        let (sys, _) = random_controllable(rng, m);
        let target = sample::random_piecewise(rng, m, 3, 2);
        let r = synthesize(&sys, &target, m, 1e-8)?;
        let v = verify_closed_loop(&sys, &r, Some(&target), 1e-8)?;
        Ok(v.sim_vs_target.unwrap_or(f64::INFINITY).max(v.sim_vs_predicted))
    }));

    out.push(run_suite("map-consistency", scale(30), 1e-10, &mut rng, |rng| {
        let m = rng.random_range(1..=5);
        let n = rng.random_range(1..=4);
        let sys = StaticSystem::new(sample::random_matrix(rng, m, m), sample::random_vector(rng, m))?;
        let u = random_control(rng, n, 5, 2);
        let direct = controllability_map_static(&sys, &u)?;
        let horner = controllability_map_static_semigroup(&sys, &u)?;
        Ok(lp_norm(&direct.sub(&horner)?, LpNorm::Inf))
    }));

    out.push(run_suite("positive-states", scale(30), 1e-12, &mut rng, |rng| {
        let m = rng.random_range(1..=4);
        let sys = StaticSystem::new(
            sample::random_nonneg_matrix(rng, m, m, 0.4),
            sample::random_nonneg_vector(rng, m, 0.3),
        )?;
        let n = rng.random_range(1..=4);
        let u = random_control(rng, n, 4, 2);
        let shift = u.min().min(0.0);
        let u = ControlSignal::new(u.u.add_constant(&DVector::from_element(1, -shift))?)?;
        let sim = simulate_static(&sys, &u, None, StepperOptions::default())?;
        Ok((-sim.min_entry(8)).max(0.0))
    }));

    out.push(run_suite("dynamic-closed-form", scale(20), 1e-10, &mut rng, |rng| {
        let n = rng.random_range(1..=3);
        let m = rng.random_range(n..=5);
        let vertex = rng.random_range(0..n);
        let sys = DynamicSystem::new(build_matrices(&random_network(rng, n, m), Mode::Dynamic)?, vertex)?;
        let l = rng.random_range(2..=3);
        let u = random_control(rng, l, 4, 2);
        let map = controllability_map_dynamic(&sys, &u)?;
        let sim = verify_dynamic(&sys, &u, &map.state, 1e-10)?;
        Ok(map.cross_check.max(sim.sim_vs_predicted))
    }));

    out
}

/// Random `(B, b)` with a well-conditioned Krylov matrix; returns the system and the
/// reciprocal condition number of `[b, Bb, ..., B^{m-1} b]`.
pub fn random_controllable<R: Rng>(rng: &mut R, m: usize) -> (StaticSystem, f64) {
    loop {
        let b_mat = sample::random_matrix(rng, m, m);
        let b = sample::random_vector(rng, m);
        let mut cols = vec![b.clone()];
        for k in 1..m {
            cols.push(&b_mat * &cols[k - 1]);
        }
        let sv = linalg::columns_to_matrix(m, &cols).singular_values();
        let rcond = sv.min() / sv.max();
        if rcond > 1e-4 {
            let sys = StaticSystem::new(b_mat, b).expect("square system");
            return (sys, rcond);
        }
    }
}

/// Summary line per suite.
pub fn summary(results: &[SuiteResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&format!(
            "{} {}: {} cases, {} failures, worst {:e} (tol {:e})\n",
            if r.passed() { "PASS" } else { "FAIL" },
            r.name,
            r.cases,
            r.failures,
            r.worst,
            r.tol
        ));
        if let Some(f) = &r.first_failure {
            out.push_str(&format!("  first failure: {f}\n"));
        }
    }
    out
}
