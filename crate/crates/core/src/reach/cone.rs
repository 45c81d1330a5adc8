//! Positive reachability: is the cone generated by `{B^k b : k >= 0}` the whole
//! nonnegative orthant?
//!
//! Each axis `e_i` is tested by a phase-1 simplex (Bland's rule) over the normalized
//! generators. An infeasible axis comes with a Farkas certificate `phi` such that
//! `phi . g >= 0` for every generator and `phi . e_i < 0`.
//!
//! For nonnegative data the question is also combinatorial: `e_i` is a nonnegative
//! combination of nonnegative vectors only if one of them is supported on `{i}`
//! alone, and the supports of `B^k b` evolve by boolean matrix products with no
//! cancellation. That support sequence is eventually periodic, which tells whether
//! truncating at `K` generators changes the verdict.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 100_000;
/// Angle change below which the normalized iterates `B^k b` count as converged.
pub const RAY_TOL: f64 = 1e-9;
const RAY_MAX_ITER: usize = 10_000;
const SUPPORT_MAX_STEPS: usize = 1 << 16;
const PERTURBATION: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeOptions {
    /// Number of generators `B^k b`, `k < K`; `None` means `2m`.
    pub k: Option<usize>,
    pub tol: f64,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions { k: None, tol: 1e-9 }
    }
}

/// Outcome of the phase-1 problem `min 1.a` s.t. `G w + a = target`, `w, a >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub objective: f64,
    /// Weights of the generator columns.
    pub weights: Vec<f64>,
    /// Optimal dual `y`; `G^T y <= 0` and `y . target = objective`.
    pub dual: DVector<f64>,
}

/// Phase-1 simplex with Bland's anti-cycling rule. `target` must be nonnegative.
pub fn phase_one(gens: &[DVector<f64>], target: &DVector<f64>) -> LpSolution {
    let m = target.len();
    let n = gens.len();
    let width = n + m + 1;
    let rhs = n + m;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        for (j, g) in gens.iter().enumerate() {
            t[i][j] = g[i];
        }
        t[i][n + i] = 1.0;
        t[i][rhs] = target[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // reduced costs; the last entry holds minus the objective
    let mut r = vec![0.0; width];
    for j in 0..width {
        let col: f64 = (0..m).map(|i| t[i][j]).sum();
        let c = if (n..n + m).contains(&j) { 1.0 } else { 0.0 };
        r[j] = c - col;
    }
    for _ in 0..MAX_PIVOTS {
        let Some(enter) = (0..n + m).find(|&j| r[j] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][enter] > PIVOT_EPS {
                let ratio = t[i][rhs] / t[i][enter];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((k, best)) if ratio < best || (ratio == best && basis[i] < basis[k]) => Some((i, ratio)),
                    keep => keep,
                };
            }
        }
        // the phase-1 objective is bounded below, so an entering column always has a
        // positive entry; guard anyway
        let Some((row, _)) = leave else { break };
        let p = t[row][enter];
        for x in t[row].iter_mut() {
            *x /= p;
        }
        let pivot_row = t[row].clone();
        for (i, ti) in t.iter_mut().enumerate() {
            if i != row && ti[enter] != 0.0 {
                let f = ti[enter];
                for (x, &pr) in ti.iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
            }
        }
        let f = r[enter];
        for (x, &pr) in r.iter_mut().zip(&pivot_row) {
            *x -= f * pr;
        }
        basis[row] = enter;
    }
    let mut weights = vec![0.0; n];
    let mut objective = 0.0;
    for (i, &bj) in basis.iter().enumerate() {
        if bj < n {
            weights[bj] = t[i][rhs].max(0.0);
        } else {
            objective += t[i][rhs];
        }
    }
    let dual = DVector::from_fn(m, |i, _| 1.0 - r[n + i]);
    LpSolution { objective, weights, dual }
}

/// Checks a Farkas certificate: `phi . g >= -tol` for all generators and
/// `phi . target < -tol`.
pub fn verify_certificate(phi: &DVector<f64>, gens: &[DVector<f64>], target: &DVector<f64>, tol: f64) -> bool {
    gens.iter().all(|g| phi.dot(g) >= -tol) && phi.dot(target) < -tol
}

#[derive(Debug, Clone, PartialEq)]
pub enum AxisVerdict {
    /// `e_i = sum weights[k] * g_k` (unnormalized generators, extra ray last).
    Feasible { weights: Vec<f64>, residual: f64 },
    /// Separating functional for `e_i`.
    Separated {
        phi: DVector<f64>,
        /// `-phi . e_i`.
        margin: f64,
        verified: bool,
        /// Certificate from the re-solve with a perturbed axis, when the first one
        /// failed verification.
        perturbed: Option<DVector<f64>>,
    },
}

impl AxisVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, AxisVerdict::Feasible { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    /// `B^k b` for `k < K`.
    pub generators: Vec<DVector<f64>>,
    pub k: usize,
    /// Normalized limit direction of `B^k b`, when it converges.
    pub extra_ray: Option<DVector<f64>>,
    /// Every axis lies in the cone of the `K` generators.
    pub positive_controllable: bool,
    pub axes: Vec<AxisVerdict>,
    /// Verdict after adding the extra ray.
    pub closure_controllable: bool,
    /// Verdict over all `k >= 0`, from the support sequence (`None` if the sequence
    /// did not become periodic within the step budget).
    pub untruncated_controllable: Option<bool>,
    /// First `k` with `supp(B^k b) = {i}` for every axis.
    pub first_axis_hit: Vec<Option<usize>>,
    /// The extra ray or near-zero entries decide at least one axis.
    pub closure_sensitive: bool,
    /// Some axis is only reached by a generator beyond `K`.
    pub truncation_sensitive: bool,
}

fn normalized(gens: &[DVector<f64>]) -> (Vec<DVector<f64>>, Vec<f64>) {
    let mut out = Vec::new();
    let mut scales = Vec::new();
    for g in gens {
        let n = g.norm();
        if n > 0.0 {
            out.push(g / n);
            scales.push(n);
        } else {
            out.push(g.clone());
            scales.push(0.0);
        }
    }
    (out, scales)
}

fn axis(m: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(m);
    e[i] = 1.0;
    e
}

fn solve_axis(gens: &[DVector<f64>], m: usize, i: usize, tol: f64) -> AxisVerdict {
    let (unit, scales) = normalized(gens);
    let usable: Vec<usize> = (0..gens.len()).filter(|&k| scales[k] > 0.0).collect();
    let cols: Vec<DVector<f64>> = usable.iter().map(|&k| unit[k].clone()).collect();
    let target = axis(m, i);
    let sol = phase_one(&cols, &target);
    if sol.objective <= tol {
        let mut weights = vec![0.0; gens.len()];
        let mut combo = DVector::zeros(m);
        for (c, &k) in usable.iter().enumerate() {
            weights[k] = sol.weights[c] / scales[k];
            combo += &gens[k] * weights[k];
        }
        return AxisVerdict::Feasible { weights, residual: (combo - target).norm() };
    }
    let phi = -&sol.dual;
    let verified = verify_certificate(&phi, &cols, &target, tol);
    let perturbed = (!verified).then(|| {
        let shifted = &target + DVector::from_element(m, PERTURBATION);
        -phase_one(&cols, &shifted).dual
    });
    AxisVerdict::Separated { margin: -phi.dot(&target), phi, verified, perturbed }
}

/// Normalized limit of `B^k b / |B^k b|`, if the iterates settle.
pub fn limit_ray(b_mat: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    if linalg::spectral_radius(b_mat) <= 0.0 || b.norm() == 0.0 {
        return None;
    }
    let mut d = b / b.norm();
    for _ in 0..RAY_MAX_ITER {
        let next = b_mat * &d;
        let n = next.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        let next = next / n;
        if (&next - &d).norm() < RAY_TOL {
            return Some(next);
        }
        d = next;
    }
    None
}

/// For each axis, the first `k` with `supp(B^k b) = {i}` over the whole (eventually
/// periodic) support sequence. `None` overall when the budget runs out.
pub fn support_axis_hits(b_mat: &DMatrix<f64>, b: &DVector<f64>) -> Option<Vec<Option<usize>>> {
    let m = b.len();
    let mut hits = vec![None; m];
    let mut seen: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut s: Vec<bool> = b.iter().map(|&x| x != 0.0).collect();
    for k in 0..SUPPORT_MAX_STEPS {
        if seen.insert(s.clone(), k).is_some() {
            return Some(hits);
        }
        if s.iter().filter(|&&x| x).count() == 1 {
            let i = s.iter().position(|&x| x).unwrap();
            hits[i].get_or_insert(k);
        }
        s = (0..m).map(|i| (0..m).any(|j| s[j] && b_mat[(i, j)] != 0.0)).collect();
    }
    None
}

/// Positive-cone verdict for nonnegative `(B, b)`.
pub fn cone_reach(b_mat: &DMatrix<f64>, b: &DVector<f64>, opts: ConeOptions) -> Result<ConeReport> {
    let m = b.len();
    if !b_mat.is_square() || b_mat.nrows() != m {
        return Err(Error::DimensionMismatch { expected: m, found: b_mat.nrows() });
    }
    if let Some(v) = b_mat.iter().chain(b.iter()).copied().find(|&x| x < 0.0) {
        return Err(Error::Negative { what: "cone data".into(), value: v });
    }
    let k = opts.k.unwrap_or(2 * m);
    let mut generators = Vec::with_capacity(k);
    let mut g = b.clone();
    for _ in 0..k {
        let next = b_mat * &g;
        generators.push(g);
        g = next;
    }
    let axes: Vec<AxisVerdict> = (0..m).map(|i| solve_axis(&generators, m, i, opts.tol)).collect();
    let positive_controllable = m > 0 && axes.iter().all(AxisVerdict::is_feasible);

    let extra_ray = limit_ray(b_mat, b);
    let closure_controllable = match &extra_ray {
        Some(ray) if !positive_controllable && m > 0 => {
            let mut with_ray = generators.clone();
            with_ray.push(ray.clone());
            (0..m).all(|i| solve_axis(&with_ray, m, i, opts.tol).is_feasible())
        }
        _ => positive_controllable,
    };

    let hits = support_axis_hits(b_mat, b);
    let first_axis_hit = hits.clone().unwrap_or_else(|| vec![None; m]);
    let untruncated_controllable = hits.as_ref().map(|h| m > 0 && h.iter().all(Option::is_some));
    let support_truncated: Vec<bool> = first_axis_hit.iter().map(|h| h.is_some_and(|k0| k0 < k)).collect();
    let numeric_boundary = axes.iter().zip(&support_truncated).any(|(a, &s)| a.is_feasible() != s);
    let truncation_sensitive = match &hits {
        Some(h) => h.iter().any(|x| x.is_some_and(|k0| k0 >= k)),
        None => true,
    };
    Ok(ConeReport {
        generators,
        k,
        extra_ray,
        positive_controllable,
        axes,
        closure_controllable,
        untruncated_controllable,
        first_axis_hit,
        closure_sensitive: closure_controllable != positive_controllable || numeric_boundary,
        truncation_sensitive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(m: usize, i: usize) -> DVector<f64> {
        axis(m, i)
    }

    #[test]
    fn three_cycle() {
        let p = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let r = cone_reach(&p, &e(3, 0), ConeOptions::default()).unwrap();
        assert!(r.positive_controllable);
        assert_eq!(&r.generators[..3], &[e(3, 0), e(3, 1), e(3, 2)]);
        assert!(r.extra_ray.is_none());
        assert!(!r.closure_sensitive && !r.truncation_sensitive);
    }

    #[test]
    fn averaging_matrix_has_certificate() {
        let a = DMatrix::from_element(2, 2, 0.5);
        let r = cone_reach(&a, &e(2, 0), ConeOptions::default()).unwrap();
        assert!(!r.positive_controllable);
        assert!(r.axes[0].is_feasible());
        match &r.axes[1] {
            AxisVerdict::Separated { phi, verified, margin, .. } => {
                assert!(*verified && *margin > 0.0);
                assert!(phi[0] > 0.0 && phi[1] < 0.0);
                assert!((phi[0] + phi[1]).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(r.untruncated_controllable, Some(false));
    }

    #[test]
    fn zero_direction() {
        let r = cone_reach(&DMatrix::identity(2, 2), &DVector::zeros(2), ConeOptions::default()).unwrap();
        assert!(!r.positive_controllable);
        assert!(r.axes.iter().all(|a| !a.is_feasible()));
    }

    #[test]
    fn negative_data_rejected() {
        let err = cone_reach(&DMatrix::identity(2, 2), &DVector::from_vec(vec![1.0, -1.0]), ConeOptions::default());
        assert!(matches!(err, Err(Error::Negative { .. })));
    }

    #[test]
    fn late_axis_is_truncation_sensitive() {
        // shift chain 1 -> 2 -> 3 -> 4 -> 5: e_5 appears at k = 4
        let mut s = DMatrix::zeros(5, 5);
        for i in 1..5 {
            s[(i, i - 1)] = 1.0;
        }
        let r = cone_reach(&s, &e(5, 0), ConeOptions { k: Some(3), tol: 1e-9 }).unwrap();
        assert!(!r.positive_controllable);
        assert!(r.truncation_sensitive);
        assert_eq!(r.first_axis_hit[4], Some(4));
    }

    #[test]
    fn bland_handles_degenerate_columns() {
        let gens = vec![e(2, 0), e(2, 0), DVector::from_vec(vec![1.0, 1.0]), e(2, 0)];
        let sol = phase_one(&gens, &e(2, 1));
        assert!(sol.objective > 0.5);
        assert!(verify_certificate(&-sol.dual, &gens, &e(2, 1), 1e-12));
    }

    proptest! {
        #[test]
        fn negative_verdicts_ship_certificates(seed in any::<u64>(), m in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b_mat = sample::random_nonneg_matrix(&mut rng, m, m, 0.5);
            let b = sample::random_nonneg_vector(&mut rng, m, 0.5);
            let r = cone_reach(&b_mat, &b, ConeOptions::default()).unwrap();
            let (unit, _) = normalized(&r.generators);
            for (i, a) in r.axes.iter().enumerate() {
                match a {
                    AxisVerdict::Separated { phi, verified, perturbed, .. } => {
                        let ok = *verified || perturbed.as_ref().is_some_and(|p| verify_certificate(p, &unit, &e(m, i), 1e-12));
                        prop_assert!(ok || verify_certificate(phi, &unit, &e(m, i), 1e-12));
                    }
                    AxisVerdict::Feasible { residual, weights } => {
                        prop_assert!(*residual <= 1e-6);
                        prop_assert!(weights.iter().all(|&w| w >= 0.0));
                    }
                }
            }
        }

        #[test]
        fn more_generators_keep_feasibility(seed in any::<u64>(), m in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b_mat = sample::random_nonneg_matrix(&mut rng, m, m, 0.6);
            let b = sample::random_nonneg_vector(&mut rng, m, 0.3);
            let k = 2 * m;
            let small = cone_reach(&b_mat, &b, ConeOptions { k: Some(k), tol: 1e-9 }).unwrap();
            let large = cone_reach(&b_mat, &b, ConeOptions { k: Some(k + 1), tol: 1e-9 }).unwrap();
            for (a, b) in small.axes.iter().zip(&large.axes) {
                prop_assert!(!a.is_feasible() || b.is_feasible());
            }
        }
    }
}
