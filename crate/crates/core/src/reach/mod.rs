//! Reachability spaces and verdicts.
//!
//! For the static transport system the exact reachability space at time `t >= m` is
//! `L^p[0,1] (x) span{b, Bb, ..., B^{m-1} b}`, so exact controllability reduces to a
//! Kalman rank test. Positive controllability asks whether the convex cone generated by
//! `{B^k b}` is the whole nonnegative orthant; see [`cone`].

pub mod cone;
pub mod positivity;

use nalgebra::{DMatrix, DVector};

pub use cone::{cone_reach, AxisVerdict, ConeOptions, ConeReport, LpSolution};
pub use positivity::{positivity_preservation_check, GridPoint, PositivityReport};

use crate::error::{Error, Result};
use crate::funcspace::{lp_norm, LpNorm, PiecewisePoly};
use crate::linalg;
use crate::network::GraphMatrices;
use crate::semigroup::DynamicSystem;

/// Default membership tolerance (L2).
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ReachReport {
    /// Orthonormal basis of `span{b, Bb, ...}` (m x l).
    pub basis: DMatrix<f64>,
    pub l: usize,
    /// Degree of the minimal polynomial of `B`.
    pub minpoly_degree: usize,
    pub exact_controllable: bool,
    /// Time after which the reachable space no longer grows.
    pub horizon: usize,
}

impl ReachReport {
    pub fn m(&self) -> usize {
        self.basis.nrows()
    }

    /// `max |Q^T Q - I|`.
    pub fn gram_residual(&self) -> f64 {
        let l = self.basis.ncols();
        linalg::max_abs(&(self.basis.transpose() * &self.basis - DMatrix::identity(l, l)))
    }
}

fn check_square(b_mat: &DMatrix<f64>, b: &DVector<f64>) -> Result<()> {
    if !b_mat.is_square() {
        return Err(Error::DimensionMismatch { expected: b_mat.nrows(), found: b_mat.ncols() });
    }
    if b.len() != b_mat.nrows() {
        return Err(Error::DimensionMismatch { expected: b_mat.nrows(), found: b.len() });
    }
    Ok(())
}

/// Degree of the minimal polynomial of `a`: the dimension of `span{I, a, a^2, ...}`,
/// found by the same Arnoldi routine acting on vectorized matrices.
pub fn minpoly_degree(a: &DMatrix<f64>) -> usize {
    let m = a.nrows();
    if m == 0 {
        return 0;
    }
    let id = DMatrix::<f64>::identity(m, m);
    let start = DVector::from_column_slice(id.as_slice());
    linalg::krylov_basis(&start, m + 1, |x| {
        let xm = DMatrix::from_column_slice(m, m, x.as_slice());
        DVector::from_column_slice((a * xm).as_slice())
    })
    .len()
}

/// Krylov space `span{b, Bb, ..., B^{m-1} b}` and the Kalman verdict.
pub fn krylov_reach(b_mat: &DMatrix<f64>, b: &DVector<f64>) -> Result<ReachReport> {
    check_square(b_mat, b)?;
    let m = b.len();
    let cols = linalg::krylov_basis(b, m, |q| b_mat * q);
    let l = cols.len();
    let minpoly = minpoly_degree(b_mat).max(l);
    Ok(ReachReport {
        basis: linalg::columns_to_matrix(m, &cols),
        l,
        minpoly_degree: minpoly,
        exact_controllable: m > 0 && l == m,
        horizon: minpoly,
    })
}

/// Edge and vertex forms of the network reachability space.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkReach {
    /// `span{Psi v, B Psi v, ...}` on the edges.
    pub edge: ReachReport,
    /// Orthonormal basis of `span{v, A v, ...}` on the vertices.
    pub vertex_basis: DMatrix<f64>,
    /// Largest principal-angle sine between `Psi * vertex span` and the edge span.
    pub principal_angle: f64,
    /// `min{m, n}`.
    pub horizon: usize,
}

/// Reachability of the network flow controlled in `vertex` (0-based).
pub fn network_reach(mats: &GraphMatrices, vertex: usize) -> Result<NetworkReach> {
    let b = mats.control_direction(vertex)?;
    let (m, n) = (mats.m(), mats.n());
    let mut edge = krylov_reach(&mats.b, &b)?;
    let horizon = m.min(n);
    edge.horizon = horizon;
    let mut ev = DVector::zeros(n);
    ev[vertex] = 1.0;
    let vcols = linalg::krylov_basis(&ev, n, |q| &mats.a * q);
    let vertex_basis = linalg::columns_to_matrix(n, &vcols);
    let lifted = linalg::orthonormal_range(&(&mats.psi * &vertex_basis));
    let principal_angle = linalg::subspace_distance(&lifted, &edge.basis);
    Ok(NetworkReach { edge, vertex_basis, principal_angle, horizon })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `|f - P f|_p` with `P` the pointwise orthogonal projector.
    pub residual: f64,
    /// Coefficients of `f` in the orthonormal basis (`None` for an empty basis).
    pub coefficients: Option<PiecewisePoly>,
    pub projection: PiecewisePoly,
}

/// Tests `f` against `L^p (x) span(rep.basis)` by pointwise orthogonal projection.
pub fn membership_exact(f: &PiecewisePoly, rep: &ReachReport, p: LpNorm, tol: f64) -> Result<Membership> {
    let m = rep.m();
    if f.dim() != m {
        return Err(Error::DimensionMismatch { expected: m, found: f.dim() });
    }
    let (coefficients, projection) = if rep.l == 0 {
        let (a, b) = f.domain();
        (None, PiecewisePoly::zero(m, a, b).refine(f.breakpoints()))
    } else {
        let c = f.matrix_apply(&rep.basis.transpose())?;
        let proj = c.matrix_apply(&rep.basis)?;
        (Some(c), proj)
    };
    let residual = lp_norm(&f.sub(&projection)?, p);
    Ok(Membership { member: residual <= tol, residual, coefficients, projection })
}

/// Graded description of the reachable space under dynamic vertex conditions: the
/// `k`-th Krylov direction `B^k Psi v` carries coefficients of Sobolev grade `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicReachStructure {
    /// `B^k Psi v` for `k < l`.
    pub directions: Vec<DVector<f64>>,
    pub grades: Vec<usize>,
    /// Orthonormal basis of the approximate reachability factor.
    pub report: ReachReport,
}

pub fn dynamic_reach_structure(sys: &DynamicSystem) -> Result<DynamicReachStructure> {
    let b = sys.control_direction();
    let report = krylov_reach(&sys.mats.b, &b)?;
    let mut directions = Vec::with_capacity(report.l);
    let mut d = b;
    for _ in 0..report.l {
        let next = &sys.mats.b * &d;
        directions.push(d);
        d = next;
    }
    let grades = (0..report.l).collect();
    Ok(DynamicReachStructure { directions, grades, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::Poly;
    use crate::network::{build_matrices, parse_network, Mode};
    use crate::sample;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn swap() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn e(m: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(m);
        v[i] = 1.0;
        v
    }

    #[test]
    fn swap_is_controllable() {
        let r = krylov_reach(&swap(), &e(2, 0)).unwrap();
        assert_eq!(r.l, 2);
        assert!(r.exact_controllable);
        assert_eq!(r.minpoly_degree, 2);
    }

    #[test]
    fn identity_is_not() {
        let r = krylov_reach(&DMatrix::identity(2, 2), &e(2, 0)).unwrap();
        assert_eq!(r.l, 1);
        assert!(!r.exact_controllable);
        assert_eq!(r.minpoly_degree, 1);
    }

    #[test]
    fn zero_direction() {
        let r = krylov_reach(&swap(), &DVector::zeros(2)).unwrap();
        assert_eq!(r.l, 0);
        assert!(!r.exact_controllable);
    }

    #[test]
    fn companion_matrices_are_cyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = rand::Rng::random_range(&mut rng, 2..=6);
            let coeffs = sample::random_vector(&mut rng, m);
            let mut c = DMatrix::zeros(m, m);
            for i in 1..m {
                c[(i, i - 1)] = 1.0;
            }
            for i in 0..m {
                c[(i, m - 1)] = -coeffs[i];
            }
            let r = krylov_reach(&c, &e(m, 0)).unwrap();
            assert_eq!(r.l, m);
            assert_eq!(r.minpoly_degree, m);
        }
    }

    #[test]
    fn two_cycle_network() {
        let spec = parse_network("vertices: 2\nedge: e1 1 2 1\nedge: e2 2 1 1\n").unwrap();
        let mats = build_matrices(&spec, Mode::Static).unwrap();
        let r = network_reach(&mats, 0).unwrap();
        assert!(r.edge.exact_controllable);
        assert!(r.principal_angle <= 1e-10);
    }

    #[test]
    fn disjoint_loops() {
        let spec = parse_network("vertices: 2\nedge: a 1 1 1\nedge: b 2 2 1\n").unwrap();
        let mats = build_matrices(&spec, Mode::Static).unwrap();
        let r = network_reach(&mats, 0).unwrap();
        assert_eq!(r.edge.l, 1);
        assert!(!r.edge.exact_controllable);
    }

    #[test]
    fn star_network() {
        let spec = parse_network(
            "vertices: 4\nedge: o1 1 2 0.5\nedge: o2 1 3 0.25\nedge: o3 1 4 0.25\n\
             edge: r1 2 1 1\nedge: r2 3 1 1\nedge: r3 4 1 1\n",
        )
        .unwrap();
        let mats = build_matrices(&spec, Mode::Static).unwrap();
        let r = network_reach(&mats, 0).unwrap();
        assert!(r.edge.l <= r.horizon);
        assert_eq!(r.edge.l, linalg::rank(&krylov_matrix(&mats.b, &mats.psi.column(0).into_owned())));
        assert!(r.principal_angle <= 1e-10);
    }

    fn krylov_matrix(b_mat: &DMatrix<f64>, b: &DVector<f64>) -> DMatrix<f64> {
        let m = b.len();
        let mut cols = vec![b.clone()];
        for k in 1..m {
            cols.push(b_mat * &cols[k - 1]);
        }
        linalg::columns_to_matrix(m, &cols)
    }

    #[test]
    fn membership_examples() {
        let f = PiecewisePoly::single(0.0, 1.0, vec![Poly(vec![0.0, 1.0]), Poly(vec![1.0, -1.0])]);
        let full = krylov_reach(&swap(), &e(2, 0)).unwrap();
        let mem = membership_exact(&f, &full, LpNorm::L2, MEMBERSHIP_TOL).unwrap();
        assert!(mem.member);
        assert_eq!(mem.residual, 0.0);
        assert!(mem.coefficients.unwrap().coefficient_distance(&f).unwrap() < 1e-15);

        let id = krylov_reach(&DMatrix::identity(2, 2), &e(2, 0)).unwrap();
        let g = PiecewisePoly::constant(0.0, 1.0, &[0.0, 1.0]);
        let mem = membership_exact(&g, &id, LpNorm::L2, MEMBERSHIP_TOL).unwrap();
        assert!(!mem.member);
        assert!((mem.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dynamic_structure() {
        let spec = parse_network("vertices: 2\nedge: e1 1 2 1\nedge: e2 2 1 1\n").unwrap();
        let sys = DynamicSystem::new(build_matrices(&spec, Mode::Dynamic).unwrap(), 0).unwrap();
        let s = dynamic_reach_structure(&sys).unwrap();
        assert_eq!(s.grades, vec![0, 1]);
        assert_eq!(s.directions[1], &sys.mats.b * sys.control_direction());

        let spec = parse_network("vertices: 1\nedge: a 1 1 1\n").unwrap();
        let sys = DynamicSystem::new(build_matrices(&spec, Mode::Dynamic).unwrap(), 0).unwrap();
        assert_eq!(dynamic_reach_structure(&sys).unwrap().grades, vec![0]);
    }

    proptest! {
        #[test]
        fn basis_is_orthonormal_and_stable(seed in any::<u64>(), m in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b_mat = sample::integer_matrix(&mut rng, m, m);
            let b = sample::random_vector(&mut rng, m);
            let r = krylov_reach(&b_mat, &b).unwrap();
            prop_assert!(r.gram_residual() <= 1e-12);
            prop_assert!(r.l <= r.minpoly_degree && r.minpoly_degree <= m);
            // the span no longer grows past the minimal-polynomial degree
            let mut cols = vec![b.clone()];
            for k in 1..=(r.minpoly_degree + 2) {
                cols.push(&b_mat * &cols[k - 1]);
            }
            let grown = linalg::orthonormal_range(&linalg::columns_to_matrix(m, &cols));
            prop_assert_eq!(grown.ncols(), r.l);
        }

        #[test]
        fn projection_is_idempotent(seed in any::<u64>(), m in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b_mat = sample::random_matrix(&mut rng, m, m);
            let b = sample::random_vector(&mut rng, m);
            let r = krylov_reach(&b_mat, &b).unwrap();
            let f = sample::random_piecewise(&mut rng, m, 3, 2);
            let p = membership_exact(&f, &r, LpNorm::L2, MEMBERSHIP_TOL).unwrap().projection;
            let again = membership_exact(&p, &r, LpNorm::L2, MEMBERSHIP_TOL).unwrap();
            prop_assert!(again.member && again.residual <= 1e-12);
        }

        #[test]
        fn network_forms_agree(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rand::Rng::random_range(&mut rng, 1..=5);
            let m = rand::Rng::random_range(&mut rng, n..=9);
            let spec = crate::network::random_network(&mut rng, n, m);
            for mode in [Mode::Static, Mode::Dynamic] {
                let mats = build_matrices(&spec, mode).unwrap();
                let r = network_reach(&mats, 0).unwrap();
                prop_assert!(r.principal_angle <= 1e-10, "{}", r.principal_angle);
                prop_assert!(r.edge.l <= r.horizon);
            }
        }
    }
}
