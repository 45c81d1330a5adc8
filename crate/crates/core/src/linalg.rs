//! Dense linear-algebra helpers shared by the graph, semigroup and reachability code.
//!
//! All matrices are small (a few dozen rows at most), so everything here is plain
//! dense `nalgebra` arithmetic.

use nalgebra::{Complex, DMatrix, DVector, Schur};

use crate::error::{Error, Result};

/// Relative singular-value threshold for rank decisions.
pub const RANK_RTOL: f64 = 1e-10;
/// Reciprocal condition number below which a resolvent is treated as singular.
pub const RCOND_MIN: f64 = 1e-12;
/// Minimum distance between a resolvent point and the spectrum.
pub const SPECTRUM_GAP: f64 = 1e-10;

/// Complex eigenvalues via a real Schur form with a bounded iteration count.
///
/// The unshifted QR sweep can stall on permutation-like matrices, so a failed attempt
/// is retried on `a + sigma I` for a few deterministic shifts.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let scale = max_abs(a).max(1.0);
    for sigma in [0.0, 0.31, -0.57, 1.37, -2.9] {
        let shifted = a + DMatrix::identity(n, n) * (sigma * scale);
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 10_000) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| Complex::new(z.re - sigma * scale, z.im))
                .collect();
        }
    }
    panic!("real Schur iteration failed to converge for a {n}x{n} matrix");
}

pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    eigenvalues(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Distance from the real point `mu` to the (complex) spectrum of `a`.
pub fn spectrum_distance(mu: f64, a: &DMatrix<f64>) -> f64 {
    eigenvalues(a)
        .iter()
        .map(|z| ((z.re - mu).powi(2) + z.im.powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

pub fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `R(mu, a) = (mu - a)^{-1}` by LU with partial pivoting.
///
/// Fails when `mu` lies within [`SPECTRUM_GAP`] of the spectrum or the reciprocal
/// condition number of `mu - a` drops below [`RCOND_MIN`].
pub fn resolvent(mu: f64, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let shifted = DMatrix::identity(n, n) * mu - a;
    let distance = spectrum_distance(mu, a);
    let singular = |rcond: f64| Error::Singular { point: mu, distance, rcond };
    if distance < SPECTRUM_GAP {
        return Err(singular(0.0));
    }
    let inv = shifted.clone().lu().try_inverse().ok_or_else(|| singular(0.0))?;
    let rcond = 1.0 / (norm1(&shifted) * norm1(&inv));
    if !rcond.is_finite() || rcond < RCOND_MIN {
        return Err(singular(rcond));
    }
    Ok(inv)
}

pub fn matrix_power(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut p = DMatrix::identity(a.nrows(), a.ncols());
    for _ in 0..k {
        p = a * &p;
    }
    p
}

/// Numerical rank with threshold `RANK_RTOL * sigma_max`.
pub fn rank(a: &DMatrix<f64>) -> usize {
    if a.is_empty() {
        return 0;
    }
    let sv = a.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_RTOL * smax).count()
}

/// Orthonormal basis of the column space (left singular vectors above threshold).
pub fn orthonormal_range(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    if a.ncols() == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("svd computed with u");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > RANK_RTOL * smax)
        .collect();
    DMatrix::from_fn(m, keep.len(), |i, j| u[(i, keep[j])])
}

/// Moore-Penrose pseudoinverse (minimum-norm least squares) with the crate's rank rule.
pub fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(n, m);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u");
    let vt = svd.v_t.as_ref().expect("v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut out = DMatrix::zeros(n, m);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if smax > 0.0 && s > RANK_RTOL * smax {
            out += vt.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    out
}

/// Largest sine of the principal angles between two subspaces given by orthonormal
/// bases. Returns 1 when the dimensions differ.
pub fn subspace_distance(q1: &DMatrix<f64>, q2: &DMatrix<f64>) -> f64 {
    if q1.ncols() != q2.ncols() {
        return 1.0;
    }
    if q1.ncols() == 0 {
        return 0.0;
    }
    let r1 = q1 - q2 * (q2.transpose() * q1);
    let r2 = q2 - q1 * (q1.transpose() * q2);
    let s1 = r1.singular_values().max();
    let s2 = r2.singular_values().max();
    s1.max(s2)
}

/// Arnoldi iteration: orthonormal basis of span{x, L x, L^2 x, ...}.
///
/// A new direction is accepted while its component orthogonal to the current basis
/// exceeds `RANK_RTOL` times the norm of `L q` (classical Gram-Schmidt applied twice).
pub fn krylov_basis<F>(start: &DVector<f64>, max_dim: usize, mut apply: F) -> Vec<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> DVector<f64>,
{
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let nrm = start.norm();
    if nrm == 0.0 || max_dim == 0 {
        return basis;
    }
    basis.push(start / nrm);
    while basis.len() < max_dim {
        let w0 = apply(basis.last().unwrap());
        let scale = w0.norm();
        if scale == 0.0 {
            break;
        }
        let mut w = w0;
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let r = w.norm();
        if r <= RANK_RTOL * scale {
            break;
        }
        basis.push(w / r);
    }
    basis
}

pub fn columns_to_matrix(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

pub fn is_nonnegative(a: &DMatrix<f64>) -> bool {
    a.iter().all(|&x| x >= 0.0)
}
