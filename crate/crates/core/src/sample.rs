//! Random inputs for property suites. All generators are driven by a caller-owned RNG
//! so runs are reproducible from a single seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::funcspace::{PiecewisePoly, Poly};

/// Random breakpoints on `[0, 1]` with cells no narrower than `0.2 / cells`.
pub fn random_breaks<R: Rng>(rng: &mut R, cells: usize) -> Vec<f64> {
    loop {
        let mut inner: Vec<f64> = (1..cells).map(|_| rng.random_range(0.0..1.0)).collect();
        inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut breaks = vec![0.0];
        breaks.extend(inner);
        breaks.push(1.0);
        if breaks.windows(2).all(|w| w[1] - w[0] >= 0.2 / cells as f64) {
            return breaks;
        }
    }
}

/// Random piecewise polynomial on `[0, 1]` with coefficients in `[-1, 1]`.
pub fn random_piecewise<R: Rng>(rng: &mut R, dim: usize, cells: usize, degree: usize) -> PiecewisePoly {
    let breaks = random_breaks(rng, cells);
    let polys = (0..cells)
        .map(|_| {
            (0..dim)
                .map(|_| Poly((0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect()))
                .collect()
        })
        .collect();
    PiecewisePoly::new(dim, breaks, polys).expect("valid random function")
}

/// Piecewise polynomial with breakpoints on the 1/16 grid and coefficients in
/// `{-4, ..., 4} / 8`; shifts and restrictions by multiples of 1/16 are exact in
/// floating point for such data.
pub fn dyadic_piecewise<R: Rng>(rng: &mut R, dim: usize, cells: usize, degree: usize) -> PiecewisePoly {
    assert!(cells <= 16);
    let mut grid: Vec<u32> = (1..16).collect();
    for i in (1..grid.len()).rev() {
        let j = rng.random_range(0..=i);
        grid.swap(i, j);
    }
    let mut inner: Vec<u32> = grid[..cells - 1].to_vec();
    inner.sort();
    let mut breaks = vec![0.0];
    breaks.extend(inner.iter().map(|&k| k as f64 / 16.0));
    breaks.push(1.0);
    let polys = (0..cells)
        .map(|_| {
            (0..dim)
                .map(|_| Poly((0..=degree).map(|_| rng.random_range(-4i32..=4) as f64 / 8.0).collect()))
                .collect()
        })
        .collect();
    PiecewisePoly::new(dim, breaks, polys).expect("valid dyadic function")
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Nonnegative matrix where each entry is zero with probability `sparsity`.
pub fn random_nonneg_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, sparsity: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        if rng.random_bool(sparsity) {
            0.0
        } else {
            rng.random_range(0.0..1.0)
        }
    })
}

pub fn random_nonneg_vector<R: Rng>(rng: &mut R, n: usize, sparsity: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| if rng.random_bool(sparsity) { 0.0 } else { rng.random_range(0.0..1.0) })
}

/// Small-integer matrix with entries in `-2..=2`.
pub fn integer_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-2i32..=2) as f64)
}
