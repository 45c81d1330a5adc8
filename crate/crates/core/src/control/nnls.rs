//! Lawson-Hanson active-set nonnegative least squares for small dense problems.

use nalgebra::{DMatrix, DVector};

use crate::linalg;

/// `argmin |A x - b|_2` subject to `x >= 0`.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 10.0 * f64::EPSILON * linalg::max_abs(a).max(1.0) * (a.nrows().max(n) as f64) * b.amax().max(1.0);
    for _ in 0..3 * n.max(1) {
        let w = a.transpose() * (b - a * &x);
        let Some((j, _)) = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .map(|j| (j, w[j]))
            .max_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
        else {
            break;
        };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
            let zs = linalg::pinv(&sub) * b;
            let mut z = DVector::zeros(n);
            for (c, &k) in idx.iter().enumerate() {
                z[k] = zs[c];
            }
            if idx.iter().all(|&k| z[k] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &k in &idx {
                if z[k] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - z[k]));
                }
            }
            x += (&z - &x) * alpha;
            for &k in &idx {
                if x[k] <= tol {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_solution_matches_least_squares() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = nnls(&a, &b);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn clamps_negative_direction() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, -1.0]);
        let x = nnls(&a, &b);
        assert_eq!(x, DVector::from_vec(vec![1.0, 0.0]));
    }

    #[test]
    fn averaging_example() {
        // columns e1, (.5,.5): best nonnegative fit to (0,1) is (0.5,0.5), residual 1/sqrt 2
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 0.5]);
        let b = DVector::from_vec(vec![0.0, 1.0]);
        let x = nnls(&a, &b);
        assert!(x[0].abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!(((&a * &x - &b).norm() - 0.5f64.sqrt()).abs() < 1e-12);
    }
}
