//! Certified piecewise-Taylor representation of `s -> exp(lambda s) * w`.

use nalgebra::DVector;

use super::piecewise::{PiecewisePoly, MAX_DEGREE};
use super::poly::Poly;
use crate::error::{Error, Result};

/// Taylor degree used for exponential profiles.
pub const EXP_DEGREE: usize = 16;
/// Default bound on the sup-norm error of an exponential profile.
pub const EXP_TOL: f64 = 1e-14;

/// An exponential profile together with its certified sup-norm error bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpProfile {
    pub profile: PiecewisePoly,
    pub error_bound: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `exp(lambda s) * w` on `[0, 1]`; see [`exp_tensor_on`].
pub fn exp_tensor(lambda: f64, w: &DVector<f64>, degree: usize, tol: f64) -> Result<ExpProfile> {
    exp_tensor_on(0.0, 1.0, lambda, w, degree, tol)
}

/// `exp(lambda s) * w` on `[a, b]` as degree-`degree` Taylor polynomials.
///
/// On a cell of width `h` the Lagrange remainder is bounded by
/// `max|exp(lambda s)| * |lambda h|^(D+1) / (D+1)! * |w|_inf`; the interval is split into
/// equal cells until that bound is at most `tol`.
pub fn exp_tensor_on(
    a: f64,
    b: f64,
    lambda: f64,
    w: &DVector<f64>,
    degree: usize,
    tol: f64,
) -> Result<ExpProfile> {
    if degree > MAX_DEGREE {
        return Err(Error::DegreeCap { degree, cap: MAX_DEGREE });
    }
    if w.is_empty() {
        return Err(Error::InvalidArgument("empty direction vector".into()));
    }
    if !(tol > 0.0) || !(b > a) {
        return Err(Error::InvalidArgument("exp_tensor needs tol > 0 and a < b".into()));
    }
    let wmax = w.amax();
    if lambda == 0.0 || wmax == 0.0 {
        let profile = PiecewisePoly::constant(a, b, w.as_slice());
        return Ok(ExpProfile { profile, error_bound: 0.0 });
    }
    let fact = factorial(degree + 1);
    let bound = |cells: usize| {
        let h = (b - a) / cells as f64;
        let peak = (lambda * a).exp().max((lambda * b).exp());
        peak * (lambda.abs() * h).powi(degree as i32 + 1) / fact * wmax
    };
    let mut cells = 1usize;
    while bound(cells) > tol {
        cells *= 2;
        if cells > 1 << 20 {
            return Err(Error::InvalidArgument(format!(
                "cannot certify exp({lambda} s) to {tol:e} with degree {degree}"
            )));
        }
    }
    let h = (b - a) / cells as f64;
    let mut breaks: Vec<f64> = (0..cells).map(|i| a + h * i as f64).collect();
    breaks.push(b);
    let cell_polys = breaks[..cells]
        .iter()
        .map(|&left| {
            let base = (lambda * left).exp();
            let mut taylor = Vec::with_capacity(degree + 1);
            let mut t = base;
            for j in 0..=degree {
                if j > 0 {
                    t *= lambda / j as f64;
                }
                taylor.push(t);
            }
            w.iter().map(|&wc| Poly(taylor.iter().map(|&c| c * wc).collect())).collect()
        })
        .collect();
    let profile = PiecewisePoly::new(w.len(), breaks, cell_polys)?;
    Ok(ExpProfile { profile, error_bound: bound(cells) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lambda_is_constant() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let p = exp_tensor(0.0, &e1, EXP_DEGREE, EXP_TOL).unwrap();
        assert_eq!(p.profile, PiecewisePoly::constant(0.0, 1.0, &[1.0, 0.0]));
        assert_eq!(p.error_bound, 0.0);
    }

    #[test]
    fn dense_sampling_oracle() {
        let one = DVector::from_vec(vec![1.0]);
        for lambda in [1.0, -3.0, 5.5, -10.0] {
            let p = exp_tensor(lambda, &one, EXP_DEGREE, 1e-12).unwrap();
            assert!(p.error_bound <= 1e-12);
            let err = (0..1000)
                .map(|k| {
                    let s = k as f64 / 999.0;
                    (p.profile.eval(s).unwrap()[0] - (lambda * s).exp()).abs()
                })
                .fold(0.0, f64::max);
            let scale = lambda.exp().max(1.0);
            assert!(err <= 1e-12 + 4.0 * f64::EPSILON * scale, "lambda {lambda}: {err:e}");
        }
    }

    #[test]
    fn tensor_structure() {
        let scalar = exp_tensor(-3.0, &DVector::from_vec(vec![1.0]), EXP_DEGREE, EXP_TOL).unwrap();
        let vec2 = exp_tensor(-3.0, &DVector::from_vec(vec![1.0, 2.0]), EXP_DEGREE, EXP_TOL).unwrap();
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let base = scalar.profile.eval(s).unwrap()[0];
            let v = vec2.profile.eval(s).unwrap();
            assert!((v[0] - base).abs() < 1e-14);
            assert!((v[1] - 2.0 * base).abs() < 2e-14);
        }
    }
}
