//! L^p norms of piecewise polynomials with the Euclidean norm on values.

use serde::{Deserialize, Serialize};

use super::piecewise::PiecewisePoly;
use super::poly::Poly;
use crate::quadrature;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpNorm {
    L1,
    L2,
    Inf,
}

impl std::str::FromStr for LpNorm {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "1" => Ok(LpNorm::L1),
            "2" => Ok(LpNorm::L2),
            "inf" | "infinity" => Ok(LpNorm::Inf),
            other => Err(crate::Error::InvalidArgument(format!("unsupported norm `{other}`"))),
        }
    }
}

fn squared_norm_poly(cell: &[Poly]) -> Poly {
    cell.iter().fold(Poly::zero(), |acc, p| acc.add(&p.mul(p)))
}

pub fn lp_norm(f: &PiecewisePoly, p: LpNorm) -> f64 {
    match p {
        LpNorm::L2 => l2_norm(f),
        LpNorm::Inf => sup_norm(f),
        LpNorm::L1 => l1_norm(f),
    }
}

/// Exact: integrates `sum_c p_c^2` cell by cell.
pub fn l2_norm(f: &PiecewisePoly) -> f64 {
    (0..f.num_cells())
        .map(|i| {
            let (lo, hi) = f.cell_bounds(i);
            squared_norm_poly(&f.cells()[i]).integrate(0.0, hi - lo)
        })
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// Maximum of `sum_c p_c^2` over critical points and cell ends.
pub fn sup_norm(f: &PiecewisePoly) -> f64 {
    (0..f.num_cells())
        .map(|i| {
            let (lo, hi) = f.cell_bounds(i);
            squared_norm_poly(&f.cells()[i]).min_max(0.0, hi - lo).1
        })
        .fold(0.0, f64::max)
        .max(0.0)
        .sqrt()
}

/// Scalar functions are integrated exactly between sign changes. For `dim > 1` the
/// Euclidean norm is not polynomial; cells are split at every component root and
/// integrated by composite Gauss-Legendre quadrature.
pub fn l1_norm(f: &PiecewisePoly) -> f64 {
    let rule = quadrature::gauss_legendre(16);
    let mut total = 0.0;
    for i in 0..f.num_cells() {
        let (lo, hi) = f.cell_bounds(i);
        let h = hi - lo;
        let cell = &f.cells()[i];
        let mut pts = vec![0.0];
        for p in cell {
            pts.extend(p.roots_in(0.0, h));
        }
        pts.push(h);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            if f.dim() == 1 {
                total += cell[0].integrate(a, b).abs();
            } else {
                let sq = squared_norm_poly(cell);
                let pieces = 8;
                let step = (b - a) / pieces as f64;
                for k in 0..pieces {
                    let (x0, x1) = (a + step * k as f64, a + step * (k + 1) as f64);
                    total += quadrature::integrate(|x| sq.eval(x).max(0.0).sqrt(), x0, x1, &rule);
                }
            }
        }
    }
    total
}
