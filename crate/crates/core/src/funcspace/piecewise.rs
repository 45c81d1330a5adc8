//! Vector-valued piecewise polynomials on a compact interval.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use crate::error::{Error, Result};

/// Overall cap on the per-cell polynomial degree.
pub const MAX_DEGREE: usize = 32;
/// Breakpoints closer than this are identified.
pub const BREAK_EPS: f64 = 1e-12;

/// A function `[a, b] -> R^dim`, polynomial on each cell `[breaks[i], breaks[i+1])`.
///
/// Cell polynomials use the local variable `x = s - breaks[i]`. Evaluation is
/// right-continuous at interior breakpoints and the last cell is closed at `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePoly {
    dim: usize,
    breaks: Vec<f64>,
    cells: Vec<Vec<Poly>>,
}

impl PiecewisePoly {
    pub fn new(dim: usize, breaks: Vec<f64>, cells: Vec<Vec<Poly>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if breaks.len() < 2 || breaks.len() != cells.len() + 1 {
            return Err(Error::Breakpoints(format!(
                "{} breakpoints for {} cells",
                breaks.len(),
                cells.len()
            )));
        }
        if breaks.iter().any(|x| !x.is_finite()) || breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Breakpoints("breakpoints must be finite and strictly increasing".into()));
        }
        for cell in &cells {
            if cell.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: cell.len() });
            }
            for p in cell {
                if p.0.is_empty() {
                    return Err(Error::InvalidArgument("empty coefficient row".into()));
                }
                if p.degree() > MAX_DEGREE {
                    return Err(Error::DegreeCap { degree: p.degree(), cap: MAX_DEGREE });
                }
            }
        }
        Ok(PiecewisePoly { dim, breaks, cells })
    }

    pub fn zero(dim: usize, a: f64, b: f64) -> Self {
        Self::constant(a, b, &vec![0.0; dim])
    }

    pub fn constant(a: f64, b: f64, value: &[f64]) -> Self {
        Self::single(a, b, value.iter().map(|&v| Poly::constant(v)).collect())
    }

    /// One cell on `[a, b]` with the given component polynomials in `x = s - a`.
    pub fn single(a: f64, b: f64, polys: Vec<Poly>) -> Self {
        assert!(b > a && !polys.is_empty(), "invalid single-cell function");
        PiecewisePoly { dim: polys.len(), breaks: vec![a, b], cells: vec![polys] }
    }

    /// `s -> value` on `[lo, hi]` and zero elsewhere in `[a, b]`.
    pub fn indicator(a: f64, b: f64, lo: f64, hi: f64, value: &[f64]) -> Result<Self> {
        Self::constant(a, b, value).mask(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn cells(&self) -> &[Vec<Poly>] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        (self.breaks[i], self.breaks[i + 1])
    }

    /// Maximum effective degree over all cells and components.
    pub fn degree(&self) -> usize {
        self.cells.iter().flatten().map(Poly::degree).max().unwrap_or(0)
    }

    pub fn cell_degree(&self, i: usize) -> usize {
        self.cells[i].iter().map(Poly::degree).max().unwrap_or(0)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    fn check_domain(&self, other: &Self) -> Result<()> {
        let (a0, b0) = self.domain();
        let (a1, b1) = other.domain();
        if (a0 - a1).abs() > BREAK_EPS || (b0 - b1).abs() > BREAK_EPS {
            return Err(Error::DomainMismatch { a0, b0, a1, b1 });
        }
        Ok(())
    }

    /// Index of the cell whose half-open interval contains `s`.
    pub fn cell_index(&self, s: f64) -> Result<usize> {
        let (a, b) = self.domain();
        if !(s >= a - BREAK_EPS && s <= b + BREAK_EPS) {
            return Err(Error::OutOfDomain { s, a, b });
        }
        let interior = &self.breaks[1..self.cells.len()];
        Ok(interior.partition_point(|&x| x <= s))
    }

    pub fn eval(&self, s: f64) -> Result<DVector<f64>> {
        let i = self.cell_index(s)?;
        let x = s - self.breaks[i];
        Ok(DVector::from_iterator(self.dim, self.cells[i].iter().map(|p| p.eval(x))))
    }

    /// Point evaluation at the right end of the domain.
    pub fn eval_at_one(&self) -> DVector<f64> {
        let last = self.cells.len() - 1;
        let x = self.breaks[last + 1] - self.breaks[last];
        DVector::from_iterator(self.dim, self.cells[last].iter().map(|p| p.eval(x)))
    }

    pub fn eval_at_start(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim, self.cells[0].iter().map(|p| p.eval(0.0)))
    }

    /// `s -> integral_a^s f(r) dr`; continuous, zero at `a`, one degree higher per cell.
    pub fn prefix_integral(&self) -> Result<Self> {
        let deg = self.degree() + 1;
        if deg > MAX_DEGREE {
            return Err(Error::DegreeCap { degree: deg, cap: MAX_DEGREE });
        }
        let mut running = vec![0.0; self.dim];
        let mut cells = Vec::with_capacity(self.cells.len());
        for (i, cell) in self.cells.iter().enumerate() {
            let width = self.breaks[i + 1] - self.breaks[i];
            let new_cell: Vec<Poly> = cell
                .iter()
                .zip(&running)
                .map(|(p, &c0)| {
                    let mut q = p.trimmed().antiderivative();
                    q.0[0] = c0;
                    q
                })
                .collect();
            for (r, q) in running.iter_mut().zip(&new_cell) {
                *r = q.eval(width);
            }
            cells.push(new_cell);
        }
        Ok(PiecewisePoly { dim: self.dim, breaks: self.breaks.clone(), cells })
    }

    /// Integral over the whole domain.
    pub fn integral(&self) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim);
        for (i, cell) in self.cells.iter().enumerate() {
            let width = self.breaks[i + 1] - self.breaks[i];
            for (c, p) in cell.iter().enumerate() {
                out[c] += p.integrate(0.0, width);
            }
        }
        out
    }

    /// Cellwise derivative.
    pub fn derivative(&self) -> Self {
        self.map_cells(|p| p.derivative())
    }

    fn map_cells(&self, f: impl Fn(&Poly) -> Poly) -> Self {
        PiecewisePoly {
            dim: self.dim,
            breaks: self.breaks.clone(),
            cells: self.cells.iter().map(|c| c.iter().map(&f).collect()).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_cells(|p| p.scale(c))
    }

    /// Applies `m` to the value at every point (coefficientwise).
    pub fn matrix_apply(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: m.ncols() });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix with no rows".into()));
        }
        let cells = self
            .cells
            .iter()
            .map(|cell| {
                (0..m.nrows())
                    .map(|r| {
                        let mut acc = Poly::zero();
                        for (c, p) in cell.iter().enumerate() {
                            acc = acc.axpy(m[(r, c)], p);
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(PiecewisePoly { dim: m.nrows(), breaks: self.breaks.clone(), cells })
    }

    /// `s -> f(s) * v` for a scalar function `f`.
    pub fn outer(&self, v: &DVector<f64>) -> Result<Self> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim });
        }
        self.matrix_apply(&DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
    }

    pub fn component(&self, c: usize) -> Result<Self> {
        if c >= self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: c + 1 });
        }
        Ok(PiecewisePoly {
            dim: 1,
            breaks: self.breaks.clone(),
            cells: self.cells.iter().map(|cell| vec![cell[c].clone()]).collect(),
        })
    }

    /// Adds the constant vector `v` everywhere.
    pub fn add_constant(&self, v: &DVector<f64>) -> Result<Self> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        let mut out = self.clone();
        for cell in &mut out.cells {
            for (p, &c) in cell.iter_mut().zip(v.iter()) {
                p.0[0] += c;
            }
        }
        Ok(out)
    }

    /// Inserts breakpoints (points outside the domain or within [`BREAK_EPS`] of an
    /// existing breakpoint are ignored).
    pub fn refine(&self, points: &[f64]) -> Self {
        let mut pts: Vec<f64> = points.to_vec();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut breaks = vec![self.breaks[0]];
        let mut cells = Vec::with_capacity(self.cells.len());
        let mut k = 0;
        for (i, cell) in self.cells.iter().enumerate() {
            let (lo, hi) = self.cell_bounds(i);
            while k < pts.len() && pts[k] <= lo + BREAK_EPS {
                k += 1;
            }
            let mut left = lo;
            let mut current = cell.clone();
            while k < pts.len() && pts[k] < hi - BREAK_EPS {
                let p = pts[k];
                if p > left + BREAK_EPS {
                    cells.push(current.clone());
                    breaks.push(p);
                    current = current.iter().map(|q| q.taylor_shift(p - left)).collect();
                    left = p;
                }
                k += 1;
            }
            cells.push(current);
            breaks.push(hi);
        }
        PiecewisePoly { dim: self.dim, breaks, cells }
    }

    /// Both functions on the union of their breakpoints.
    pub fn refine_to_common(f: &Self, g: &Self) -> Result<(Self, Self)> {
        f.check_domain(g)?;
        let f2 = f.refine(&g.breaks);
        let g2 = g.refine(&f2.breaks);
        let f3 = f2.refine(&g2.breaks);
        debug_assert_eq!(f3.cells.len(), g2.cells.len());
        Ok((f3, g2))
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&Poly, &Poly) -> Poly) -> Result<Self> {
        self.check_dim(other)?;
        let (f, g) = Self::refine_to_common(self, other)?;
        if f.cells.len() != g.cells.len() {
            return Err(Error::Breakpoints("could not align breakpoints".into()));
        }
        let cells = f
            .cells
            .iter()
            .zip(&g.cells)
            .map(|(cf, cg)| cf.iter().zip(cg).map(|(p, q)| op(p, q)).collect())
            .collect();
        Ok(PiecewisePoly { dim: self.dim, breaks: f.breaks, cells })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, Poly::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, Poly::sub)
    }

    /// Largest coefficient difference after aligning breakpoints.
    pub fn coefficient_distance(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(d.cells.iter().flatten().flat_map(|p| p.0.iter()).fold(0.0, |m, x| m.max(x.abs())))
    }

    /// Restriction to `[lo, hi]`; the first retained cell is re-expanded at `lo`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let (a, b) = self.domain();
        if !(lo >= a - BREAK_EPS && hi <= b + BREAK_EPS && hi > lo) {
            return Err(Error::Breakpoints(format!("cannot restrict [{a}, {b}] to [{lo}, {hi}]")));
        }
        let nc = self.cells.len();
        let mut start = self.cell_index(lo)?;
        if start + 1 < nc && self.breaks[start + 1] - lo <= BREAK_EPS {
            start += 1;
        }
        let mut end = start;
        while end + 1 < nc && self.breaks[end + 1] < hi - BREAK_EPS {
            end += 1;
        }
        let mut breaks = vec![lo];
        breaks.extend_from_slice(&self.breaks[start + 1..=end]);
        breaks.push(hi);
        let mut cells: Vec<Vec<Poly>> = self.cells[start..=end].to_vec();
        let h = lo - self.breaks[start];
        cells[0] = cells[0].iter().map(|p| p.taylor_shift(h)).collect();
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Breakpoints(format!("degenerate restriction to [{lo}, {hi}]")));
        }
        Ok(PiecewisePoly { dim: self.dim, breaks, cells })
    }

    /// Translates the domain by `delta`: `g(s) = f(s - delta)`.
    pub fn shift(&self, delta: f64) -> Self {
        PiecewisePoly {
            dim: self.dim,
            breaks: self.breaks.iter().map(|x| x + delta).collect(),
            cells: self.cells.clone(),
        }
    }

    /// Appends `other`, whose domain must start where this one ends.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let (_, b) = self.domain();
        let (a2, b2) = other.domain();
        if (b - a2).abs() > BREAK_EPS {
            return Err(Error::DomainMismatch { a0: self.breaks[0], b0: b, a1: a2, b1: b2 });
        }
        let mut breaks = self.breaks.clone();
        breaks.extend_from_slice(&other.breaks[1..]);
        let mut cells = self.cells.clone();
        cells.extend(other.cells.iter().cloned());
        Ok(PiecewisePoly { dim: self.dim, breaks, cells })
    }

    /// Zero outside `[lo, hi]`.
    pub fn mask(&self, lo: f64, hi: f64) -> Result<Self> {
        let mut out = self.refine(&[lo, hi]);
        for i in 0..out.cells.len() {
            let (l, h) = out.cell_bounds(i);
            let mid = 0.5 * (l + h);
            if mid < lo || mid > hi {
                out.cells[i] = vec![Poly::zero(); self.dim];
            }
        }
        Ok(out)
    }

    /// Minimum of component `c` over the domain.
    pub fn component_min(&self, c: usize) -> f64 {
        (0..self.cells.len())
            .map(|i| {
                let (l, h) = self.cell_bounds(i);
                self.cells[i][c].min_max(0.0, h - l).0
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum entry over all components.
    pub fn min_entry(&self) -> f64 {
        (0..self.dim).map(|c| self.component_min(c)).fold(f64::INFINITY, f64::min)
    }

    /// Drops trailing zero coefficients in every row.
    pub fn trimmed(&self) -> Self {
        self.map_cells(Poly::trimmed)
    }

    /// Values of the cell polynomial `i` at local coordinate `x`.
    pub fn eval_cell(&self, i: usize, x: f64) -> DVector<f64> {
        DVector::from_iterator(self.dim, self.cells[i].iter().map(|p| p.eval(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> PiecewisePoly {
        PiecewisePoly::single(0.0, 1.0, vec![Poly(vec![0.0, 1.0])])
    }

    #[test]
    fn eval_ramp() {
        assert_eq!(ramp().eval(0.25).unwrap()[0], 0.25);
        assert!(ramp().eval(1.5).is_err());
    }

    #[test]
    fn indicator_half() {
        let f = PiecewisePoly::indicator(0.0, 1.0, 0.0, 0.5, &[1.0]).unwrap();
        assert_eq!(f.eval(0.75).unwrap()[0], 0.0);
        assert_eq!(f.eval(0.25).unwrap()[0], 1.0);
        // right-continuous at the breakpoint
        assert_eq!(f.eval(0.5).unwrap()[0], 0.0);
    }

    #[test]
    fn prefix_integrals() {
        let one = PiecewisePoly::constant(0.0, 1.0, &[1.0]);
        let v = one.prefix_integral().unwrap();
        assert_eq!(v.cells()[0][0], Poly(vec![0.0, 1.0]));
        let v2 = ramp().prefix_integral().unwrap();
        assert_eq!(v2.cells()[0][0], Poly(vec![0.0, 0.0, 0.5]));
        let half = PiecewisePoly::indicator(0.0, 1.0, 0.5, 1.0, &[1.0]).unwrap();
        let vh = half.prefix_integral().unwrap();
        assert_eq!(vh.eval(0.3).unwrap()[0], 0.0);
        assert!((vh.eval(0.8).unwrap()[0] - 0.3).abs() < 1e-15);
        assert_eq!(vh.eval_at_one()[0], 0.5);
    }

    #[test]
    fn degree_cap_is_an_error() {
        let mut c = vec![0.0; MAX_DEGREE + 1];
        c[MAX_DEGREE] = 1.0;
        let f = PiecewisePoly::single(0.0, 1.0, vec![Poly(c)]);
        assert!(matches!(f.prefix_integral(), Err(Error::DegreeCap { .. })));
    }

    #[test]
    fn swap_components() {
        let f = PiecewisePoly::single(0.0, 1.0, vec![Poly(vec![0.0, 1.0]), Poly(vec![1.0, -1.0])]);
        let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let g = f.matrix_apply(&swap).unwrap();
        assert_eq!(g.cells()[0][0], Poly(vec![1.0, -1.0]));
        assert_eq!(g.cells()[0][1], Poly(vec![0.0, 1.0]));
    }

    #[test]
    fn shifted_ramp() {
        let g = ramp().shift(1.0);
        assert_eq!(g.eval(1.5).unwrap()[0], 0.5);
    }

    #[test]
    fn add_on_mismatched_grids() {
        let f = ramp().refine(&[0.3, 0.6]);
        let g = PiecewisePoly::indicator(0.0, 1.0, 0.45, 1.0, &[2.0]).unwrap();
        let h = f.add(&g).unwrap();
        for k in 0..100 {
            let s = k as f64 / 99.0;
            let want = f.eval(s).unwrap()[0] + g.eval(s).unwrap()[0];
            assert!((h.eval(s).unwrap()[0] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn restrict_and_concat_round_trip() {
        let f = PiecewisePoly::single(0.0, 1.0, vec![Poly(vec![1.0, 2.0, -3.0])]);
        let left = f.restrict(0.0, 0.4).unwrap();
        let right = f.restrict(0.4, 1.0).unwrap();
        let back = left.concat(&right).unwrap();
        assert!(back.coefficient_distance(&f).unwrap() < 1e-15);
    }

    #[test]
    fn restrict_near_breakpoint_skips_sliver() {
        let f = PiecewisePoly::indicator(0.0, 1.0, 0.7000000000000001, 1.0, &[1.0]).unwrap();
        let r = f.restrict(0.7, 1.0).unwrap();
        assert_eq!(r.num_cells(), 1);
        assert_eq!(r.eval(0.7).unwrap()[0], 1.0);
    }
}
