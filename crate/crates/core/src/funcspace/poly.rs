//! Dense real polynomials in a local variable `x` (monomial basis).

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn zero() -> Self {
        Poly(vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Degree ignoring trailing exact zeros (the zero polynomial has degree 0).
    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn trimmed(&self) -> Poly {
        Poly(self.0[..=self.degree()].to_vec())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.0.len().max(other.0.len());
        Poly(
            (0..len)
                .map(|i| self.0.get(i).copied().unwrap_or(0.0) + other.0.get(i).copied().unwrap_or(0.0))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Poly {
        Poly(self.0.iter().map(|&x| x * c).collect())
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Poly) -> Poly {
        if c == 0.0 {
            return self.clone();
        }
        self.add(&other.scale(c))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    /// Antiderivative vanishing at `x = 0`.
    pub fn antiderivative(&self) -> Poly {
        let mut out = Vec::with_capacity(self.0.len() + 1);
        out.push(0.0);
        out.extend(self.0.iter().enumerate().map(|(j, &c)| c / (j + 1) as f64));
        Poly(out)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(j, &c)| c * j as f64).collect())
    }

    /// `integral_lo^hi p(x) dx`
    pub fn integrate(&self, lo: f64, hi: f64) -> f64 {
        let a = self.antiderivative();
        a.eval(hi) - a.eval(lo)
    }

    /// Coefficients of `x -> p(x + h)`.
    pub fn taylor_shift(&self, h: f64) -> Poly {
        if h == 0.0 {
            return self.clone();
        }
        let mut c = self.0.clone();
        let n = c.len();
        // repeated synthetic division by (x - (-h))
        for i in 0..n {
            for j in (i..n - 1).rev() {
                c[j] += h * c[j + 1];
            }
        }
        Poly(c)
    }

    /// Real roots in `[lo, hi]`, found by isolating monotone pieces between the roots of
    /// the derivative and bisecting sign changes. The zero polynomial has no roots.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let p = self.trimmed();
        let deg = p.degree();
        if p.is_zero() || deg == 0 {
            return Vec::new();
        }
        if deg == 1 {
            let r = -p.0[0] / p.0[1];
            return if r >= lo && r <= hi { vec![r] } else { Vec::new() };
        }
        let mut pts = vec![lo];
        pts.extend(p.derivative().roots_in(lo, hi));
        pts.push(hi);
        let mut roots: Vec<f64> = Vec::new();
        let push = |r: f64, roots: &mut Vec<f64>| {
            if roots.last().is_none_or(|&last| r > last) {
                roots.push(r);
            }
        };
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (p.eval(a), p.eval(b));
            if fa == 0.0 {
                push(a, &mut roots);
            }
            if fa * fb < 0.0 {
                push(bisect(&p, a, b, fa), &mut roots);
            }
        }
        if p.eval(hi) == 0.0 {
            push(hi, &mut roots);
        }
        roots
    }

    /// Minimum and maximum over `[lo, hi]` (endpoints and critical points).
    pub fn min_max(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut lo_v = self.eval(lo).min(self.eval(hi));
        let mut hi_v = self.eval(lo).max(self.eval(hi));
        for r in self.derivative().roots_in(lo, hi) {
            let v = self.eval(r);
            lo_v = lo_v.min(v);
            hi_v = hi_v.max(v);
        }
        (lo_v, hi_v)
    }
}

fn bisect(p: &Poly, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
