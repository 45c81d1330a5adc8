//! Transport semigroups, Dirichlet profiles and the admissibility identity for the two
//! concrete boundary control systems.
//!
//! *Static* vertex conditions: `x_t = x_s` on `[0, 1]` with `x(t, 1) = B x(t, 0) + u(t) b`.
//! The semigroup shifts the profile to the left and feeds `B` times the outflow back in
//! at `s = 1`:
//!
//! ```text
//! (T(t) f)(s) = B^k f(t + s - k)    for t + s in [k, k + 1)
//! ```
//!
//! *Dynamic* vertex conditions: the state is `(f, d)` with edge profile `f` and vertex
//! values `d`, and for `0 <= t <= 1`
//!
//! ```text
//! [T(t)(f, d)]_1(s) = f(t + s)                       if t + s < 1
//!                   = B V_{t+s-1} f + Psi d          otherwise
//! [T(t)(f, d)]_2    = Phi_w^+ V_t f + d
//! ```
//!
//! where `V_s f` is the prefix integral of `f`. Longer times factor as `T(tau) T(1)^k`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::funcspace::{exp_tensor, sup_norm, ExpProfile, ExtendedState, PiecewisePoly, BREAK_EPS, EXP_DEGREE, EXP_TOL};
use crate::linalg;
use crate::network::{GraphMatrices, Mode};

/// Default resolvent parameter `log(rho(B) + 1) + 1`.
pub fn default_lambda(b_mat: &DMatrix<f64>) -> f64 {
    (linalg::spectral_radius(b_mat) + 1.0).ln() + 1.0
}

/// `log rho(B)`, the growth-bound surrogate used to place lambda grids.
pub fn growth_bound_surrogate(b_mat: &DMatrix<f64>) -> f64 {
    linalg::spectral_radius(b_mat).ln()
}

/// Splits `t >= 0` as `k + tau` with `tau` in `[0, 1)`, snapping values within
/// [`BREAK_EPS`] of an integer.
fn split_time(t: f64) -> (usize, f64) {
    let mut k = t.floor();
    let mut tau = t - k;
    if tau > 1.0 - BREAK_EPS {
        k += 1.0;
        tau = 0.0;
    } else if tau < BREAK_EPS {
        tau = 0.0;
    }
    (k as usize, tau)
}

fn check_unit_domain(f: &PiecewisePoly, dim: usize) -> Result<()> {
    if f.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: f.dim() });
    }
    let (a, b) = f.domain();
    if (a - 0.0).abs() > BREAK_EPS || (b - 1.0).abs() > BREAK_EPS {
        return Err(Error::DomainMismatch { a0: 0.0, b0: 1.0, a1: a, b1: b });
    }
    Ok(())
}

/// Residual of the admissibility identity for one `(lambda, alpha, beta, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityCheck {
    /// Sup-norm of `lhs - rhs`.
    pub residual: f64,
    /// Sup-norm of the right-hand side `M(eps_lambda 1_[alpha, beta] v)`.
    pub rhs_norm: f64,
    /// Certified error bound of the exponential profiles involved.
    pub certification: f64,
}

/// Transport on `R^m` with `x(t, 1) = B x(t, 0) + u(t) b`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticSystem {
    pub b_mat: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl StaticSystem {
    pub fn new(b_mat: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if !b_mat.is_square() {
            return Err(Error::DimensionMismatch { expected: b_mat.nrows(), found: b_mat.ncols() });
        }
        if b.len() != b_mat.nrows() {
            return Err(Error::DimensionMismatch { expected: b_mat.nrows(), found: b.len() });
        }
        Ok(StaticSystem { b_mat, b })
    }

    /// Network flow controlled in `vertex` (0-based): `B` is the line-graph matrix and
    /// `b = Psi e_vertex`.
    pub fn from_network(mats: &GraphMatrices, vertex: usize) -> Result<Self> {
        let b = mats.control_direction(vertex)?;
        Self::new(mats.b.clone(), b)
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    /// `T(t) f`, exact in the polynomial algebra.
    pub fn apply(&self, f: &PiecewisePoly, t: f64) -> Result<PiecewisePoly> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        check_unit_domain(f, self.m())?;
        let (k, tau) = split_time(t);
        let bk = linalg::matrix_power(&self.b_mat, k);
        if tau == 0.0 {
            return f.matrix_apply(&bk);
        }
        let head = f.restrict(tau, 1.0)?.shift(-tau).matrix_apply(&bk)?;
        let bk1 = &self.b_mat * &bk;
        let tail = f.restrict(0.0, tau)?.shift(1.0 - tau).matrix_apply(&bk1)?;
        head.concat(&tail)
    }

    /// `Q_lambda d = eps_lambda (x) R(e^lambda, B) d`.
    pub fn dirichlet(&self, lambda: f64, d: &DVector<f64>) -> Result<ExpProfile> {
        if d.len() != self.m() {
            return Err(Error::DimensionMismatch { expected: self.m(), found: d.len() });
        }
        let r = linalg::resolvent(lambda.exp(), &self.b_mat)?;
        exp_tensor(lambda, &(r * d), EXP_DEGREE, EXP_TOL)
    }

    /// `g(1) - B g(0)`, the boundary operator.
    pub fn boundary(&self, g: &PiecewisePoly) -> DVector<f64> {
        g.eval_at_one() - &self.b_mat * g.eval_at_start()
    }

    /// Compares `(e^{l beta} T(1 - beta) - e^{l alpha} T(1 - alpha)) B_l v` with
    /// `M(eps_l 1_[alpha, beta] v)`, where `(M u)(s) = u(s) b`.
    pub fn admissibility_check(&self, lambda: f64, alpha: f64, beta: f64, v: f64) -> Result<AdmissibilityCheck> {
        check_interval(alpha, beta)?;
        let q = self.dirichlet(lambda, &(&self.b * v))?;
        let lhs = self
            .apply(&q.profile, 1.0 - beta)?
            .scale((lambda * beta).exp())
            .sub(&self.apply(&q.profile, 1.0 - alpha)?.scale((lambda * alpha).exp()))?;
        let e = exp_tensor(lambda, &(&self.b * v), EXP_DEGREE, EXP_TOL)?;
        let rhs = e.profile.mask(alpha, beta)?;
        Ok(AdmissibilityCheck {
            residual: sup_norm(&lhs.sub(&rhs)?),
            rhs_norm: sup_norm(&rhs),
            certification: q.error_bound * (2.0 * lambda.abs()).exp() + e.error_bound,
        })
    }
}

fn check_interval(alpha: f64, beta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) || alpha > beta {
        return Err(Error::InvalidArgument(format!("need 0 <= alpha <= beta <= 1, got [{alpha}, {beta}]")));
    }
    Ok(())
}

/// Network flow with dynamic vertex conditions, controlled in one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicSystem {
    pub mats: GraphMatrices,
    /// Control vertex (0-based).
    pub vertex: usize,
}

impl DynamicSystem {
    pub fn new(mats: GraphMatrices, vertex: usize) -> Result<Self> {
        if mats.mode != Mode::Dynamic {
            return Err(Error::InvalidArgument("dynamic system needs dynamic-mode matrices".into()));
        }
        if vertex >= mats.n() {
            return Err(Error::InvalidVertex { index: vertex + 1, n: mats.n() });
        }
        Ok(DynamicSystem { mats, vertex })
    }

    pub fn m(&self) -> usize {
        self.mats.m()
    }

    pub fn n(&self) -> usize {
        self.mats.n()
    }

    /// The control vertex as a canonical basis vector of `R^n`.
    pub fn vertex_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.n());
        v[self.vertex] = 1.0;
        v
    }

    /// `Psi v`, the edge direction of the control.
    pub fn control_direction(&self) -> DVector<f64> {
        self.mats.psi.column(self.vertex).into_owned()
    }

    fn check_state(&self, x: &ExtendedState) -> Result<()> {
        check_unit_domain(&x.f, self.m())?;
        if x.d.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: x.d.len() });
        }
        Ok(())
    }

    /// `|Phi^- f(1) - d|`: how far a user-supplied state is from the domain condition.
    pub fn compatibility_defect(&self, x: &ExtendedState) -> f64 {
        (&self.mats.phi_minus * x.f.eval_at_one() - &x.d).norm()
    }

    /// `T(t) x` for `0 <= t <= 1`.
    pub fn apply(&self, x: &ExtendedState, t: f64) -> Result<ExtendedState> {
        if !(-BREAK_EPS..=1.0 + BREAK_EPS).contains(&t) {
            return Err(Error::TimeOutOfRange(t));
        }
        self.check_state(x)?;
        if t <= BREAK_EPS {
            return Ok(x.clone());
        }
        let prefix = x.f.prefix_integral()?;
        let psi_d = &self.mats.psi * &x.d;
        if t >= 1.0 - BREAK_EPS {
            let f = prefix.matrix_apply(&self.mats.b)?.add_constant(&psi_d)?;
            let d = &self.mats.phi_plus_w * prefix.eval_at_one() + &x.d;
            return Ok(ExtendedState { f, d });
        }
        let head = x.f.restrict(t, 1.0)?.shift(-t);
        let tail = prefix
            .restrict(0.0, t)?
            .matrix_apply(&self.mats.b)?
            .add_constant(&psi_d)?
            .shift(1.0 - t);
        let d = &self.mats.phi_plus_w * prefix.eval(t)? + &x.d;
        Ok(ExtendedState { f: head.concat(&tail)?, d })
    }

    /// `T(t) x = T(tau) T(1)^k x` for any `t >= 0`.
    pub fn apply_long(&self, x: &ExtendedState, t: f64) -> Result<ExtendedState> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let (k, tau) = split_time(t);
        let mut y = x.clone();
        for _ in 0..k {
            y = self.apply(&y, 1.0)?;
        }
        if tau > 0.0 {
            y = self.apply(&y, tau)?;
        }
        Ok(y)
    }

    /// `Q_l d = (l eps_l (x) Psi R(l e^l, A) d, A R(l e^l, A) d)` for `d` in `R^n`.
    pub fn dirichlet(&self, lambda: f64, d: &DVector<f64>) -> Result<(ExtendedState, f64)> {
        if lambda == 0.0 {
            return Err(Error::ZeroLambda);
        }
        if d.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: d.len() });
        }
        let r = linalg::resolvent(lambda * lambda.exp(), &self.mats.a)?;
        let rd = r * d;
        let e = exp_tensor(lambda, &(&self.mats.psi * &rd * lambda), EXP_DEGREE, EXP_TOL)?;
        let vertex = &self.mats.a * &rd;
        Ok((ExtendedState { f: e.profile, d: vertex }, e.error_bound))
    }

    /// `Phi^- f(1) - d`, the boundary operator.
    pub fn boundary(&self, x: &ExtendedState) -> DVector<f64> {
        &self.mats.phi_minus * x.f.eval_at_one() - &x.d
    }

    /// Compares `(e^{l beta} T(1 - beta) - e^{l alpha} T(1 - alpha)) B_l v` with
    /// `M(eps_l 1_[alpha, beta] v)`, where `M u = (u Psi e_i, 0)`.
    pub fn admissibility_check(&self, lambda: f64, alpha: f64, beta: f64, v: f64) -> Result<AdmissibilityCheck> {
        check_interval(alpha, beta)?;
        let (q, bound) = self.dirichlet(lambda, &(self.vertex_vector() * v))?;
        let lhs = self
            .apply(&q, 1.0 - beta)?
            .scale((lambda * beta).exp())
            .sub(&self.apply(&q, 1.0 - alpha)?.scale((lambda * alpha).exp()))?;
        let e = exp_tensor(lambda, &(self.control_direction() * v), EXP_DEGREE, EXP_TOL)?;
        let rhs_f = e.profile.mask(alpha, beta)?;
        let residual = sup_norm(&lhs.f.sub(&rhs_f)?).max(lhs.d.amax());
        Ok(AdmissibilityCheck {
            residual,
            rhs_norm: sup_norm(&rhs_f),
            certification: bound * (2.0 * lambda.abs()).exp() + e.error_bound,
        })
    }
}
