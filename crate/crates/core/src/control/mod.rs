//! Controllability maps, control synthesis and closed-loop verification.
//!
//! A control `u` on `[0, n]` is cut into unit segments `u_k(s) = u(n - k - 1 + s)`, so
//! `u_0` acts last. The static map is
//!
//! ```text
//! B_n u = sum_k T(1)^k M u_k,   (M u)(s) = u(s) b,   i.e.   B_n u (s) = sum_k u_k(s) B^k b
//! ```
//!
//! and under dynamic vertex conditions `M u = (u Psi v, 0)` and
//!
//! ```text
//! [B_l u]_1 = u_0 Psi v + sum_{k>=1} (B V + delta_1)^{k-1} V (u_k B Psi v)
//! ```
//!
//! with `V` the prefix integral and `delta_1 g` the constant function `g(1)`.

pub mod characteristics;
pub mod nnls;
pub mod synth;

use nalgebra::DVector;

pub use characteristics::{simulate_dynamic, simulate_static, Simulation, StepperOptions};
pub use synth::{
    synthesize, synthesize_positive, verify_closed_loop, verify_dynamic, ClosedLoopReport, SynthesisMode,
    SynthesisResult,
};

use crate::error::{Error, Result};
use crate::funcspace::{lp_norm, ExtendedState, LpNorm, PiecewisePoly, BREAK_EPS};
use crate::semigroup::{DynamicSystem, StaticSystem};

/// A scalar control on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    pub u: PiecewisePoly,
}

impl ControlSignal {
    pub fn new(u: PiecewisePoly) -> Result<Self> {
        if u.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: u.dim() });
        }
        let (a, _) = u.domain();
        if a.abs() > BREAK_EPS {
            return Err(Error::Breakpoints(format!("control must start at 0, starts at {a}")));
        }
        Ok(ControlSignal { u })
    }

    pub fn zero(horizon: f64) -> Self {
        ControlSignal { u: PiecewisePoly::zero(1, 0.0, horizon) }
    }

    pub fn horizon(&self) -> f64 {
        self.u.domain().1
    }

    /// The horizon as an integer number of unit steps.
    pub fn steps(&self) -> Result<usize> {
        let t = self.horizon();
        let n = t.round();
        if (t - n).abs() > BREAK_EPS || n < 1.0 {
            return Err(Error::NonIntegerHorizon(t));
        }
        Ok(n as usize)
    }

    /// Minimum of `u` (root-isolated per cell).
    pub fn min(&self) -> f64 {
        self.u.min_entry()
    }
}

/// `u_k(s) = u(n - k - 1 + s)` for `k = 0..n`.
pub fn segment(u: &ControlSignal, n: usize) -> Result<Vec<PiecewisePoly>> {
    if u.steps()? != n {
        return Err(Error::NonIntegerHorizon(u.horizon()));
    }
    (0..n)
        .map(|k| {
            let lo = (n - k - 1) as f64;
            Ok(u.u.restrict(lo, lo + 1.0)?.shift(-lo))
        })
        .collect()
}

/// Inverse of [`segment`]: places `u_k` on `[n - k - 1, n - k]`.
pub fn assemble(segments: &[PiecewisePoly]) -> Result<ControlSignal> {
    let n = segments.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no segments".into()));
    }
    let mut u = segments[n - 1].clone();
    for k in (0..n - 1).rev() {
        u = u.concat(&segments[k].shift((n - k - 1) as f64))?;
    }
    ControlSignal::new(u)
}

/// Final state of the static system driven by `u` from zero: `sum_k u_k (x) B^k b`.
pub fn controllability_map_static(sys: &StaticSystem, u: &ControlSignal) -> Result<PiecewisePoly> {
    let n = u.steps()?;
    let segs = segment(u, n)?;
    let mut dir = sys.b.clone();
    let mut out = PiecewisePoly::zero(sys.m(), 0.0, 1.0);
    for seg in &segs {
        out = out.add(&seg.outer(&dir)?)?;
        dir = &sys.b_mat * dir;
    }
    Ok(out)
}

/// The same map evaluated through the semigroup, `x <- T(1) x + M u_k` for descending `k`.
pub fn controllability_map_static_semigroup(sys: &StaticSystem, u: &ControlSignal) -> Result<PiecewisePoly> {
    let n = u.steps()?;
    let segs = segment(u, n)?;
    let mut x = segs[n - 1].outer(&sys.b)?;
    for k in (0..n - 1).rev() {
        x = sys.apply(&x, 1.0)?.add(&segs[k].outer(&sys.b)?)?;
    }
    Ok(x)
}

/// Dynamic controllability map: the closed formula for the edge component, its
/// individual terms, and the full extended state from the semigroup.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicMap {
    /// Edge component from the closed formula.
    pub first: PiecewisePoly,
    /// `k`-th summand of the closed formula.
    pub terms: Vec<PiecewisePoly>,
    /// `sum_k T(1)^k M u_k` in the extended state space.
    pub state: ExtendedState,
    /// `|first - state.f|_inf`.
    pub cross_check: f64,
}

/// `(B V + delta_1) g`.
fn dynamic_step(sys: &DynamicSystem, g: &PiecewisePoly) -> Result<PiecewisePoly> {
    g.prefix_integral()?.matrix_apply(&sys.mats.b)?.add_constant(&g.eval_at_one())
}

pub fn controllability_map_dynamic(sys: &DynamicSystem, u: &ControlSignal) -> Result<DynamicMap> {
    let l = u.steps()?;
    let segs = segment(u, l)?;
    let psi_v = sys.control_direction();
    let b_psi_v = &sys.mats.b * &psi_v;
    let mut terms = Vec::with_capacity(l);
    terms.push(segs[0].outer(&psi_v)?);
    for (k, seg) in segs.iter().enumerate().skip(1) {
        let mut g = seg.prefix_integral()?.outer(&b_psi_v)?;
        for _ in 1..k {
            g = dynamic_step(sys, &g)?;
        }
        terms.push(g);
    }
    let mut first = terms[0].clone();
    for t in &terms[1..] {
        first = first.add(t)?;
    }

    let inject = |seg: &PiecewisePoly| -> Result<ExtendedState> {
        Ok(ExtendedState::new(seg.outer(&psi_v)?, DVector::zeros(sys.n())))
    };
    let mut state = inject(&segs[l - 1])?;
    for k in (0..l - 1).rev() {
        state = sys.apply(&state, 1.0)?.add(&inject(&segs[k])?)?;
    }
    let cross_check = lp_norm(&first.sub(&state.f)?, LpNorm::Inf);
    Ok(DynamicMap { first, terms, state, cross_check })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspace::Poly;
    use crate::network::{build_matrices, parse_network, Mode};
    use crate::sample;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ramp(n: usize) -> ControlSignal {
        ControlSignal::new(PiecewisePoly::single(0.0, n as f64, vec![Poly(vec![0.0, 1.0])])).unwrap()
    }

    fn swap_sys() -> StaticSystem {
        StaticSystem::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), DVector::from_vec(vec![1.0, 0.0]))
            .unwrap()
    }

    fn dyn_two_cycle() -> DynamicSystem {
        let spec = parse_network("vertices: 2\nedge: e1 1 2 1\nedge: e2 2 1 1\n").unwrap();
        DynamicSystem::new(build_matrices(&spec, Mode::Dynamic).unwrap(), 0).unwrap()
    }

    #[test]
    fn segments_of_ramp() {
        let segs = segment(&ramp(2), 2).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert!((segs[0].eval(x).unwrap()[0] - (1.0 + x)).abs() < 1e-15);
            assert!((segs[1].eval(x).unwrap()[0] - x).abs() < 1e-15);
        }
        assert!(matches!(segment(&ramp(2), 3), Err(Error::NonIntegerHorizon(_))));
    }

    #[test]
    fn segments_reassemble() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = sample::random_piecewise(&mut rng, 1, 7, 3);
        let breaks = f.breakpoints().iter().map(|x| x * 3.0).collect();
        let u = ControlSignal::new(PiecewisePoly::new(1, breaks, f.cells().to_vec()).unwrap()).unwrap();
        let back = assemble(&segment(&u, 3).unwrap()).unwrap();
        for k in 0..100 {
            let s = 3.0 * k as f64 / 99.0;
            assert!((back.u.eval(s).unwrap()[0] - u.u.eval(s).unwrap()[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_control_has_equal_segments() {
        let u = ControlSignal::new(PiecewisePoly::constant(0.0, 3.0, &[2.0])).unwrap();
        let segs = segment(&u, 3).unwrap();
        assert!(segs.iter().all(|s| s == &segs[0]));
    }

    #[test]
    fn static_map_on_two_cycle() {
        let sys = swap_sys();
        let x = controllability_map_static(&sys, &ramp(2)).unwrap();
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let v = x.eval(s).unwrap();
            assert!((v[0] - (1.0 + s)).abs() < 1e-15 && (v[1] - s).abs() < 1e-15);
        }
        let y = controllability_map_static_semigroup(&sys, &ramp(2)).unwrap();
        assert!(x.coefficient_distance(&y).unwrap() < 1e-15);
        let z = controllability_map_static(&sys, &ControlSignal::zero(2.0)).unwrap();
        assert_eq!(lp_norm(&z, LpNorm::Inf), 0.0);
    }

    #[test]
    fn dynamic_map_examples() {
        let sys = dyn_two_cycle();
        let psi_v = sys.control_direction();
        // u_0 only
        let u = ControlSignal::new(
            PiecewisePoly::new(1, vec![0.0, 1.0, 2.0], vec![vec![Poly::zero()], vec![Poly(vec![0.5, 2.0])]]).unwrap(),
        )
        .unwrap();
        let r = controllability_map_dynamic(&sys, &u).unwrap();
        let want = PiecewisePoly::single(0.0, 1.0, vec![Poly(vec![0.5, 2.0])]).outer(&psi_v).unwrap();
        assert!(lp_norm(&r.first.sub(&want).unwrap(), LpNorm::Inf) < 1e-15);
        assert!(r.cross_check < 1e-12);
        // u_1 = 1 only
        let u = ControlSignal::new(
            PiecewisePoly::new(1, vec![0.0, 1.0, 2.0], vec![vec![Poly::constant(1.0)], vec![Poly::zero()]]).unwrap(),
        )
        .unwrap();
        let r = controllability_map_dynamic(&sys, &u).unwrap();
        let want = PiecewisePoly::single(0.0, 1.0, vec![Poly(vec![0.0, 1.0])])
            .outer(&(&sys.mats.b * &psi_v))
            .unwrap();
        assert!(lp_norm(&r.first.sub(&want).unwrap(), LpNorm::Inf) < 1e-15);
        assert!(r.cross_check < 1e-12);
    }

    #[test]
    fn maps_are_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sys = swap_sys();
        let dsys = dyn_two_cycle();
        for _ in 0..10 {
            let mk = |rng: &mut ChaCha8Rng| {
                let f = sample::random_piecewise(rng, 1, 4, 2);
                let breaks = f.breakpoints().iter().map(|x| x * 3.0).collect();
                ControlSignal::new(PiecewisePoly::new(1, breaks, f.cells().to_vec()).unwrap()).unwrap()
            };
            let (u, w) = (mk(&mut rng), mk(&mut rng));
            let sum = ControlSignal::new(u.u.scale(0.7).add(&w.u.scale(-1.3)).unwrap()).unwrap();
            let lhs = controllability_map_static(&sys, &sum).unwrap();
            let rhs = controllability_map_static(&sys, &u)
                .unwrap()
                .scale(0.7)
                .add(&controllability_map_static(&sys, &w).unwrap().scale(-1.3))
                .unwrap();
            assert!(lp_norm(&lhs.sub(&rhs).unwrap(), LpNorm::Inf) <= 1e-12);
            let dl = controllability_map_dynamic(&dsys, &sum).unwrap().first;
            let dr = controllability_map_dynamic(&dsys, &u)
                .unwrap()
                .first
                .scale(0.7)
                .add(&controllability_map_dynamic(&dsys, &w).unwrap().first.scale(-1.3))
                .unwrap();
            assert!(lp_norm(&dl.sub(&dr).unwrap(), LpNorm::Inf) <= 1e-12);
        }
    }
}
