//! The three model problems and their closed-form solutions.
//!
//! With `A` diagonal in the eigenbasis every problem decouples into scalar ODEs, so the
//! exact traces are available per mode. They serve both as the quantities the iterations
//! are meant to recover and as test oracles.
//!
//! * elliptic Cauchy problem: `(d_t^2 - A^2) u = 0`, `u(0) = f`, `d_t u(0) = g`; sought `d_t u(T)`.
//! * hyperbolic Dirichlet problem: `(d_t^2 + A^2) u = 0`, `u(0) = f`, `u(T) = g`; sought `d_t u(0)`.
//! * backward heat problem: `(d_t + A^2) u = 0`, `u(T) = f`; sought `u(0)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{cos_of_product, cosh, pairwise_sum, sin_of_product, sinh, Real};
use crate::spectral::{ScaleIndex, SpectralVec, SpectrumModel};

/// Default guard on `|sin(lambda_j T)|` for the hyperbolic problem.
pub const DEFAULT_RESONANCE_TOL: f64 = 1e-8;

/// Default number of time samples for trajectory norms.
pub const DEFAULT_QUADRATURE_POINTS: usize = 257;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Elliptic => "elliptic",
            ProblemKind::Hyperbolic => "hyperbolic",
            ProblemKind::Parabolic => "parabolic",
        }
    }
}

fn check_horizon<S: Real>(horizon: S) -> Result<()> {
    if horizon > S::zero() && horizon.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("time horizon T must be positive and finite"))
    }
}

fn check_time<S: Real>(t: S, horizon: S) -> Result<()> {
    if t >= S::zero() && t <= horizon {
        Ok(())
    } else {
        Err(Error::invalid(format!("t = {t} outside [0, {horizon}]")))
    }
}

/// `a(lambda_j) x_j + b(lambda_j) y_j`, evaluating each factor only where its coefficient
/// is nonzero and collecting every mode whose result exceeds [`Real::OVERFLOW_LIMIT`] (or
/// is not finite) into one error.
pub(crate) fn guarded_combine<S: Real>(
    model: &Arc<SpectrumModel<S>>,
    a: impl Fn(S) -> S,
    x: &SpectralVec<S>,
    b: impl Fn(S) -> S,
    y: Option<&SpectralVec<S>>,
) -> Result<SpectralVec<S>> {
    let mut out = Vec::with_capacity(model.len());
    let mut bad = Vec::new();
    for (j, &l) in model.eigenvalues().iter().enumerate() {
        let mut v = S::zero();
        let xj = x.coeffs()[j];
        if xj != S::zero() {
            v = a(l) * xj;
        }
        if let Some(y) = y {
            let yj = y.coeffs()[j];
            if yj != S::zero() {
                v = v + b(l) * yj;
            }
        }
        if !v.is_finite() || v.abs() > S::OVERFLOW_LIMIT {
            bad.push(j + 1);
        }
        out.push(v);
    }
    if bad.is_empty() {
        SpectralVec::new(model, out)
    } else {
        Err(Error::Overflow {
            modes: bad,
            limit: S::OVERFLOW_LIMIT.as_f64(),
        })
    }
}

fn same_model<S: Real>(f: &SpectralVec<S>, g: &SpectralVec<S>) -> Result<()> {
    if f.same_model(g) {
        Ok(())
    } else {
        Err(Error::ModelMismatch)
    }
}

/// Elliptic Cauchy data `(f, g)` on `(0, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticProblem<S> {
    horizon: S,
    f: SpectralVec<S>,
    g: SpectralVec<S>,
}

impl<S: Real> EllipticProblem<S> {
    pub fn new(horizon: S, f: SpectralVec<S>, g: SpectralVec<S>) -> Result<Self> {
        check_horizon(horizon)?;
        same_model(&f, &g)?;
        Ok(EllipticProblem { horizon, f, g })
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    pub fn f(&self) -> &SpectralVec<S> {
        &self.f
    }

    pub fn g(&self) -> &SpectralVec<S> {
        &self.g
    }

    pub fn model(&self) -> &Arc<SpectrumModel<S>> {
        self.f.model()
    }

    /// `u(t) = cosh(At) f + sinh(At) A^{-1} g`.
    pub fn solution_at(&self, t: S) -> Result<SpectralVec<S>> {
        check_time(t, self.horizon)?;
        let m = self.model();
        guarded_combine(m, |l| cosh(l * t), &self.f, |l| sinh(l * t) / l, Some(&self.g))
    }

    /// `d_t u(t) = A sinh(At) f + cosh(At) g`.
    pub fn dt_solution_at(&self, t: S) -> Result<SpectralVec<S>> {
        check_time(t, self.horizon)?;
        let m = self.model();
        guarded_combine(m, |l| l * sinh(l * t), &self.f, |l| cosh(l * t), Some(&self.g))
    }

    /// The Neumann trace `d_t u(T)` the elliptic iteration converges to.
    pub fn neumann_trace(&self) -> Result<SpectralVec<S>> {
        self.dt_solution_at(self.horizon)
    }
}

/// Hyperbolic Dirichlet data `u(0) = f`, `u(T) = g`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicProblem<S> {
    horizon: S,
    f: SpectralVec<S>,
    g: SpectralVec<S>,
    resonance_tol: S,
}

impl<S: Real> HyperbolicProblem<S> {
    pub fn new(horizon: S, f: SpectralVec<S>, g: SpectralVec<S>) -> Result<Self> {
        Self::with_resonance_tol(horizon, f, g, S::lit(DEFAULT_RESONANCE_TOL))
    }

    /// Rejects the data if `|sin(lambda_j T)| <= resonance_tol` for some mode, i.e. if
    /// `lambda_j` is (numerically) one of the resonant values `k pi / T`.
    pub fn with_resonance_tol(
        horizon: S,
        f: SpectralVec<S>,
        g: SpectralVec<S>,
        resonance_tol: S,
    ) -> Result<Self> {
        check_horizon(horizon)?;
        same_model(&f, &g)?;
        if !(resonance_tol >= S::zero()) {
            return Err(Error::invalid("resonance tolerance must be non-negative"));
        }
        for (j, &l) in f.model().eigenvalues().iter().enumerate() {
            let s = sin_of_product(l, horizon);
            if s.abs() <= resonance_tol {
                return Err(Error::Resonance {
                    mode: j + 1,
                    eigenvalue: l.as_f64(),
                    sine: s.abs().as_f64(),
                });
            }
        }
        Ok(HyperbolicProblem {
            horizon,
            f,
            g,
            resonance_tol,
        })
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    pub fn f(&self) -> &SpectralVec<S> {
        &self.f
    }

    pub fn g(&self) -> &SpectralVec<S> {
        &self.g
    }

    pub fn resonance_tol(&self) -> S {
        self.resonance_tol
    }

    pub fn model(&self) -> &Arc<SpectrumModel<S>> {
        self.f.model()
    }

    /// The velocity trace `d_t u(0) = A (g - cos(AT) f) / sin(AT)`.
    pub fn velocity_trace(&self) -> Result<SpectralVec<S>> {
        let m = self.model();
        let t = self.horizon;
        let coeffs = m
            .eigenvalues()
            .iter()
            .zip(self.f.coeffs().iter().zip(self.g.coeffs()))
            .map(|(&l, (&f, &g))| (g - cos_of_product(l, t) * f) * l / sin_of_product(l, t))
            .collect();
        SpectralVec::new(m, coeffs)
    }

    /// `u(t) = cos(At) f + sin(At) A^{-1} d_t u(0)`.
    pub fn solution_at(&self, t: S) -> Result<SpectralVec<S>> {
        check_time(t, self.horizon)?;
        let m = self.model();
        let v = self.velocity_trace()?;
        guarded_combine(m, |l| cos_of_product(l, t), &self.f, |l| sin_of_product(l, t) / l, Some(&v))
    }

    /// `d_t u(t) = -A sin(At) f + cos(At) d_t u(0)`.
    pub fn dt_solution_at(&self, t: S) -> Result<SpectralVec<S>> {
        check_time(t, self.horizon)?;
        let m = self.model();
        let v = self.velocity_trace()?;
        guarded_combine(m, |l| -l * sin_of_product(l, t), &self.f, |l| cos_of_product(l, t), Some(&v))
    }
}

/// Whether the stricter relaxation bound `gamma < 2 exp(lambda_tilde^2 T)`,
/// `lambda_tilde = (lambda_min^2 - ln 2 / T)^{1/2}`, holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrictGammaBound {
    Satisfied,
    Violated,
    /// `lambda_min^2 T < ln 2`: `lambda_tilde` is not real and nothing is claimed.
    Undefined,
}

/// Backward heat data: terminal state `f = u(T)` and relaxation parameter `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicProblem<S> {
    horizon: S,
    gamma: S,
    f: SpectralVec<S>,
}

impl<S: Real> ParabolicProblem<S> {
    /// Requires `0 < gamma < 2 exp(lambda_min^2 T)`.
    pub fn new(horizon: S, gamma: S, f: SpectralVec<S>) -> Result<Self> {
        check_horizon(horizon)?;
        if !(gamma > S::zero()) || !gamma.is_finite() {
            return Err(Error::invalid("gamma must be positive and finite"));
        }
        let lmin = f.model().min_eigenvalue();
        // gamma < 2 exp(lmin^2 T)  <=>  ln(gamma / 2) < lmin^2 T
        if !((gamma / S::lit(2.0)).ln() < lmin * lmin * horizon) {
            return Err(Error::invalid(format!(
                "gamma = {gamma} violates gamma < 2 exp(lambda_min^2 T) = {}",
                S::lit(2.0) * (lmin * lmin * horizon).exp()
            )));
        }
        Ok(ParabolicProblem { horizon, gamma, f })
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    pub fn gamma(&self) -> S {
        self.gamma
    }

    pub fn f(&self) -> &SpectralVec<S> {
        &self.f
    }

    pub fn model(&self) -> &Arc<SpectrumModel<S>> {
        self.f.model()
    }

    /// Status of the stricter bound under which the linear part is positive.
    pub fn strict_gamma_bound(&self) -> StrictGammaBound {
        let lmin = self.model().min_eigenvalue();
        let x = lmin * lmin * self.horizon;
        if x < S::LN_2() {
            return StrictGammaBound::Undefined;
        }
        // 2 exp(lambda_tilde^2 T) = 2 exp(lmin^2 T - ln 2) = exp(lmin^2 T)
        if self.gamma.ln() < x {
            StrictGammaBound::Satisfied
        } else {
            StrictGammaBound::Violated
        }
    }

    /// `u(t) = exp(A^2 (T - t)) f` for `t` in `[0, T]`.
    pub fn solution_at(&self, t: S) -> Result<SpectralVec<S>> {
        check_time(t, self.horizon)?;
        let tau = self.horizon - t;
        let m = self.model();
        guarded_combine(m, |l| (l * l * tau).exp(), &self.f, |_| S::zero(), None)
    }

    /// The initial state `u(0) = exp(A^2 T) f`.
    pub fn backward_trace(&self) -> Result<SpectralVec<S>> {
        self.solution_at(S::zero())
    }
}

/// Forward heat flow `exp(-A^2 t) u0`.
pub fn parabolic_forward<S: Real>(u0: &SpectralVec<S>, t: S) -> Result<SpectralVec<S>> {
    if !(t >= S::zero()) || !t.is_finite() {
        return Err(Error::invalid("forward time must be non-negative and finite"));
    }
    u0.apply_fn(|l| (-l * l * t).exp())
}

/// One of the three problems together with its data.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec<S> {
    Elliptic(EllipticProblem<S>),
    Hyperbolic(HyperbolicProblem<S>),
    Parabolic(ParabolicProblem<S>),
}

impl<S: Real> ProblemSpec<S> {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemSpec::Elliptic(_) => ProblemKind::Elliptic,
            ProblemSpec::Hyperbolic(_) => ProblemKind::Hyperbolic,
            ProblemSpec::Parabolic(_) => ProblemKind::Parabolic,
        }
    }

    pub fn horizon(&self) -> S {
        match self {
            ProblemSpec::Elliptic(p) => p.horizon(),
            ProblemSpec::Hyperbolic(p) => p.horizon(),
            ProblemSpec::Parabolic(p) => p.horizon(),
        }
    }

    pub fn model(&self) -> &Arc<SpectrumModel<S>> {
        match self {
            ProblemSpec::Elliptic(p) => p.model(),
            ProblemSpec::Hyperbolic(p) => p.model(),
            ProblemSpec::Parabolic(p) => p.model(),
        }
    }

    /// The trace each iteration is designed to recover:
    /// `d_t u(T)`, `d_t u(0)` or `u(0)` respectively.
    pub fn sought_trace(&self) -> Result<SpectralVec<S>> {
        match self {
            ProblemSpec::Elliptic(p) => p.neumann_trace(),
            ProblemSpec::Hyperbolic(p) => p.velocity_trace(),
            ProblemSpec::Parabolic(p) => p.backward_trace(),
        }
    }

    /// `(u(t), d_t u(t))`.
    pub fn trajectory_point(&self, t: S) -> Result<TrajectoryPoint<S>> {
        match self {
            ProblemSpec::Elliptic(p) => Ok(TrajectoryPoint {
                value: p.solution_at(t)?,
                rate: p.dt_solution_at(t)?,
            }),
            ProblemSpec::Hyperbolic(p) => Ok(TrajectoryPoint {
                value: p.solution_at(t)?,
                rate: p.dt_solution_at(t)?,
            }),
            ProblemSpec::Parabolic(p) => {
                let value = p.solution_at(t)?;
                let rate = value.apply_fn(|l| -l * l)?;
                Ok(TrajectoryPoint { value, rate })
            }
        }
    }

    /// Norm of the exact solution in the solution space natural for this problem.
    pub fn solution_norm(&self, quadrature_points: usize) -> Result<S> {
        let which = match self.kind() {
            ProblemKind::Elliptic => TrajectoryNorm::Ve,
            ProblemKind::Hyperbolic => TrajectoryNorm::Vh,
            ProblemKind::Parabolic => TrajectoryNorm::Vp,
        };
        let tn = TrajectoryNormSpec::new(which, quadrature_points)?;
        trajectory_norm(self.horizon(), &tn, |t| self.trajectory_point(t))
    }
}

/// Sample of a solution trajectory.
#[derive(Debug, Clone)]
pub struct TrajectoryPoint<S> {
    pub value: SpectralVec<S>,
    pub rate: SpectralVec<S>,
}

/// Solution-space norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryNorm {
    /// `(int_0^T ||u||_1^2 + ||d_t u||_0^2 dt)^{1/2}`
    Ve,
    /// `sup_t (||u||_1^2 + ||d_t u||_0^2)^{1/2}`
    Vh,
    /// `(int_0^T ||u||_1^2 + ||d_t u||_{-1}^2 dt)^{1/2}`
    Vp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryNormSpec {
    which: TrajectoryNorm,
    quadrature_points: usize,
}

impl TrajectoryNormSpec {
    pub fn new(which: TrajectoryNorm, quadrature_points: usize) -> Result<Self> {
        if quadrature_points < 2 {
            return Err(Error::invalid("trajectory norms need at least 2 time samples"));
        }
        Ok(TrajectoryNormSpec {
            which,
            quadrature_points,
        })
    }

    pub fn which(&self) -> TrajectoryNorm {
        self.which
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }
}

/// Trajectory norm from uniformly spaced samples on `[0, T]`: composite trapezoid for
/// the integral norms, maximum over the samples for the supremum norm.
pub fn trajectory_norm<S, F>(horizon: S, tn: &TrajectoryNormSpec, mut traj: F) -> Result<S>
where
    S: Real,
    F: FnMut(S) -> Result<TrajectoryPoint<S>>,
{
    check_horizon(horizon)?;
    let n = tn.quadrature_points;
    let dt = horizon / S::from_count((n - 1) as u64);
    let one = ScaleIndex::new(S::one())?;
    let rate_scale = match tn.which {
        TrajectoryNorm::Vp => ScaleIndex::new(-S::one())?,
        _ => ScaleIndex::l2(),
    };
    let mut integrand = Vec::with_capacity(n);
    for i in 0..n {
        let t = if i + 1 == n {
            horizon
        } else {
            dt * S::from_count(i as u64)
        };
        let p = traj(t)?;
        integrand.push(p.value.norm_squared(one) + p.rate.norm_squared(rate_scale));
    }
    match tn.which {
        TrajectoryNorm::Vh => Ok(integrand
            .into_iter()
            .fold(S::zero(), |a, b| a.max(b))
            .sqrt()),
        TrajectoryNorm::Ve | TrajectoryNorm::Vp => {
            let half = S::lit(0.5);
            integrand[0] = integrand[0] * half;
            integrand[n - 1] = integrand[n - 1] * half;
            Ok((pairwise_sum(&integrand) * dt).sqrt())
        }
    }
}

/// Data norm and solution norm for a single-mode datum (see [`illposedness_demo`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IllposednessDemo<S> {
    pub mode: usize,
    pub data_norm: S,
    /// `+inf` when the solution overflowed.
    pub solution_norm: S,
    pub overflow: bool,
}

/// Solves one problem for data concentrated on mode `k`, normalised to unit data norm,
/// and reports the norm of the resulting solution.
///
/// Data: elliptic `(0, g)` with `||g||_{-1/2} = 1`; hyperbolic `(0, g)` with `||g||_1 = 1`;
/// parabolic `f = e_k`. The solution norms grow without bound in `k`.
pub fn illposedness_demo<S: Real>(
    kind: ProblemKind,
    model: &Arc<SpectrumModel<S>>,
    horizon: S,
    k: usize,
    quadrature_points: usize,
) -> Result<IllposednessDemo<S>> {
    let e = SpectralVec::unit(model, k)?;
    let lambda = model.eigenvalue(k);
    let zero = SpectralVec::zeros(model);
    let (spec, data_norm) = match kind {
        ProblemKind::Elliptic => {
            let g = e.scale((S::one() + lambda * lambda).powf(S::lit(0.25)))?;
            let data_norm =
                zero.norm(ScaleIndex::new(S::lit(0.5))?) + g.norm(ScaleIndex::new(S::lit(-0.5))?);
            (ProblemSpec::Elliptic(EllipticProblem::new(horizon, zero, g)?), data_norm)
        }
        ProblemKind::Hyperbolic => {
            let one = ScaleIndex::new(S::one())?;
            let g = e.scale((S::one() + lambda * lambda).powf(S::lit(-0.5)))?;
            let data_norm = zero.norm(one) + g.norm(one);
            (
                ProblemSpec::Hyperbolic(HyperbolicProblem::new(horizon, zero, g)?),
                data_norm,
            )
        }
        ProblemKind::Parabolic => {
            let data_norm = e.l2_norm();
            (
                ProblemSpec::Parabolic(ParabolicProblem::new(horizon, S::one(), e)?),
                data_norm,
            )
        }
    };
    match spec.solution_norm(quadrature_points) {
        Ok(n) if n.is_finite() => Ok(IllposednessDemo {
            mode: k,
            data_norm,
            solution_norm: n,
            overflow: false,
        }),
        Ok(_) | Err(Error::Overflow { .. }) => Ok(IllposednessDemo {
            mode: k,
            data_norm,
            solution_norm: S::infinity(),
            overflow: true,
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn sine(n: usize) -> Arc<SpectrumModel<f64>> {
        SpectrumModel::sine_1d(n, 1.0).unwrap()
    }

    #[test]
    fn elliptic_zero_data_gives_zero_solution() {
        let m = sine(4);
        let p = EllipticProblem::new(1.0, SpectralVec::zeros(&m), SpectralVec::zeros(&m)).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert!(p.solution_at(t).unwrap().is_zero());
            assert!(p.dt_solution_at(t).unwrap().is_zero());
        }
    }

    #[test]
    fn elliptic_unit_mode_trace_is_cosh() {
        let m = sine(3);
        for k in 1..=3 {
            let p = EllipticProblem::new(1.0, SpectralVec::zeros(&m), SpectralVec::unit(&m, k).unwrap())
                .unwrap();
            let tr = p.neumann_trace().unwrap();
            assert_relative_eq!(tr.coeffs()[k - 1], (k as f64 * PI).cosh(), max_relative = 1e-14);
        }
    }

    #[test]
    fn elliptic_examples() {
        let m = sine(1);
        let p = EllipticProblem::new(1.0, SpectralVec::unit(&m, 1).unwrap(), SpectralVec::zeros(&m)).unwrap();
        // mpmath: cosh(pi) = 11.591953275521520627..., pi sinh(pi) = 36.281434722984252917...
        assert_relative_eq!(p.solution_at(1.0).unwrap().coeffs()[0], 11.591953275521521, max_relative = 1e-14);
        assert_relative_eq!(p.dt_solution_at(1.0).unwrap().coeffs()[0], 36.28143472298425, max_relative = 1e-14);
        assert!(p.solution_at(1.5).is_err());
        assert!(p.solution_at(-0.1).is_err());
    }

    #[test]
    fn elliptic_overflow_names_modes() {
        let m = SpectrumModel::custom(vec![1.0, 800.0, 900.0]).unwrap();
        let ones = SpectralVec::new(&m, vec![1.0; 3]).unwrap();
        let p = EllipticProblem::new(1.0, ones.clone(), SpectralVec::zeros(&m)).unwrap();
        match p.solution_at(1.0) {
            Err(Error::Overflow { modes, .. }) => assert_eq!(modes, vec![2, 3]),
            other => panic!("expected overflow, got {other:?}"),
        }
        // modes with zero data never overflow
        let p = EllipticProblem::new(1.0, SpectralVec::unit(&m, 1).unwrap(), SpectralVec::zeros(&m)).unwrap();
        assert_relative_eq!(p.solution_at(1.0).unwrap().coeffs()[0], 1f64.cosh(), max_relative = 1e-15);
    }

    #[test]
    fn hyperbolic_velocity_trace_examples() {
        let m = SpectrumModel::custom(vec![1.0]).unwrap();
        let z = SpectralVec::zeros(&m);
        let p = HyperbolicProblem::new(1.0, z.clone(), z.clone()).unwrap();
        assert!(p.velocity_trace().unwrap().is_zero());

        let p = HyperbolicProblem::new(1.0, z.clone(), SpectralVec::unit(&m, 1).unwrap()).unwrap();
        // mpmath: 1/sin(1) = 1.1883951057781212162...
        assert_relative_eq!(p.velocity_trace().unwrap().coeffs()[0], 1.1883951057781212, max_relative = 1e-14);

        let e = SpectralVec::unit(&m, 1).unwrap();
        let g = e.scale(1f64.cos()).unwrap();
        let p = HyperbolicProblem::new(1.0, e, g).unwrap();
        assert!(p.velocity_trace().unwrap().coeffs()[0].abs() < 1e-15);
    }

    #[test]
    fn hyperbolic_solution_matches_boundary_data() {
        let m = SpectrumModel::custom(vec![0.7, 1.9, 4.4]).unwrap();
        let f = SpectralVec::new(&m, vec![1.0, -0.5, 0.25]).unwrap();
        let g = SpectralVec::new(&m, vec![0.3, 0.2, -1.0]).unwrap();
        let p = HyperbolicProblem::new(1.3, f.clone(), g.clone()).unwrap();
        let u0 = p.solution_at(0.0).unwrap();
        let ut = p.solution_at(1.3).unwrap();
        for j in 0..3 {
            assert_relative_eq!(u0.coeffs()[j], f.coeffs()[j], max_relative = 1e-13);
            assert_relative_eq!(ut.coeffs()[j], g.coeffs()[j], max_relative = 1e-12);
        }
    }

    #[test]
    fn hyperbolic_resonance_is_rejected() {
        // lambda = pi with T = 1 is resonant
        let m = sine(2);
        let z = SpectralVec::zeros(&m);
        match HyperbolicProblem::new(1.0, z.clone(), z.clone()) {
            Err(Error::Resonance { mode: 1, .. }) => {}
            other => panic!("expected resonance, got {other:?}"),
        }
        let m = SpectrumModel::custom(vec![1.0, 2.0]).unwrap();
        let z = SpectralVec::zeros(&m);
        assert!(HyperbolicProblem::new(1.0, z.clone(), z.clone()).is_ok());
        // a loose tolerance turns a near-resonance into a rejection
        let m = SpectrumModel::custom(vec![PI - 1e-4]).unwrap();
        let z = SpectralVec::zeros(&m);
        assert!(HyperbolicProblem::new(1.0, z.clone(), z.clone()).is_ok());
        assert!(HyperbolicProblem::with_resonance_tol(1.0, z.clone(), z, 1e-3).is_err());
    }

    #[test]
    fn parabolic_forward_examples() {
        let m = sine(1);
        assert!(parabolic_forward(&SpectralVec::zeros(&m), 0.5).unwrap().is_zero());
        let u = parabolic_forward(&SpectralVec::unit(&m, 1).unwrap(), 0.0625).unwrap();
        // mpmath: exp(-pi^2/16) = 0.53964148581629717588...
        assert_relative_eq!(u.coeffs()[0], 0.5396414858162972, max_relative = 1e-14);
        assert!(parabolic_forward(&SpectralVec::unit(&m, 1).unwrap(), -1.0).is_err());
    }

    #[test]
    fn parabolic_round_trip() {
        let m = sine(8);
        let t = 30.0 / (8.0 * PI).powi(2);
        let u0 = SpectralVec::from_fn(&m, |j, _| 1.0 / (j as f64 + 1.0)).unwrap();
        let f = parabolic_forward(&u0, t).unwrap();
        let back = ParabolicProblem::new(t, 1.0, f).unwrap().backward_trace().unwrap();
        for (a, b) in back.coeffs().iter().zip(u0.coeffs()) {
            assert_relative_eq!(*a, *b, max_relative = 1e-12);
        }
    }

    #[test]
    fn parabolic_overflow_lists_modes() {
        let m = sine(30);
        let f = SpectralVec::from_fn(&m, |_, _| 1.0).unwrap();
        let p = ParabolicProblem::new(1.0, 1.0, f).unwrap();
        match p.backward_trace() {
            Err(Error::Overflow { modes, .. }) => {
                // exp(j^2 pi^2) > 1e300 iff j^2 pi^2 > 690.8, i.e. j >= 9
                assert_eq!(modes, (9..=30).collect::<Vec<_>>());
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn parabolic_gamma_bound() {
        let m = sine(3);
        let f = SpectralVec::zeros(&m);
        // 2 exp(pi^2 * 0.0625) = 3.7062
        assert!(ParabolicProblem::new(0.0625, 3.7, f.clone()).is_ok());
        assert!(ParabolicProblem::new(0.0625, 3.71, f.clone()).is_err());
        assert!(ParabolicProblem::new(0.0625, 0.0, f.clone()).is_err());
        assert!(ParabolicProblem::new(0.0, 1.0, f).is_err());
    }

    #[test]
    fn strict_gamma_bound_status() {
        let m = sine(3);
        let f = SpectralVec::zeros(&m);
        // pi^2 * 0.0625 < ln 2
        let p = ParabolicProblem::new(0.0625, 2.0, f.clone()).unwrap();
        assert_eq!(p.strict_gamma_bound(), StrictGammaBound::Undefined);
        // pi^2 * 0.1 = 0.987 > ln 2, exp(0.987) = 2.683
        let p = ParabolicProblem::new(0.1, 2.0, f.clone()).unwrap();
        assert_eq!(p.strict_gamma_bound(), StrictGammaBound::Satisfied);
        let p = ParabolicProblem::new(0.1, 4.0, f).unwrap();
        assert_eq!(p.strict_gamma_bound(), StrictGammaBound::Violated);
    }

    #[test]
    fn trajectory_norm_examples() {
        let m = sine(1);
        let e = SpectralVec::unit(&m, 1).unwrap();
        let constant = |_t: f64| {
            Ok(TrajectoryPoint {
                value: e.clone(),
                rate: SpectralVec::zeros(&m),
            })
        };
        let ve = TrajectoryNormSpec::new(TrajectoryNorm::Ve, 257).unwrap();
        let vh = TrajectoryNormSpec::new(TrajectoryNorm::Vh, 257).unwrap();
        // mpmath: sqrt(1+pi^2) = 3.29690830947561515876...
        assert_relative_eq!(trajectory_norm(1.0, &ve, constant).unwrap(), 3.296908309475615, max_relative = 1e-14);
        assert_relative_eq!(trajectory_norm(1.0, &vh, constant).unwrap(), 3.296908309475615, max_relative = 1e-14);

        let zero = |_t: f64| {
            Ok(TrajectoryPoint {
                value: SpectralVec::zeros(&m),
                rate: SpectralVec::zeros(&m),
            })
        };
        assert_eq!(trajectory_norm(1.0, &ve, zero).unwrap(), 0.0);
        assert!(TrajectoryNormSpec::new(TrajectoryNorm::Vp, 1).is_err());
    }

    #[test]
    fn trajectory_trapezoid_converges_on_smooth_integrand() {
        // u(t) = t e_1 on lambda = pi: int_0^1 (1+pi^2) t^2 + 1 dt = (1+pi^2)/3 + 1
        let m = sine(1);
        let e = SpectralVec::unit(&m, 1).unwrap();
        let traj = |t: f64| {
            Ok(TrajectoryPoint {
                value: e.scale(t).unwrap(),
                rate: e.clone(),
            })
        };
        let exact = ((1.0 + PI * PI) / 3.0 + 1.0_f64).sqrt();
        let tn = TrajectoryNormSpec::new(TrajectoryNorm::Ve, 1025).unwrap();
        assert_relative_eq!(trajectory_norm(1.0, &tn, traj).unwrap(), exact, max_relative = 1e-6);
    }

    #[test]
    fn illposedness_elliptic_growth() {
        let m = sine(3);
        let d1 = illposedness_demo(ProblemKind::Elliptic, &m, 1.0, 1, 257).unwrap();
        let d3 = illposedness_demo(ProblemKind::Elliptic, &m, 1.0, 3, 257).unwrap();
        assert_relative_eq!(d1.data_norm, 1.0, max_relative = 1e-14);
        assert_relative_eq!(d3.data_norm, 1.0, max_relative = 1e-14);
        assert!(d3.solution_norm / d1.solution_norm > 100.0);
    }

    #[test]
    fn illposedness_parabolic_overflow_flag() {
        let m = sine(12);
        let d = illposedness_demo(ProblemKind::Parabolic, &m, 1.0, 12, 33).unwrap();
        assert!(d.overflow);
        assert!(d.solution_norm.is_infinite());
        assert_eq!(d.data_norm, 1.0);
        let d = illposedness_demo(ProblemKind::Parabolic, &m, 1.0, 1, 33).unwrap();
        assert!(!d.overflow);
    }

    #[test]
    fn illposedness_hyperbolic_near_resonance() {
        // eigenvalues approaching pi with T = 1
        let m = SpectrumModel::custom(vec![PI - 0.5, PI - 0.05, PI - 0.005]).unwrap();
        let norms: Vec<f64> = (1..=3)
            .map(|k| illposedness_demo(ProblemKind::Hyperbolic, &m, 1.0, k, 129).unwrap())
            .map(|d| {
                assert_relative_eq!(d.data_norm, 1.0, max_relative = 1e-14);
                d.solution_norm
            })
            .collect();
        assert!(norms[0] < norms[1] && norms[1] < norms[2]);
        assert!(norms[2] / norms[0] > 50.0);
    }
}
