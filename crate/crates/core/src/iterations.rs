//! Affine fixed-point iterations `phi <- F(A) phi + z`.
//!
//! Each of the three alternating procedures reduces, after solving its two well-posed
//! sub-problems in closed form, to an affine map whose linear part is a spectral function
//! of `A`:
//!
//! | problem    | `F(lambda)`                   | `z`                                                   |
//! |------------|-------------------------------|-------------------------------------------------------|
//! | elliptic   | `tanh(lambda T)^2`            | `lambda sinh(lambda T) cosh(lambda T)^-2 f + sech(lambda T) g` |
//! | hyperbolic | `cos(lambda T)^2`             | `-lambda cos(lambda T) sin(lambda T) f + lambda sin(lambda T) g` |
//! | parabolic  | `1 - gamma exp(-lambda^2 T)`  | `gamma f`                                             |
//!
//! Factors are stored together with their complements `1 - F`, computed directly
//! (`sech^2`, `sin^2`, `gamma exp(-lambda^2 T)`) so that modes with `F` within rounding of
//! one still have a usable fixed point `z / (1 - F)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problems::{ProblemKind, ProblemSpec, StrictGammaBound};
use crate::scalar::{cos_of_product, powu, sech, sech_squared, sin_of_product, Real};
use crate::spectral::{scale_weight, ScaleIndex, SpectralVec, SpectrumModel};

/// Checkpoints at or above this step count are evaluated in closed form by
/// [`EvaluationMode::Auto`].
pub const AUTO_CLOSED_FORM_FROM: u64 = 10_000;

/// Which affine term to use for the hyperbolic iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HyperbolicAffineTerm {
    /// `-A cos(AT) sin(AT) f + A sin(AT) g`; its fixed point is `d_t u(0)`.
    #[default]
    Derived,
    /// `-A cos(AT) sin(AT) f + sin(AT) g`, without the factor `A` on the `g` term.
    /// Kept for comparison only; its fixed point is not the velocity trace.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FactorOptions {
    pub hyperbolic_term: HyperbolicAffineTerm,
}

/// `(tanh(lambda T)^2, sech(lambda T)^2)`.
pub fn factor_elliptic<S: Real>(lambda: S, horizon: S) -> (S, S) {
    let x = lambda * horizon;
    let t = x.tanh();
    (t * t, sech_squared(x))
}

/// `(cos(lambda T)^2, sin(lambda T)^2)`.
pub fn factor_hyperbolic<S: Real>(lambda: S, horizon: S) -> (S, S) {
    let c = cos_of_product(lambda, horizon);
    let s = sin_of_product(lambda, horizon);
    (c * c, s * s)
}

/// `(1 - gamma exp(-lambda^2 T), gamma exp(-lambda^2 T))`.
pub fn factor_parabolic<S: Real>(lambda: S, horizon: S, gamma: S) -> (S, S) {
    let c = gamma * (-lambda * lambda * horizon).exp();
    (S::one() - c, c)
}

/// Per-mode linear part and affine term of one iteration.
#[derive(Debug, Clone)]
pub struct IterationFactors<S> {
    kind: ProblemKind,
    factors: Vec<S>,
    complements: Vec<S>,
    z: SpectralVec<S>,
    horizon: S,
    gamma: Option<S>,
    strict_bound: Option<StrictGammaBound>,
}

/// Builds the iteration for `spec` with the default options.
pub fn build_factors<S: Real>(spec: &ProblemSpec<S>) -> Result<IterationFactors<S>> {
    build_factors_with(spec, FactorOptions::default())
}

pub fn build_factors_with<S: Real>(
    spec: &ProblemSpec<S>,
    opts: FactorOptions,
) -> Result<IterationFactors<S>> {
    let model = spec.model();
    let t = spec.horizon();
    let ls = model.eigenvalues();
    let n = ls.len();
    let mut factors = Vec::with_capacity(n);
    let mut complements = Vec::with_capacity(n);
    let mut z = Vec::with_capacity(n);
    let mut gamma = None;
    let mut strict_bound = None;
    match spec {
        ProblemSpec::Elliptic(p) => {
            for (j, &l) in ls.iter().enumerate() {
                let (f, c) = factor_elliptic(l, t);
                let x = l * t;
                // sinh cosh^-2 = tanh sech
                let zj = l * x.tanh() * sech(x) * p.f().coeffs()[j] + sech(x) * p.g().coeffs()[j];
                factors.push(f);
                complements.push(c);
                z.push(zj);
            }
        }
        ProblemSpec::Hyperbolic(p) => {
            for (j, &l) in ls.iter().enumerate() {
                let cs = cos_of_product(l, t);
                let sn = sin_of_product(l, t);
                let g_weight = match opts.hyperbolic_term {
                    HyperbolicAffineTerm::Derived => l * sn,
                    HyperbolicAffineTerm::Printed => sn,
                };
                factors.push(cs * cs);
                complements.push(sn * sn);
                z.push(-cs * sn * l * p.f().coeffs()[j] + g_weight * p.g().coeffs()[j]);
            }
        }
        ProblemSpec::Parabolic(p) => {
            let g = p.gamma();
            for (j, &l) in ls.iter().enumerate() {
                let (f, c) = factor_parabolic(l, t, g);
                factors.push(f);
                complements.push(c);
                z.push(g * p.f().coeffs()[j]);
            }
            gamma = Some(g);
            strict_bound = Some(p.strict_gamma_bound());
        }
    }
    Ok(IterationFactors {
        kind: spec.kind(),
        factors,
        complements,
        z: SpectralVec::new(model, z)?,
        horizon: t,
        gamma,
        strict_bound,
    })
}

impl<S: Real> IterationFactors<S> {
    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    /// `F(lambda_j)`.
    pub fn factors(&self) -> &[S] {
        &self.factors
    }

    /// `1 - F(lambda_j)`, evaluated without cancellation.
    pub fn complements(&self) -> &[S] {
        &self.complements
    }

    /// The affine term.
    pub fn z(&self) -> &SpectralVec<S> {
        &self.z
    }

    pub fn horizon(&self) -> S {
        self.horizon
    }

    pub fn gamma(&self) -> Option<S> {
        self.gamma
    }

    /// For the parabolic iteration: whether the stricter `gamma` bound (which makes the
    /// linear part positive and satisfy the norm inequality with `c = 1`) holds.
    pub fn strict_bound(&self) -> Option<StrictGammaBound> {
        self.strict_bound
    }

    /// True when the parabolic stricter bound is violated or cannot be evaluated.
    pub fn strict_bound_warning(&self) -> bool {
        matches!(
            self.strict_bound,
            Some(StrictGammaBound::Violated) | Some(StrictGammaBound::Undefined)
        )
    }

    pub fn model(&self) -> &Arc<SpectrumModel<S>> {
        self.z.model()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Space the iteration lives in: `H^{-1/2}` for the elliptic problem, `H^0` otherwise.
    pub fn iteration_scale(&self) -> ScaleIndex<S> {
        match self.kind {
            ProblemKind::Elliptic => ScaleIndex::new(S::lit(-0.5)).expect("finite"),
            _ => ScaleIndex::l2(),
        }
    }

    pub fn max_abs_factor(&self) -> S {
        self.factors
            .iter()
            .fold(S::zero(), |acc, f| acc.max(f.abs()))
    }

    /// Same linear part with a different affine term (e.g. one built from noisy data).
    pub fn with_affine_term(&self, z: SpectralVec<S>) -> Result<Self> {
        if !z.same_model(&self.z) {
            return Err(Error::ModelMismatch);
        }
        Ok(IterationFactors { z, ..self.clone() })
    }

    fn check(&self, v: &SpectralVec<S>) -> Result<()> {
        if v.same_model(&self.z) {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    /// `T_l v = F(A) v`.
    pub fn apply_linear(&self, v: &SpectralVec<S>) -> Result<SpectralVec<S>> {
        self.check(v)?;
        v.apply_factors(&self.factors)
    }

    /// One step `T phi = F(A) phi + z`.
    pub fn step(&self, phi: &SpectralVec<S>) -> Result<SpectralVec<S>> {
        self.check(phi)?;
        let coeffs = phi
            .coeffs()
            .iter()
            .zip(&self.factors)
            .zip(self.z.coeffs())
            .map(|((&p, &f), &z)| f.mul_add(p, z))
            .collect();
        SpectralVec::new(self.model(), coeffs)
    }
}

/// `F^k`; logarithmic form for positive `F`, binary exponentiation otherwise.
fn factor_power<S: Real>(f: S, c: S, k: u64) -> S {
    if k == 0 {
        return S::one();
    }
    if f > S::zero() {
        (S::from_count(k) * ln_factor(f, c)).exp()
    } else {
        powu(f, k)
    }
}

/// `ln F` for `F > 0`, through `ln(1 - c)` when `F` is close to one.
fn ln_factor<S: Real>(f: S, c: S) -> S {
    if c < S::lit(0.5) {
        (-c).ln_1p()
    } else {
        f.ln()
    }
}

/// `(1 - F^k) / (1 - F) = sum_{i<k} F^i`.
fn geometric_sum<S: Real>(f: S, c: S, k: u64) -> S {
    if k == 0 {
        return S::zero();
    }
    if c == S::zero() {
        return S::from_count(k);
    }
    let one_minus = if f > S::zero() {
        -(S::from_count(k) * ln_factor(f, c)).exp_m1()
    } else {
        S::one() - powu(f, k)
    };
    one_minus / c
}

/// The `k`-th iterate `F^k phi0 + (sum_{i<k} F^i) z`, evaluated per mode in closed form.
pub fn iterate_closed_form<S: Real>(
    fac: &IterationFactors<S>,
    phi0: &SpectralVec<S>,
    k: u64,
) -> Result<SpectralVec<S>> {
    fac.check(phi0)?;
    let coeffs = (0..fac.len())
        .map(|j| {
            let (f, c) = (fac.factors[j], fac.complements[j]);
            factor_power(f, c, k) * phi0.coeffs()[j] + geometric_sum(f, c, k) * fac.z.coeffs()[j]
        })
        .collect();
    SpectralVec::new(fac.model(), coeffs)
}

/// `phi_k - phi_bar = F^k (phi0 - phi_bar)`, the iteration error without the
/// cancellation incurred by subtracting two nearly equal iterates.
pub fn deviation_closed_form<S: Real>(
    fac: &IterationFactors<S>,
    phi0: &SpectralVec<S>,
    k: u64,
) -> Result<SpectralVec<S>> {
    let bar = fixed_point(fac)?;
    let e0 = phi0.sub(&bar)?;
    let p: Vec<S> = (0..fac.len())
        .map(|j| factor_power(fac.factors[j], fac.complements[j], k))
        .collect();
    e0.apply_factors(&p)
}

/// `phi_{k+1} - phi_k = F^k (z - (1 - F) phi0)`.
fn increment_closed_form<S: Real>(
    fac: &IterationFactors<S>,
    phi0: &SpectralVec<S>,
    k: u64,
) -> SpectralVec<S> {
    let coeffs = (0..fac.len())
        .map(|j| {
            let (f, c) = (fac.factors[j], fac.complements[j]);
            factor_power(f, c, k) * (fac.z.coeffs()[j] - c * phi0.coeffs()[j])
        })
        .collect();
    SpectralVec::from_parts_unchecked(fac.model(), coeffs)
}

/// The unique solution of `phi = F(A) phi + z`, i.e. `z_j / (1 - F_j)`.
pub fn fixed_point<S: Real>(fac: &IterationFactors<S>) -> Result<SpectralVec<S>> {
    let mut coeffs = Vec::with_capacity(fac.len());
    let mut overflow = Vec::new();
    for (j, (&c, &z)) in fac.complements.iter().zip(fac.z.coeffs()).enumerate() {
        if c == S::zero() {
            return Err(Error::DegenerateComplement { mode: j + 1 });
        }
        let v = z / c;
        if !v.is_finite() || v.abs() > S::OVERFLOW_LIMIT {
            overflow.push(j + 1);
        }
        coeffs.push(v);
    }
    if !overflow.is_empty() {
        return Err(Error::Overflow {
            modes: overflow,
            limit: S::OVERFLOW_LIMIT.as_f64(),
        });
    }
    SpectralVec::new(fac.model(), coeffs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    /// Geometric-sum formula at each checkpoint.
    ClosedForm,
    /// Repeated application of the affine map.
    Stepwise,
    /// Stepwise below [`AUTO_CLOSED_FORM_FROM`] steps, closed form from there on.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule<S> {
    pub max_steps: u64,
    /// Stop once `||phi_k - phi_{k-1}||` at a checkpoint drops below this.
    pub tol: S,
    /// Norm for the stopping test.
    pub scale: ScaleIndex<S>,
}

/// Checkpoints and termination rule for one run.
///
/// The stopping test is evaluated at checkpoints only, so closed-form and stepwise
/// evaluation terminate at the same step.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSchedule<S> {
    checkpoints: Vec<u64>,
    mode: EvaluationMode,
    stop: StopRule<S>,
    error_scale: ScaleIndex<S>,
}

impl<S: Real> IterationSchedule<S> {
    pub fn new(checkpoints: Vec<u64>, mode: EvaluationMode, stop: StopRule<S>) -> Result<Self> {
        if checkpoints.first() == Some(&0) {
            return Err(Error::invalid("checkpoints must be at least 1"));
        }
        if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("checkpoints must be strictly ascending"));
        }
        if !(stop.tol >= S::zero()) {
            return Err(Error::invalid("stopping tolerance must be non-negative"));
        }
        Ok(IterationSchedule {
            checkpoints,
            mode,
            stop,
            error_scale: ScaleIndex::l2(),
        })
    }

    /// Run to the last checkpoint without a tolerance test, measuring in `scale`.
    pub fn fixed_steps(checkpoints: Vec<u64>, mode: EvaluationMode, scale: ScaleIndex<S>) -> Result<Self> {
        let max_steps = checkpoints.last().copied().unwrap_or(0);
        Self::new(
            checkpoints,
            mode,
            StopRule {
                max_steps,
                tol: S::zero(),
                scale,
            },
        )
    }

    /// Norm in which errors against a reference are measured (default `H^0`).
    pub fn with_error_scale(mut self, s: ScaleIndex<S>) -> Self {
        self.error_scale = s;
        self
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    pub fn mode(&self) -> EvaluationMode {
        self.mode
    }

    pub fn stop(&self) -> &StopRule<S> {
        &self.stop
    }

    pub fn error_scale(&self) -> ScaleIndex<S> {
        self.error_scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<S> {
    pub k: u64,
    pub iterate: SpectralVec<S>,
    /// `||phi_k - ref|| / ||ref||` (absolute when the reference vanishes).
    pub error_vs_reference: Option<S>,
    /// `||phi_k - phi_{k-1}||`.
    pub successive_diff: S,
    /// `||T phi_k - phi_k||`.
    pub residual: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxSteps,
    Tolerance,
    ScheduleComplete,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::MaxSteps => "max_steps",
            Termination::Tolerance => "tolerance",
            Termination::ScheduleComplete => "schedule_complete",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport<S> {
    pub checkpoints: Vec<Checkpoint<S>>,
    pub final_k: u64,
    pub termination: Termination,
}

impl<S: Real> IterationReport<S> {
    /// `(d_{k2} / d_{k1})^{1/(k2 - k1)}` between consecutive checkpoints, where `d` is the
    /// successive difference. For a single active mode this is `|F|`.
    pub fn contraction_factors(&self) -> Vec<S> {
        self.checkpoints
            .windows(2)
            .map(|w| {
                let steps = S::from_count(w[1].k - w[0].k);
                (w[1].successive_diff / w[0].successive_diff).powf(S::one() / steps)
            })
            .collect()
    }

    pub fn last(&self) -> Option<&Checkpoint<S>> {
        self.checkpoints.last()
    }
}

/// Runs the iteration from `phi0` along `schedule`, optionally measuring the error
/// against `reference`.
pub fn run_iteration<S: Real>(
    fac: &IterationFactors<S>,
    phi0: &SpectralVec<S>,
    schedule: &IterationSchedule<S>,
    reference: Option<&SpectralVec<S>>,
) -> Result<IterationReport<S>> {
    fac.check(phi0)?;
    if let Some(r) = reference {
        fac.check(r)?;
    }
    let max = schedule.stop.max_steps;
    let mut targets: Vec<u64> = schedule
        .checkpoints
        .iter()
        .copied()
        .filter(|&k| k <= max)
        .collect();
    if schedule.checkpoints.iter().any(|&k| k > max) && targets.last() != Some(&max) && max > 0 {
        targets.push(max);
    }

    let scale = schedule.stop.scale;
    let ref_norm = reference.map(|r| r.norm(schedule.error_scale));
    let mut current_k = 0u64;
    let mut current = phi0.clone();
    let mut previous = phi0.clone();
    let mut out = Vec::with_capacity(targets.len());
    let mut termination = Termination::ScheduleComplete;

    for k in targets {
        let closed = match schedule.mode {
            EvaluationMode::ClosedForm => true,
            EvaluationMode::Stepwise => false,
            EvaluationMode::Auto => k >= AUTO_CLOSED_FORM_FROM,
        };
        let (iterate, successive_diff, residual) = if closed {
            let it = iterate_closed_form(fac, phi0, k)?;
            let d = increment_closed_form(fac, phi0, k - 1).norm(scale);
            let r = increment_closed_form(fac, phi0, k).norm(scale);
            (it, d, r)
        } else {
            if current_k > k {
                // an earlier closed-form checkpoint cannot precede a stepwise one
                unreachable!("stepwise checkpoints are visited in ascending order");
            }
            while current_k < k {
                previous = current;
                current = fac.step(&previous)?;
                current_k += 1;
            }
            let d = current.sub(&previous)?.norm(scale);
            let r = fac.step(&current)?.sub(&current)?.norm(scale);
            (current.clone(), d, r)
        };
        let error_vs_reference = match (reference, ref_norm) {
            (Some(r), Some(rn)) => {
                let e = iterate.sub(r)?.norm(schedule.error_scale);
                Some(if rn > S::zero() { e / rn } else { e })
            }
            _ => None,
        };
        out.push(Checkpoint {
            k,
            iterate,
            error_vs_reference,
            successive_diff,
            residual,
        });
        if k == max {
            termination = Termination::MaxSteps;
            break;
        }
        if successive_diff < schedule.stop.tol {
            termination = Termination::Tolerance;
            break;
        }
    }
    let final_k = out.last().map(|c| c.k).unwrap_or(0);
    Ok(IterationReport {
        checkpoints: out,
        final_k,
        termination,
    })
}

/// Stepwise evaluation of `schedule` (the mode stored in the schedule is ignored).
pub fn iterate_stepwise<S: Real>(
    fac: &IterationFactors<S>,
    phi0: &SpectralVec<S>,
    schedule: &IterationSchedule<S>,
    reference: Option<&SpectralVec<S>>,
) -> Result<IterationReport<S>> {
    let mut s = schedule.clone();
    s.mode = EvaluationMode::Stepwise;
    run_iteration(fac, phi0, &s, reference)
}

/// Outcome of [`check_operator_conditions`].
///
/// Violations are `lhs - rhs` of each inequality written as `lhs <= rhs`, divided by
/// `||x||^2`; positive values mean the inequality fails for that sample.
#[derive(Debug, Clone)]
pub struct OperatorCheck<S> {
    pub nonexpansive: bool,
    /// `||(I-T)x||^2 <= c (||x||^2 - ||Tx||^2)` on every sample.
    pub condition1_holds: bool,
    /// `<(I-T)x, x> >= (c+1)/(2c) ||(I-T)x||^2` on every sample.
    pub condition2_holds: bool,
    pub max_violation: S,
    pub condition1_max_violation: S,
    pub condition2_max_violation: S,
    /// `max |v1 - 2c v2|` over the samples; zero in exact arithmetic since the two
    /// inequalities are rearrangements of each other.
    pub equivalence_gap: S,
    /// First sample violating the first inequality.
    pub counterexample: Option<SpectralVec<S>>,
    pub strict_bound: Option<StrictGammaBound>,
}

/// Tests the norm inequalities that make `T_l` non-expansive and asymptotically regular
/// on each sample vector, in the norm of the iteration space.
pub fn check_operator_conditions<S: Real>(
    fac: &IterationFactors<S>,
    samples: &[SpectralVec<S>],
    c: S,
) -> Result<OperatorCheck<S>> {
    if samples.is_empty() {
        return Err(Error::invalid("at least one sample vector is required"));
    }
    if !(c > S::zero()) {
        return Err(Error::invalid("c must be positive"));
    }
    let weights: Vec<S> = fac
        .model()
        .eigenvalues()
        .iter()
        .map(|&l| scale_weight(l, fac.iteration_scale().value()))
        .collect();
    let tol = S::epsilon() * S::lit(64.0);
    let two = S::lit(2.0);
    let c2 = (c + S::one()) / (two * c);

    let mut nonexpansive = true;
    let mut v1_max = S::neg_infinity();
    let mut v2_max = S::neg_infinity();
    let mut nonexp_max = S::neg_infinity();
    let mut gap = S::zero();
    let mut counterexample = None;

    for x in samples {
        fac.check(x)?;
        let mut xx = S::zero();
        let mut ix = S::zero();
        let mut ixx = S::zero();
        let mut loss = S::zero();
        let mut tx = S::zero();
        for j in 0..fac.len() {
            let w = weights[j] * x.coeffs()[j] * x.coeffs()[j];
            let (f, comp) = (fac.factors[j], fac.complements[j]);
            xx = xx + w;
            ix = ix + comp * comp * w;
            ixx = ixx + comp * w;
            // ||x||^2 - ||Tx||^2 per mode: (1 - F^2) = comp (1 + F)
            loss = loss + comp * (S::one() + f) * w;
            tx = tx + f * f * w;
        }
        let norm = if xx > S::zero() { xx } else { S::one() };
        let v1 = (ix - c * loss) / norm;
        let v2 = (c2 * ix - ixx) / norm;
        let vn = (tx - xx) / norm;
        v1_max = v1_max.max(v1);
        v2_max = v2_max.max(v2);
        nonexp_max = nonexp_max.max(vn);
        gap = gap.max((v1 - two * c * v2).abs());
        if vn > tol {
            nonexpansive = false;
        }
        if v1 > tol && counterexample.is_none() {
            counterexample = Some(x.clone());
        }
    }
    Ok(OperatorCheck {
        nonexpansive,
        condition1_holds: v1_max <= tol,
        condition2_holds: v2_max <= tol,
        max_violation: v1_max.max(v2_max).max(nonexp_max),
        condition1_max_violation: v1_max,
        condition2_max_violation: v2_max,
        equivalence_gap: gap,
        counterexample,
        strict_bound: fac.strict_bound,
    })
}
