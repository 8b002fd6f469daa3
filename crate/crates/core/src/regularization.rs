//! Noisy data: seeded noise, spectral smoothing and the cutoff regularizer.
//!
//! The cutoff operator `R_n` keeps the iteration factor `F(lambda)` for `lambda <= n` and
//! replaces it by zero above `n`, so the regularized fixed point
//! `phi_n = R_n phi_n + z_eps` exists for noisy `z_eps` whatever the data. Its error splits
//! into a tail term controlled by a source condition on the exact solution and a noise
//! term amplified by `||(I - R_n)^{-1}||`.
//!
//! All error quantities in this module are measured in `H^0`.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::iterations::IterationFactors;
use crate::scalar::Real;
use crate::spectral::{scale_weight, ScaleIndex, SpectralVec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<S> {
    /// Exact norm of the perturbation.
    pub eps: S,
    pub seed: u64,
    pub norm_scale: ScaleIndex<S>,
}

impl<S: Real> NoiseSpec<S> {
    pub fn new(eps: S, seed: u64, norm_scale: ScaleIndex<S>) -> Result<Self> {
        if !(eps > S::zero()) || !eps.is_finite() {
            return Err(Error::invalid("noise level must be positive and finite"));
        }
        Ok(NoiseSpec {
            eps,
            seed,
            norm_scale,
        })
    }
}

/// Seeded Gaussian perturbation of `v`, rescaled to have norm exactly `ns.eps`.
pub fn add_noise<S: Real>(v: &SpectralVec<S>, ns: &NoiseSpec<S>) -> Result<SpectralVec<S>> {
    let delta = noise_vector(v, ns)?;
    v.add(&delta)
}

/// The perturbation that [`add_noise`] adds.
pub fn noise_vector<S: Real>(v: &SpectralVec<S>, ns: &NoiseSpec<S>) -> Result<SpectralVec<S>> {
    if v.is_empty() {
        return Err(Error::invalid("cannot perturb a vector over an empty model"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ns.seed);
    let raw: Vec<S> = (0..v.len())
        .map(|_| {
            let x: f64 = StandardNormal.sample(&mut rng);
            S::lit(x)
        })
        .collect();
    let raw = SpectralVec::new(v.model(), raw)?;
    let norm = raw.norm(ns.norm_scale);
    if !(norm > S::zero()) {
        return Err(Error::invalid("degenerate noise draw"));
    }
    raw.scale(ns.eps / norm)
}

/// Orthogonal projection onto the modes with `lambda <= 1/h`.
pub fn smooth<S: Real>(f_eps: &SpectralVec<S>, h: S) -> Result<SpectralVec<S>> {
    if !(h > S::zero()) {
        return Err(Error::invalid("h must be positive"));
    }
    let threshold = h.recip();
    let mask: Vec<S> = f_eps
        .model()
        .eigenvalues()
        .iter()
        .map(|&l| if l <= threshold { S::one() } else { S::zero() })
        .collect();
    f_eps.apply_factors(&mask)
}

/// `h = [(||f||_r^2 / eps)^{1/r} - 1]^{-1/2}` for a squared-norm noise bound `eps`.
pub fn choose_h<S: Real>(eps: S, r: S, f_norm_r: S) -> Result<S> {
    if !(r > S::zero()) {
        return Err(Error::invalid("r must be positive"));
    }
    if !(eps > S::zero()) || !(f_norm_r > S::zero()) {
        return Err(Error::invalid("eps and the data norm must be positive"));
    }
    let ratio = f_norm_r * f_norm_r / eps;
    if !(ratio > S::one()) {
        return Err(Error::invalid("eps must be below the squared data norm"));
    }
    // (ratio^{1/r} - 1) without cancellation
    let bracket = (ratio.ln() / r).exp_m1();
    Ok(bracket.sqrt().recip())
}

/// `4 eps^{(r-s)/r} ||f||_r^{2s/r}`, a bound on the squared `H^s` error of the smoothed data.
pub fn smoothing_bound<S: Real>(eps: S, r: S, s: S, f_norm_r: S) -> Result<S> {
    if !(r > s && s > S::zero()) {
        return Err(Error::invalid("smoothing bound requires r > s > 0"));
    }
    if !(eps >= S::zero()) || !(f_norm_r >= S::zero()) {
        return Err(Error::invalid("eps and the data norm must be non-negative"));
    }
    let four = S::lit(4.0);
    Ok(four * eps.powf((r - s) / r) * f_norm_r.powf(S::lit(2.0) * s / r))
}

/// Growth function `G` of the source condition.
#[derive(Clone)]
pub enum SourceWeight<S> {
    /// `(1 + lambda^2)^{q/2}`.
    Sobolev { q: S },
    Custom(Arc<dyn Fn(S) -> S + Send + Sync>),
}

impl<S: fmt::Debug> fmt::Debug for SourceWeight<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceWeight::Sobolev { q } => f.debug_struct("Sobolev").field("q", q).finish(),
            SourceWeight::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl<S: Real> SourceWeight<S> {
    pub fn sobolev(q: S) -> Result<Self> {
        if !(q > S::zero()) || !q.is_finite() {
            return Err(Error::invalid("source exponent q must be positive"));
        }
        Ok(SourceWeight::Sobolev { q })
    }

    pub fn custom(g: impl Fn(S) -> S + Send + Sync + 'static) -> Self {
        SourceWeight::Custom(Arc::new(g))
    }

    pub fn eval(&self, lambda: S) -> S {
        match self {
            SourceWeight::Sobolev { q } => scale_weight(lambda, *q).sqrt(),
            SourceWeight::Custom(g) => g(lambda),
        }
    }
}

/// `sum (1 + lambda^2)^s G(lambda)^2 phi_bar_j^2 <= m^2`.
#[derive(Debug, Clone)]
pub struct SourceCondition<S> {
    pub m: S,
    pub weight: SourceWeight<S>,
    /// Must be non-negative for the tail bound `m / G(n)` to hold in `H^0`.
    pub scale: ScaleIndex<S>,
}

impl<S: Real> SourceCondition<S> {
    pub fn new(m: S, weight: SourceWeight<S>, scale: ScaleIndex<S>) -> Result<Self> {
        if !(m >= S::zero()) || !m.is_finite() {
            return Err(Error::invalid("source constant must be non-negative"));
        }
        if scale.value() < S::zero() {
            return Err(Error::invalid("source scale must be non-negative"));
        }
        Ok(SourceCondition { m, weight, scale })
    }

    /// Smallest constant for which `phibar` satisfies the condition.
    pub fn fitted(phibar: &SpectralVec<S>, weight: SourceWeight<S>, scale: ScaleIndex<S>) -> Result<Self> {
        let m = source_constant(phibar, &weight, scale);
        Self::new(m, weight, scale)
    }
}

/// `(sum (1 + lambda^2)^s G(lambda)^2 v_j^2)^{1/2}`.
pub fn source_constant<S: Real>(v: &SpectralVec<S>, weight: &SourceWeight<S>, scale: ScaleIndex<S>) -> S {
    let terms: Vec<S> = v
        .model()
        .eigenvalues()
        .iter()
        .zip(v.coeffs())
        .map(|(&l, &c)| {
            let g = weight.eval(l);
            scale_weight(l, scale.value()) * g * g * c * c
        })
        .collect();
    crate::scalar::pairwise_sum(&terms).sqrt()
}

#[derive(Debug, Clone)]
pub struct RegularizerPlan<S> {
    /// Cutoff threshold on `lambda`.
    pub cutoff: S,
    /// `||z - z_eps||_0`.
    pub eps_prime: S,
    pub source: SourceCondition<S>,
}

impl<S: Real> RegularizerPlan<S> {
    pub fn new(cutoff: S, eps_prime: S, source: SourceCondition<S>) -> Result<Self> {
        if !(cutoff > S::zero()) {
            return Err(Error::invalid("cutoff must be positive"));
        }
        if !(eps_prime >= S::zero()) || !eps_prime.is_finite() {
            return Err(Error::invalid("eps_prime must be non-negative"));
        }
        Ok(RegularizerPlan {
            cutoff,
            eps_prime,
            source,
        })
    }
}

/// `||z - z_eps||_0` between an exact and a noisy iteration.
pub fn affine_term_error<S: Real>(exact: &IterationFactors<S>, noisy: &IterationFactors<S>) -> Result<S> {
    Ok(exact.z().sub(noisy.z())?.l2_norm())
}

/// Solution of `phi = R_n phi + z_eps`: `z_j / (1 - F_j)` on retained modes, `z_j` above `n`.
pub fn regularized_fixed_point<S: Real>(
    fac: &IterationFactors<S>,
    z_eps: &SpectralVec<S>,
    n: S,
) -> Result<SpectralVec<S>> {
    if !(n > S::zero()) {
        return Err(Error::invalid("cutoff must be positive"));
    }
    if !z_eps.same_model(fac.z()) {
        return Err(Error::ModelMismatch);
    }
    let ls = fac.model().eigenvalues();
    let mut out = Vec::with_capacity(ls.len());
    for (j, &l) in ls.iter().enumerate() {
        let z = z_eps.coeffs()[j];
        if l <= n {
            let c = fac.complements()[j];
            if c == S::zero() {
                return Err(Error::DegenerateComplement { mode: j + 1 });
            }
            out.push(z / c);
        } else {
            out.push(z);
        }
    }
    SpectralVec::new(fac.model(), out)
}

/// Cutoffs at which `R_n` changes: half of `lambda_1`, midpoints between consecutive
/// distinct eigenvalues, and `1.5 lambda_N`. Ascending.
pub fn candidate_cutoffs<S: Real>(eigenvalues: &[S]) -> Vec<S> {
    let Some(&first) = eigenvalues.first() else {
        return Vec::new();
    };
    let half = S::lit(0.5);
    let mut out = vec![first * half];
    for w in eigenvalues.windows(2) {
        if w[1] > w[0] {
            out.push((w[0] + w[1]) * half);
        }
    }
    out.push(*eigenvalues.last().expect("nonempty") * S::lit(1.5));
    out
}

/// One entry of [`error_bound_curve`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPoint<S> {
    pub n: S,
    pub retained: usize,
    /// `M / G(n)`, or zero when no eigenvalue exceeds `n`.
    pub tail: S,
    /// `||(I - R_n)^{-1}|| = max over modes of 1/(1 - F_j) (retained) or 1 (cut)`.
    pub amplification: S,
    /// `tail + eps_prime * amplification`.
    pub bound: S,
    /// `||phi_n - phi_bar||_0` when a reference is supplied.
    pub true_error: Option<S>,
    /// Largest eigenvalue strictly below `n`.
    pub literal_lambda: Option<S>,
    /// `1 / (1 - literal_lambda)`, the operator norm as literally written with eigenvalues.
    pub literal_amplification: Option<S>,
    /// `M / G(n) + eps_prime / (1 + literal_lambda)`.
    pub literal_bound: Option<S>,
}

fn bound_at<S: Real>(plan: &RegularizerPlan<S>, fac: &IterationFactors<S>, n: S) -> Result<BoundPoint<S>> {
    let ls = fac.model().eigenvalues();
    let g = plan.source.weight.eval(n);
    if !(g > S::zero()) || !g.is_finite() {
        return Err(Error::invalid(format!("source weight must be positive at n = {n}")));
    }
    let any_cut = ls.iter().any(|&l| l > n);
    let tail = if any_cut { plan.source.m / g } else { S::zero() };
    let mut amplification = S::one();
    let mut retained = 0;
    for (j, &l) in ls.iter().enumerate() {
        if l <= n {
            retained += 1;
            amplification = amplification.max(fac.complements()[j].recip());
        }
    }
    let noise = if plan.eps_prime == S::zero() {
        S::zero()
    } else {
        plan.eps_prime * amplification
    };
    let literal_lambda = ls.iter().copied().filter(|&l| l < n).fold(None, |acc: Option<S>, l| {
        Some(acc.map_or(l, |a| a.max(l)))
    });
    Ok(BoundPoint {
        n,
        retained,
        tail,
        amplification,
        bound: tail + noise,
        true_error: None,
        literal_lambda,
        literal_amplification: literal_lambda.map(|l| (S::one() - l).recip()),
        literal_bound: literal_lambda.map(|l| plan.source.m / g + plan.eps_prime / (S::one() + l)),
    })
}

/// Evaluates the a-priori bound at every candidate cutoff. With `reference = (phi_bar, z_eps)`
/// the measured error of the regularized fixed point is filled in as well.
pub fn error_bound_curve<S: Real>(
    plan: &RegularizerPlan<S>,
    fac: &IterationFactors<S>,
    reference: Option<(&SpectralVec<S>, &SpectralVec<S>)>,
) -> Result<Vec<BoundPoint<S>>> {
    let cands = candidate_cutoffs(fac.model().eigenvalues());
    let mut out = Vec::with_capacity(cands.len());
    let mut prev_g = S::zero();
    for n in cands {
        let mut p = bound_at(plan, fac, n)?;
        let g = plan.source.weight.eval(n);
        if g < prev_g {
            return Err(Error::invalid("source weight must be non-decreasing"));
        }
        prev_g = g;
        if let Some((phibar, z_eps)) = reference {
            let phi_n = regularized_fixed_point(fac, z_eps, n)?;
            p.true_error = Some(phi_n.sub(phibar)?.l2_norm());
        }
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NStar<S> {
    pub n_star: S,
    pub bound_at_star: S,
    pub retained: usize,
}

/// Candidate cutoff minimizing the bound; ties go to the smaller cutoff.
pub fn select_n_star<S: Real>(plan: &RegularizerPlan<S>, fac: &IterationFactors<S>) -> Result<NStar<S>> {
    let curve = error_bound_curve(plan, fac, None)?;
    let mut best: Option<&BoundPoint<S>> = None;
    for p in &curve {
        if best.is_none_or(|b| p.bound < b.bound) {
            best = Some(p);
        }
    }
    let b = best.ok_or_else(|| Error::invalid("empty candidate grid"))?;
    Ok(NStar {
        n_star: b.n,
        bound_at_star: b.bound,
        retained: b.retained,
    })
}
