//! Spectral solvers for three ill-posed evolution problems and the alternating
//! fixed-point iterations that reconstruct their missing boundary data.
//!
//! Everything is diagonal in the eigenbasis of a positive self-adjoint operator `A`
//! described by a [`SpectrumModel`]. Vectors are coefficient arrays ([`SpectralVec`]),
//! operators are scalar functions of the eigenvalues, and norms are weighted sums.
//!
//! - [`problems`]: forward and exact solutions of the elliptic Cauchy, hyperbolic
//!   Dirichlet and backward parabolic problems.
//! - [`iterations`]: the affine iterations `phi <- F(A) phi + z`, evaluated stepwise or in
//!   closed form.
//! - [`regularization`]: noise, smoothing and the spectral cutoff regularizer.
//!
//! The library is generic over [`Real`] (`f64` and `f32`); the `*F64` / `*F32` aliases
//! fix the scalar.
//!
//! ```
//! use illposed_core::{build_factors, fixed_point, iterate_closed_form, EllipticProblem, ProblemSpec, SpectralVec, SpectrumModel};
//!
//! let model = SpectrumModel::sine_1d(3, 1.0)?;
//! let spec = ProblemSpec::Elliptic(EllipticProblem::new(1.0, SpectralVec::zeros(&model), SpectralVec::unit(&model, 1)?)?);
//! let fac = build_factors(&spec)?;
//! let phi = iterate_closed_form(&fac, &SpectralVec::zeros(&model), 1000)?;
//! let exact = fixed_point(&fac)?;
//! let rel = phi.sub(&exact)?.l2_norm() / exact.l2_norm();
//! assert!((rel - std::f64::consts::PI.tanh().powi(2000)).abs() < 1e-15);
//! # Ok::<(), illposed_core::Error>(())
//! ```

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod iterations;
pub mod problems;
pub mod regularization;
mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use iterations::{
    build_factors, build_factors_with, check_operator_conditions, deviation_closed_form, fixed_point,
    iterate_closed_form, iterate_stepwise, run_iteration, Checkpoint, EvaluationMode, FactorOptions,
    HyperbolicAffineTerm, IterationFactors, IterationReport, IterationSchedule, OperatorCheck, StopRule,
    Termination,
};
pub use problems::{
    illposedness_demo, parabolic_forward, trajectory_norm, EllipticProblem, HyperbolicProblem,
    IllposednessDemo, ParabolicProblem, ProblemKind, ProblemSpec, StrictGammaBound, TrajectoryNorm,
    TrajectoryNormSpec, TrajectoryPoint,
};
pub use regularization::{
    add_noise, candidate_cutoffs, choose_h, error_bound_curve, regularized_fixed_point, select_n_star,
    smooth, smoothing_bound, BoundPoint, NStar, NoiseSpec, RegularizerPlan, SourceCondition, SourceWeight,
};
pub use scalar::{pairwise_sum, Real};
pub use spectral::{Basis, ModeIndex, ScaleIndex, SpectralVec, SpectrumModel};

pub type SpectrumModelF64 = SpectrumModel<f64>;
pub type SpectralVecF64 = SpectralVec<f64>;
pub type ScaleIndexF64 = ScaleIndex<f64>;
pub type ProblemSpecF64 = ProblemSpec<f64>;
pub type IterationFactorsF64 = IterationFactors<f64>;
pub type IterationReportF64 = IterationReport<f64>;
pub type RegularizerPlanF64 = RegularizerPlan<f64>;

pub type SpectrumModelF32 = SpectrumModel<f32>;
pub type SpectralVecF32 = SpectralVec<f32>;
pub type ProblemSpecF32 = ProblemSpec<f32>;
pub type IterationFactorsF32 = IterationFactors<f32>;
