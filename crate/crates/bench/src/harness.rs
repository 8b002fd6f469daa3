//! Experiment pipeline: config -> model and data -> iteration -> report.

use std::sync::Arc;

use illposed_core::regularization::{affine_term_error, NStar};
use illposed_core::{
    add_noise, build_factors_with, deviation_closed_form, error_bound_curve, fixed_point, illposedness_demo,
    run_iteration, select_n_star, BoundPoint, EllipticProblem, EvaluationMode, FactorOptions, HyperbolicProblem,
    IllposednessDemo, IterationFactors, IterationReport, IterationSchedule, NoiseSpec, ParabolicProblem,
    ProblemKind, ProblemSpec, RegularizerPlan, ScaleIndex, SourceCondition, SourceWeight, SpectralVec,
    SpectrumModel, StopRule, StrictGammaBound,
};

use crate::config::{DataSource, ExperimentConfig, Kind, ProblemConfig, SpectrumConfig};
use crate::error::{BenchError, Result};
use crate::grid::{ingest_grid, GridFunction};
use crate::report::{Cell, Frame, ReportRecord, Table, TableRow};
use crate::synth::{parabolic_terminal, piecewise_profile, unit_mode, ProfileParams};

pub fn build_model(spec: &SpectrumConfig) -> Result<Arc<SpectrumModel<f64>>> {
    Ok(match *spec {
        SpectrumConfig::Sine1d { n_modes, length } => SpectrumModel::sine_1d(n_modes, length)?,
        SpectrumConfig::SineRect { nx, ny, lx, ly } => SpectrumModel::sine_rect(nx, ny, lx, ly)?,
    })
}

/// A resolved data vector; `origin` is set when it is a heat terminal state.
struct Resolved {
    value: SpectralVec<f64>,
    origin: Option<SpectralVec<f64>>,
}

fn resolve(
    src: &DataSource,
    model: &Arc<SpectrumModel<f64>>,
    problem: &ProblemConfig,
    warnings: &mut Vec<String>,
) -> Result<Resolved> {
    let value = match src {
        DataSource::Zero => SpectralVec::zeros(model),
        DataSource::UnitMode { k } => unit_mode(model, *k)?,
        DataSource::Coefficients { values } => SpectralVec::new(model, values.clone())?,
        DataSource::Grid { path, boundary } => {
            let gf = GridFunction::read_csv(path)?;
            let ing = ingest_grid(&gf, model, *boundary)?;
            warnings.extend(ing.warnings.into_iter().map(|w| format!("{}: {w}", path.display())));
            ing.coeffs
        }
        DataSource::Profile { params } => piecewise_profile(model, params)?,
        DataSource::ParabolicTerminal { u0 } => {
            let u0 = resolve(u0, model, problem, warnings)?.value;
            let f = parabolic_terminal(&u0, problem.horizon, problem.a2)?;
            return Ok(Resolved {
                value: f,
                origin: Some(u0),
            });
        }
    };
    Ok(Resolved { value, origin: None })
}

fn make_spec(cfg: &ProblemConfig, f: SpectralVec<f64>, g: Option<SpectralVec<f64>>) -> Result<ProblemSpec<f64>> {
    let t = cfg.effective_horizon();
    Ok(match cfg.kind {
        Kind::Elliptic => ProblemSpec::Elliptic(EllipticProblem::new(t, f, g.expect("validated"))?),
        Kind::Hyperbolic => {
            let g = g.expect("validated");
            ProblemSpec::Hyperbolic(match cfg.resonance_tol {
                Some(tol) => HyperbolicProblem::with_resonance_tol(t, f, g, tol)?,
                None => HyperbolicProblem::new(t, f, g)?,
            })
        }
        Kind::Parabolic => ProblemSpec::Parabolic(ParabolicProblem::new(t, cfg.gamma.expect("validated"), f)?),
    })
}

/// Everything needed to run an experiment.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub model: Arc<SpectrumModel<f64>>,
    /// Problem with the noise-free data.
    pub clean: ProblemSpec<f64>,
    /// Sought trace of the noise-free problem (the initial heat state when known).
    pub reference: SpectralVec<f64>,
    /// Iteration built from the data actually used (noisy when noise is configured).
    pub factors: IterationFactors<f64>,
    /// Iteration built from the noise-free data.
    pub clean_factors: IterationFactors<f64>,
    pub warnings: Vec<String>,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let model = build_model(&cfg.spectrum)?;
    let mut warnings = Vec::new();
    let p = &cfg.problem;
    let f = resolve(&p.f, &model, p, &mut warnings)?;
    let g = match &p.g {
        Some(src) => Some(resolve(src, &model, p, &mut warnings)?.value),
        None => None,
    };
    let opts = FactorOptions {
        hyperbolic_term: p.hyperbolic_term.into(),
    };
    let clean = make_spec(p, f.value.clone(), g.clone())?;
    let reference = match (&f.origin, p.kind) {
        (Some(u0), Kind::Parabolic) => u0.clone(),
        _ => clean.sought_trace()?,
    };
    let clean_factors = build_factors_with(&clean, opts)?;
    let factors = match &cfg.noise {
        Some(n) => {
            let scale = ScaleIndex::new(n.norm_scale)?;
            let fnoisy = add_noise(&f.value, &NoiseSpec::new(n.eps, n.seed, scale)?)?;
            let gnoisy = match &g {
                Some(g) => Some(add_noise(g, &NoiseSpec::new(n.eps, n.seed.wrapping_add(1), scale)?)?),
                None => None,
            };
            build_factors_with(&make_spec(p, fnoisy, gnoisy)?, opts)?
        }
        None => clean_factors.clone(),
    };
    match clean_factors.strict_bound() {
        Some(StrictGammaBound::Violated) => warnings.push(
            "gamma exceeds the stricter bound; the norm inequality of the iteration may fail".into(),
        ),
        Some(StrictGammaBound::Undefined) => warnings.push(
            "lambda_min^2 T < ln 2: the stricter gamma bound is undefined, norm inequality unverified".into(),
        ),
        _ => {}
    }
    Ok(Prepared {
        model,
        clean,
        reference,
        factors,
        clean_factors,
        warnings,
    })
}

pub fn schedule_for(cfg: &ExperimentConfig, fac: &IterationFactors<f64>) -> Result<IterationSchedule<f64>> {
    let s = &cfg.schedule;
    let scale = match s.stop_scale {
        Some(v) => ScaleIndex::new(v)?,
        None => fac.iteration_scale(),
    };
    Ok(IterationSchedule::new(
        s.checkpoints.clone(),
        s.mode.into(),
        StopRule {
            max_steps: s.max_steps(),
            tol: s.tol,
            scale,
        },
    )?)
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub prepared: Prepared,
    pub report: IterationReport<f64>,
    pub record: ReportRecord,
}

/// Runs the iteration from zero and measures the relative `H^0` error against the
/// noise-free trace.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome> {
    let prepared = prepare(cfg)?;
    let schedule = schedule_for(cfg, &prepared.factors)?;
    let phi0 = SpectralVec::zeros(&prepared.model);
    let report = run_iteration(&prepared.factors, &phi0, &schedule, Some(&prepared.reference))?;
    let record = ReportRecord::from_report(prepared.clean.kind().name(), &report, prepared.warnings.clone());
    Ok(Outcome {
        prepared,
        report,
        record,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Options {
    pub modes: Vec<usize>,
    pub checkpoints: Vec<u64>,
    /// Size of the sine spectrum (at least the largest mode).
    pub n_modes: usize,
}

impl Default for Table2Options {
    fn default() -> Self {
        Table2Options {
            modes: vec![1, 2, 3],
            checkpoints: vec![100, 1_000, 100_000, 1_000_000, 100_000_000, 1_000_000_000],
            n_modes: 3,
        }
    }
}

/// Elliptic problem with `T = 1`, `f = 0`, `g = e_k`, started from zero: relative error
/// `||phi_m - phi_bar|| / ||phi_bar||` evaluated as `||F^m phi_bar|| / ||phi_bar||`.
pub fn run_table2(opts: &Table2Options) -> Result<Table> {
    let n = opts.n_modes.max(opts.modes.iter().copied().max().unwrap_or(1));
    let model = SpectrumModel::sine_1d(n, 1.0)?;
    let zero = SpectralVec::zeros(&model);
    let mut rows = Vec::new();
    for &k in &opts.modes {
        let spec = ProblemSpec::Elliptic(EllipticProblem::new(1.0, zero.clone(), unit_mode(&model, k)?)?);
        let fac = build_factors_with(&spec, FactorOptions::default())?;
        let bar = fixed_point(&fac)?.l2_norm();
        let values = opts
            .checkpoints
            .iter()
            .map(|&m| Ok(deviation_closed_form(&fac, &zero, m)?.l2_norm() / bar))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(TableRow {
            label: k.to_string(),
            values,
        });
    }
    Ok(Table {
        title: "Relative L2 error, elliptic problem (T = 1, f = 0, g = e_k)".into(),
        row_header: "k".into(),
        columns: opts.checkpoints.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Options {
    pub a2: Vec<f64>,
    pub horizon: f64,
    pub gamma: f64,
    pub checkpoints: Vec<u64>,
    pub spectrum: SpectrumConfig,
    pub profile: ProfileParams,
}

impl Default for Table1Options {
    fn default() -> Self {
        Table1Options {
            a2: vec![8.0, 2.0],
            horizon: 0.0625,
            gamma: 2.0,
            checkpoints: vec![10, 1_000, 10_000, 100_000, 1_000_000],
            spectrum: SpectrumConfig::SineRect {
                nx: 32,
                ny: 32,
                lx: 1.0,
                ly: 1.0,
            },
            profile: ProfileParams::default(),
        }
    }
}

/// Backward heat problem on the rough-plus-smooth profile, one row per `a^2`, relative
/// error against the initial state.
pub fn run_table1_analog(opts: &Table1Options) -> Result<Table> {
    let model = build_model(&opts.spectrum)?;
    let u0 = piecewise_profile(&model, &opts.profile)?;
    let zero = SpectralVec::zeros(&model);
    let max = opts.checkpoints.last().copied().unwrap_or(0);
    let mut rows = Vec::new();
    for &a2 in &opts.a2 {
        let f = parabolic_terminal(&u0, opts.horizon, a2)?;
        let spec = ProblemSpec::Parabolic(ParabolicProblem::new(opts.horizon / a2, opts.gamma, f)?);
        let fac = build_factors_with(&spec, FactorOptions::default())?;
        let schedule = IterationSchedule::fixed_steps(opts.checkpoints.clone(), EvaluationMode::Auto, ScaleIndex::l2())?;
        debug_assert_eq!(schedule.stop().max_steps, max);
        let report = run_iteration(&fac, &zero, &schedule, Some(&u0))?;
        rows.push(TableRow {
            label: format!("a2 = {a2}"),
            values: report
                .checkpoints
                .iter()
                .map(|c| c.error_vs_reference.expect("reference supplied"))
                .collect(),
        });
    }
    Ok(Table {
        title: format!(
            "Relative L2 error, backward heat problem (T = {}, gamma = {})",
            opts.horizon, opts.gamma
        ),
        row_header: "a2".into(),
        columns: opts.checkpoints.clone(),
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct RegularizeOutcome {
    pub eps_prime: f64,
    pub curve: Vec<BoundPoint<f64>>,
    pub n_star: NStar<f64>,
    pub warnings: Vec<String>,
}

impl RegularizeOutcome {
    pub fn frame(&self) -> Frame {
        let opt = |x: Option<f64>| x.map_or(Cell::Missing, Cell::Num);
        Frame {
            title: format!(
                "Cutoff regularization (eps' = {:.5e}, n* = {:.5e}, {} modes kept)",
                self.eps_prime, self.n_star.n_star, self.n_star.retained
            ),
            headers: [
                "n",
                "retained",
                "tail",
                "amplification",
                "bound",
                "true_error",
                "literal_lambda",
                "literal_amplification",
                "literal_bound",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            rows: self
                .curve
                .iter()
                .map(|p| {
                    vec![
                        Cell::Num(p.n),
                        Cell::Int(p.retained as u64),
                        Cell::Num(p.tail),
                        Cell::Num(p.amplification),
                        Cell::Num(p.bound),
                        opt(p.true_error),
                        opt(p.literal_lambda),
                        opt(p.literal_amplification),
                        opt(p.literal_bound),
                    ]
                })
                .collect(),
        }
    }
}

/// Error bound and measured error of the cutoff regularizer over all candidate cutoffs.
pub fn run_regularize(cfg: &ExperimentConfig) -> Result<RegularizeOutcome> {
    if cfg.noise.is_none() {
        return Err(BenchError::config("regularization needs a noise level (--eps or a noise section)"));
    }
    let prepared = prepare(cfg)?;
    let rc = cfg.regularizer.clone().unwrap_or_default();
    let phibar = fixed_point(&prepared.clean_factors)?;
    let eps_prime = affine_term_error(&prepared.clean_factors, &prepared.factors)?;
    let weight = SourceWeight::sobolev(rc.q)?;
    let scale = ScaleIndex::new(rc.source_scale)?;
    let source = match rc.m {
        Some(m) => SourceCondition::new(m, weight, scale)?,
        None => SourceCondition::fitted(&phibar, weight, scale)?,
    };
    let plan = RegularizerPlan::new(prepared.model.max_eigenvalue(), eps_prime, source)?;
    let curve = error_bound_curve(&plan, &prepared.clean_factors, Some((&phibar, prepared.factors.z())))?;
    let n_star = select_n_star(&plan, &prepared.clean_factors)?;
    Ok(RegularizeOutcome {
        eps_prime,
        curve,
        n_star,
        warnings: prepared.warnings,
    })
}

/// Data and solution norms for each unit mode of `model`.
pub fn run_demo(kind: Kind, model: &Arc<SpectrumModel<f64>>, horizon: f64) -> Result<Vec<IllposednessDemo<f64>>> {
    (1..=model.len())
        .map(|k| {
            Ok(illposedness_demo(
                ProblemKind::from(kind),
                model,
                horizon,
                k,
                illposed_core::problems::DEFAULT_QUADRATURE_POINTS,
            )?)
        })
        .collect()
}

pub fn demo_frame(kind: Kind, model: &SpectrumModel<f64>, rows: &[IllposednessDemo<f64>]) -> Frame {
    Frame {
        title: format!("Unit-data solution norms, {} problem", ProblemKind::from(kind).name()),
        headers: ["k", "lambda", "data_norm", "solution_norm", "overflow"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        rows: rows
            .iter()
            .map(|d| {
                vec![
                    Cell::Int(d.mode as u64),
                    Cell::Num(model.eigenvalue(d.mode)),
                    Cell::Num(d.data_norm),
                    if d.overflow { Cell::Missing } else { Cell::Num(d.solution_norm) },
                    Cell::Bool(d.overflow),
                ]
            })
            .collect(),
    }
}
