//! Experiment configuration.
//!
//! Values are resolved in three layers: built-in defaults for the problem kind, then a
//! JSON config file, then command-line flags. A config file replaces the defaults as a
//! whole document (missing optional fields take their serde defaults); flags override
//! individual fields.

use std::path::{Path, PathBuf};

use illposed_core::{EvaluationMode, HyperbolicAffineTerm, ProblemKind};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::grid::BoundaryPolicy;
use crate::report::OutputFormat;
use crate::synth::ProfileParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl From<Kind> for ProblemKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Elliptic => ProblemKind::Elliptic,
            Kind::Hyperbolic => ProblemKind::Hyperbolic,
            Kind::Parabolic => ProblemKind::Parabolic,
        }
    }
}

/// Where a data vector comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Zero,
    UnitMode {
        k: usize,
    },
    /// Coefficients in the sorted eigenbasis.
    Coefficients {
        values: Vec<f64>,
    },
    /// Sampled function in CSV (`x,value` or `x,y,value`).
    Grid {
        path: PathBuf,
        #[serde(default)]
        boundary: BoundaryPolicy,
    },
    /// Smooth quartic plus windowed sawtooth.
    Profile {
        #[serde(default)]
        params: ProfileParams,
    },
    /// Terminal heat state `u(T)` started from `u0`, with the problem's `T` and `a2`.
    ParabolicTerminal {
        u0: Box<DataSource>,
    },
}

impl DataSource {
    fn resolve_paths(&mut self, base: &Path) {
        match self {
            DataSource::Grid { path, .. } if path.is_relative() => *path = base.join(&*path),
            DataSource::ParabolicTerminal { u0 } => u0.resolve_paths(base),
            _ => {}
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DataSource::Grid { path, .. } if !path.is_file() => Err(BenchError::config(format!(
                "grid file {} does not exist",
                path.display()
            ))),
            DataSource::UnitMode { k: 0 } => Err(BenchError::config("unit_mode index is 1-based")),
            DataSource::ParabolicTerminal { u0 } => u0.validate(),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffineTerm {
    #[default]
    Derived,
    Printed,
}

impl From<AffineTerm> for HyperbolicAffineTerm {
    fn from(a: AffineTerm) -> Self {
        match a {
            AffineTerm::Derived => HyperbolicAffineTerm::Derived,
            AffineTerm::Printed => HyperbolicAffineTerm::Printed,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: Kind,
    pub horizon: f64,
    /// Relaxation parameter (parabolic only).
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Heat constant in `a^2 u_t = Delta u`; the solver runs with `T / a^2`.
    #[serde(default = "one")]
    pub a2: f64,
    pub f: DataSource,
    /// Second data vector (elliptic: Neumann data, hyperbolic: `u(T)`).
    #[serde(default)]
    pub g: Option<DataSource>,
    #[serde(default)]
    pub hyperbolic_term: AffineTerm,
    #[serde(default)]
    pub resonance_tol: Option<f64>,
}

impl ProblemConfig {
    /// Horizon seen by the solver.
    pub fn effective_horizon(&self) -> f64 {
        match self.kind {
            Kind::Parabolic => self.horizon / self.a2,
            _ => self.horizon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumConfig {
    Sine1d {
        n_modes: usize,
        #[serde(default = "one")]
        length: f64,
    },
    SineRect {
        nx: usize,
        ny: usize,
        #[serde(default = "one")]
        lx: f64,
        #[serde(default = "one")]
        ly: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Auto,
    ClosedForm,
    Stepwise,
}

impl From<ModeName> for EvaluationMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Auto => EvaluationMode::Auto,
            ModeName::ClosedForm => EvaluationMode::ClosedForm,
            ModeName::Stepwise => EvaluationMode::Stepwise,
        }
    }
}

fn default_cap() -> u64 {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub mode: ModeName,
    /// Defaults to the last checkpoint.
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub tol: f64,
    /// Sobolev index of the stopping norm; defaults to the iteration space.
    #[serde(default)]
    pub stop_scale: Option<f64>,
    /// Largest step count that may be reached by repeated application.
    #[serde(default = "default_cap")]
    pub stepwise_cap: u64,
}

impl ScheduleConfig {
    pub fn max_steps(&self) -> u64 {
        self.max_steps
            .unwrap_or_else(|| self.checkpoints.last().copied().unwrap_or(0))
    }
}

/// Additive noise on every data vector; `g` uses `seed + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub eps: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub norm_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerConfig {
    /// Source weight `G(lambda) = (1 + lambda^2)^{q/2}`.
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default)]
    pub source_scale: f64,
    /// Source constant; fitted to the noise-free reference when absent.
    #[serde(default)]
    pub m: Option<f64>,
}

impl Default for RegularizerConfig {
    fn default() -> Self {
        RegularizerConfig {
            q: 1.0,
            source_scale: 0.0,
            m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
    /// Standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub spectrum: SpectrumConfig,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub regularizer: Option<RegularizerConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub modes: Option<usize>,
    pub steps: Option<u64>,
    pub seed: Option<u64>,
    pub eps: Option<f64>,
    pub gamma: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl ExperimentConfig {
    /// Built-in experiment for each problem kind.
    pub fn defaults(kind: Kind) -> Self {
        let (problem, spectrum, checkpoints) = match kind {
            Kind::Elliptic => (
                ProblemConfig {
                    kind,
                    horizon: 1.0,
                    gamma: None,
                    a2: 1.0,
                    f: DataSource::Zero,
                    g: Some(DataSource::UnitMode { k: 1 }),
                    hyperbolic_term: AffineTerm::Derived,
                    resonance_tol: None,
                },
                SpectrumConfig::Sine1d {
                    n_modes: 3,
                    length: 1.0,
                },
                vec![100, 1_000, 100_000, 1_000_000, 100_000_000, 1_000_000_000],
            ),
            Kind::Hyperbolic => (
                ProblemConfig {
                    kind,
                    // irrational multiple of the period keeps every sine mode away from resonance
                    horizon: std::f64::consts::FRAC_1_SQRT_2,
                    gamma: None,
                    a2: 1.0,
                    f: DataSource::Zero,
                    g: Some(DataSource::UnitMode { k: 1 }),
                    hyperbolic_term: AffineTerm::Derived,
                    resonance_tol: None,
                },
                SpectrumConfig::Sine1d {
                    n_modes: 8,
                    length: 1.0,
                },
                vec![10, 100, 1_000, 10_000, 100_000, 1_000_000],
            ),
            Kind::Parabolic => (
                ProblemConfig {
                    kind,
                    horizon: 0.0625,
                    gamma: Some(1.0),
                    a2: 1.0,
                    f: DataSource::ParabolicTerminal {
                        u0: Box::new(DataSource::Profile {
                            params: ProfileParams::default(),
                        }),
                    },
                    g: None,
                    hyperbolic_term: AffineTerm::Derived,
                    resonance_tol: None,
                },
                SpectrumConfig::Sine1d {
                    n_modes: 32,
                    length: 1.0,
                },
                vec![10, 1_000, 10_000, 100_000, 1_000_000],
            ),
        };
        ExperimentConfig {
            problem,
            spectrum,
            schedule: ScheduleConfig {
                checkpoints,
                mode: ModeName::Auto,
                max_steps: None,
                tol: 0.0,
                stop_scale: None,
                stepwise_cap: default_cap(),
            },
            noise: None,
            regularizer: None,
            output: OutputConfig::default(),
        }
    }

    pub fn from_json(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| BenchError::config(format!("config JSON: {e}")))?;
        cfg.problem.f.resolve_paths(base);
        if let Some(g) = &mut cfg.problem.g {
            g.resolve_paths(base);
        }
        if let Some(p) = &mut cfg.output.path {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&text, base)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::report::to_json(self)
    }

    pub fn apply(&mut self, ov: &Overrides) -> Result<()> {
        if let Some(n) = ov.modes {
            match &mut self.spectrum {
                SpectrumConfig::Sine1d { n_modes, .. } => *n_modes = n,
                SpectrumConfig::SineRect { nx, ny, .. } => {
                    *nx = n;
                    *ny = n;
                }
            }
        }
        if let Some(steps) = ov.steps {
            self.schedule.max_steps = Some(steps);
            if self.schedule.checkpoints.is_empty() {
                self.schedule.checkpoints = vec![steps];
            }
        }
        if let Some(eps) = ov.eps {
            let seed = ov.seed.or(self.noise.as_ref().map(|n| n.seed)).unwrap_or(0);
            let norm_scale = self.noise.as_ref().map_or(0.0, |n| n.norm_scale);
            self.noise = Some(NoiseConfig { eps, seed, norm_scale });
        } else if let (Some(seed), Some(noise)) = (ov.seed, self.noise.as_mut()) {
            noise.seed = seed;
        }
        if let Some(g) = ov.gamma {
            if self.problem.kind != Kind::Parabolic {
                return Err(BenchError::config("--gamma applies to the parabolic problem only"));
            }
            self.problem.gamma = Some(g);
        }
        if let Some(out) = &ov.out {
            self.output.path = Some(out.clone());
        }
        if let Some(f) = ov.format {
            self.output.format = f;
        }
        Ok(())
    }

    /// Checks everything that can be checked before building the model.
    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        if !(p.horizon > 0.0) || !p.horizon.is_finite() {
            return Err(BenchError::config("horizon must be positive"));
        }
        if !(p.a2 > 0.0) || !p.a2.is_finite() {
            return Err(BenchError::config("a2 must be positive"));
        }
        match p.kind {
            Kind::Parabolic => {
                let g = p.gamma.ok_or_else(|| BenchError::config("parabolic problem needs gamma"))?;
                if !(g > 0.0) || !g.is_finite() {
                    return Err(BenchError::config("gamma must be positive"));
                }
            }
            Kind::Elliptic | Kind::Hyperbolic => {
                if p.g.is_none() {
                    return Err(BenchError::config("this problem needs a second data vector g"));
                }
                if p.gamma.is_some() {
                    return Err(BenchError::config("gamma applies to the parabolic problem only"));
                }
            }
        }
        p.f.validate()?;
        if let Some(g) = &p.g {
            g.validate()?;
        }
        match self.spectrum {
            SpectrumConfig::Sine1d { n_modes, length } => {
                if n_modes == 0 || !(length > 0.0) {
                    return Err(BenchError::config("spectrum needs n_modes >= 1 and a positive length"));
                }
            }
            SpectrumConfig::SineRect { nx, ny, lx, ly } => {
                if nx == 0 || ny == 0 || !(lx > 0.0) || !(ly > 0.0) {
                    return Err(BenchError::config("spectrum needs nx, ny >= 1 and positive lengths"));
                }
            }
        }
        let s = &self.schedule;
        if s.checkpoints.first() == Some(&0) || s.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(BenchError::config("checkpoints must be strictly ascending and at least 1"));
        }
        if !(s.tol >= 0.0) {
            return Err(BenchError::config("tol must be non-negative"));
        }
        if s.mode == ModeName::Stepwise && s.max_steps().min(s.checkpoints.last().copied().unwrap_or(0)) > s.stepwise_cap {
            return Err(BenchError::config(format!(
                "stepwise evaluation is capped at {} steps; use closed_form or auto",
                s.stepwise_cap
            )));
        }
        if let Some(n) = &self.noise {
            if !(n.eps > 0.0) || !n.eps.is_finite() {
                return Err(BenchError::config("noise eps must be positive"));
            }
        }
        if let Some(r) = &self.regularizer {
            if !(r.q > 0.0) || !(r.source_scale >= 0.0) || r.m.is_some_and(|m| !(m >= 0.0)) {
                return Err(BenchError::config("regularizer needs q > 0, source_scale >= 0, m >= 0"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for k in [Kind::Elliptic, Kind::Hyperbolic, Kind::Parabolic] {
            ExperimentConfig::defaults(k).validate().unwrap();
        }
    }

    #[test]
    fn json_round_trip_and_relative_paths() {
        let cfg = ExperimentConfig::defaults(Kind::Parabolic);
        let text = cfg.to_json().unwrap();
        assert_eq!(ExperimentConfig::from_json(&text, Path::new("/base")).unwrap(), cfg);

        let mut with_grid = cfg;
        with_grid.problem.f = DataSource::Grid {
            path: "data.csv".into(),
            boundary: BoundaryPolicy::Warn,
        };
        let back = ExperimentConfig::from_json(&with_grid.to_json().unwrap(), Path::new("/base")).unwrap();
        assert_eq!(
            back.problem.f,
            DataSource::Grid {
                path: "/base/data.csv".into(),
                boundary: BoundaryPolicy::Warn
            }
        );
        assert!(back.validate().is_err());
    }

    #[test]
    fn unknown_fields_and_generators_are_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&ExperimentConfig::defaults(Kind::Elliptic).to_json().unwrap()).unwrap();
        v["problem"]["g"] = serde_json::json!({"type": "no_such_generator"});
        let e = ExperimentConfig::from_json(&v.to_string(), Path::new(".")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let mut v: serde_json::Value = serde_json::from_str(&ExperimentConfig::defaults(Kind::Elliptic).to_json().unwrap()).unwrap();
        v["problem"]["typo"] = serde_json::json!(1);
        assert!(ExperimentConfig::from_json(&v.to_string(), Path::new(".")).is_err());
    }

    #[test]
    fn flags_override_config() {
        let mut cfg = ExperimentConfig::defaults(Kind::Parabolic);
        cfg.apply(&Overrides {
            modes: Some(12),
            steps: Some(500),
            eps: Some(1e-3),
            seed: Some(9),
            gamma: Some(1.5),
            format: Some(OutputFormat::Json),
            out: Some("r.json".into()),
        })
        .unwrap();
        assert_eq!(cfg.spectrum, SpectrumConfig::Sine1d { n_modes: 12, length: 1.0 });
        assert_eq!(cfg.schedule.max_steps(), 500);
        assert_eq!(cfg.noise, Some(NoiseConfig { eps: 1e-3, seed: 9, norm_scale: 0.0 }));
        assert_eq!(cfg.problem.gamma, Some(1.5));
        assert_eq!(cfg.output.format, OutputFormat::Json);

        let mut e = ExperimentConfig::defaults(Kind::Elliptic);
        assert!(e.apply(&Overrides { gamma: Some(1.0), ..Overrides::default() }).is_err());
    }

    #[test]
    fn validation_failures() {
        let mut cfg = ExperimentConfig::defaults(Kind::Elliptic);
        cfg.problem.g = None;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::defaults(Kind::Parabolic);
        cfg.problem.gamma = None;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::defaults(Kind::Elliptic);
        cfg.schedule.mode = ModeName::Stepwise;
        assert!(cfg.validate().is_err());
        cfg.schedule.checkpoints = vec![10, 5];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::defaults(Kind::Parabolic);
        cfg.problem.a2 = 8.0;
        assert_eq!(cfg.problem.effective_horizon(), 0.0625 / 8.0);
    }
}
