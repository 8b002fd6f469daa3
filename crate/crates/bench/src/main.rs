use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use illposed_bench::config::{ExperimentConfig, Kind, Overrides, SpectrumConfig};
use illposed_bench::error::{BenchError, Result};
use illposed_bench::harness::{self, Table1Options, Table2Options};
use illposed_bench::report::{emit, render_report, render_table, to_json, OutputFormat};

#[derive(Parser)]
#[command(name = "illposed", version, about = "Iterative solvers for ill-posed Cauchy and backward problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of modes (per axis on a rectangle).
    #[arg(long)]
    modes: Option<usize>,
    /// Maximum number of iteration steps.
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Noise level added to the data.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Output file (written atomically); standard output otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            modes: self.modes,
            steps: self.steps,
            seed: self.seed,
            eps: self.eps,
            gamma: self.gamma,
            out: self.out.clone(),
            format: self.format,
        }
    }

    fn reject(&self, flags: &[&str]) -> Result<()> {
        for f in flags {
            let set = match *f {
                "--config" => self.config.is_some(),
                "--seed" => self.seed.is_some(),
                "--eps" => self.eps.is_some(),
                "--gamma" => self.gamma.is_some(),
                _ => false,
            };
            if set {
                return Err(BenchError::config(format!("{f} is not used by this command")));
            }
        }
        Ok(())
    }

    fn experiment(&self, kind: Kind) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let cfg = ExperimentConfig::load(p)?;
                if cfg.problem.kind != kind {
                    return Err(BenchError::config(format!(
                        "{} holds a {:?} problem, not {:?}",
                        p.display(),
                        cfg.problem.kind,
                        kind
                    )));
                }
                cfg
            }
            None => ExperimentConfig::defaults(kind),
        };
        cfg.apply(&self.overrides())?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Cauchy problem for the elliptic equation.
    Elliptic(Common),
    /// Dirichlet problem for the wave equation.
    Hyperbolic(Common),
    /// Backward heat problem.
    Parabolic(Common),
    /// Backward heat errors for a^2 = 8 and a^2 = 2.
    Table1(Common),
    /// Elliptic errors for g = e_1, e_2, e_3.
    Table2(Common),
    /// Spectral cutoff error bound and measured error.
    Regularize {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "elliptic")]
        kind: Kind,
    },
    /// Solution norms for unit data, mode by mode.
    DemoIllposed {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "elliptic")]
        kind: Kind,
    },
}

fn cap(checkpoints: &mut Vec<u64>, steps: Option<u64>) {
    if let Some(s) = steps {
        checkpoints.retain(|&k| k < s);
        checkpoints.push(s);
    }
}

fn run(cli: Cli) -> Result<Option<String>> {
    match cli.command {
        Command::Elliptic(c) => experiment(&c, Kind::Elliptic),
        Command::Hyperbolic(c) => experiment(&c, Kind::Hyperbolic),
        Command::Parabolic(c) => experiment(&c, Kind::Parabolic),
        Command::Table1(c) => {
            c.reject(&["--config", "--seed", "--eps"])?;
            let mut opts = Table1Options::default();
            if let Some(g) = c.gamma {
                opts.gamma = g;
            }
            if let Some(n) = c.modes {
                opts.spectrum = match opts.spectrum {
                    SpectrumConfig::SineRect { lx, ly, .. } => SpectrumConfig::SineRect { nx: n, ny: n, lx, ly },
                    SpectrumConfig::Sine1d { length, .. } => SpectrumConfig::Sine1d { n_modes: n, length },
                };
            }
            cap(&mut opts.checkpoints, c.steps);
            let t = harness::run_table1_analog(&opts)?;
            emit(render_table(&t, c.format.unwrap_or_default())?, c.out.as_deref())
        }
        Command::Table2(c) => {
            c.reject(&["--config", "--seed", "--eps", "--gamma"])?;
            let mut opts = Table2Options::default();
            if let Some(n) = c.modes {
                opts.n_modes = n;
            }
            cap(&mut opts.checkpoints, c.steps);
            let t = harness::run_table2(&opts)?;
            emit(render_table(&t, c.format.unwrap_or_default())?, c.out.as_deref())
        }
        Command::Regularize { common, kind } => {
            let mut cfg = common.experiment(kind)?;
            if cfg.noise.is_none() {
                cfg.apply(&Overrides {
                    eps: Some(1e-6),
                    ..Overrides::default()
                })?;
            }
            let out = harness::run_regularize(&cfg)?;
            warn(&out.warnings);
            let frame = out.frame();
            let text = match cfg.output.format {
                OutputFormat::Csv => frame.csv()?,
                OutputFormat::Markdown => frame.markdown(),
                OutputFormat::Json => to_json(&serde_json::json!({
                    "eps_prime": out.eps_prime,
                    "n_star": out.n_star.n_star,
                    "bound_at_star": out.n_star.bound_at_star,
                    "retained": out.n_star.retained,
                    "curve": out.curve.iter().map(|p| serde_json::json!({
                        "n": p.n, "retained": p.retained, "tail": p.tail,
                        "amplification": p.amplification, "bound": p.bound,
                        "true_error": p.true_error,
                    })).collect::<Vec<_>>(),
                }))?,
            };
            emit(text, cfg.output.path.as_deref())
        }
        Command::DemoIllposed { common, kind } => {
            common.reject(&["--seed", "--eps", "--gamma"])?;
            let cfg = common.experiment(kind)?;
            let model = harness::build_model(&cfg.spectrum)?;
            let rows = harness::run_demo(kind, &model, cfg.problem.effective_horizon())?;
            let frame = harness::demo_frame(kind, &model, &rows);
            let text = match cfg.output.format {
                OutputFormat::Markdown => frame.markdown(),
                _ => frame.csv()?,
            };
            emit(text, cfg.output.path.as_deref())
        }
    }
}

fn experiment(c: &Common, kind: Kind) -> Result<Option<String>> {
    let cfg = c.experiment(kind)?;
    let out = harness::run_experiment(&cfg)?;
    warn(&out.record.warnings);
    emit(render_report(&out.record, cfg.output.format)?, cfg.output.path.as_deref())
}

fn warn(warnings: &[String]) {
    for w in warnings {
        eprintln!("illposed: warning: {w}");
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Some(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("illposed: {} error: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
