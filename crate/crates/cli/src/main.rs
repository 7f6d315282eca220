use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nfcs::experiments::{run_and_write, ExperimentConfig, ExperimentId, ValidationGrid};
use nfcs::wigner::{default_extent, negativity_volume, wigner_grid};
use nfcs::{build_state, validate_oracles, Complex64, Error, FilterSet, FockAmplitudes, StateKind, StateParams};
use serde_json::json;

/// Phase-estimation experiments with number-state filtered coherent states.
#[derive(Parser)]
#[command(name = "nfcs", version, about)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a figure experiment and write its CSV table.
    Run {
        /// fig2..fig7 or custom; may be omitted when the config names it.
        #[arg(long)]
        experiment: Option<String>,
        /// JSON config; figure defaults are used for anything it leaves out.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Cross-check the Fisher-information routes over a parameter grid.
    Validate {
        /// JSON grid; the built-in grid is used when omitted.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Also write the per-point table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a state and print its moments.
    State {
        #[command(flatten)]
        state: StateArgs,
        /// Print every Fock amplitude as a JSON record.
        #[arg(long)]
        dump_amps: bool,
    },
    /// Sample the Wigner function on a grid and report the negativity volume.
    Wigner {
        #[command(flatten)]
        state: StateArgs,
        /// Half-width of the square window; defaults to |alpha| + 5.
        #[arg(long)]
        extent: Option<f64>,
        #[arg(long, default_value_t = nfcs::wigner::DEFAULT_STEP)]
        step: f64,
        /// CSV file for the sampled grid.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct StateArgs {
    /// coherent, filtered, even, odd, squeezed_vacuum or fock (aliases: snfcs, ecs, ocs, sv).
    #[arg(long)]
    kind: String,
    /// `re`, `re,im` or `abs@t` for abs·e^{iπt}.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Comma-separated Fock indices to remove.
    #[arg(long, value_delimiter = ',')]
    filter: Vec<usize>,
    /// Squeezing parameter.
    #[arg(long)]
    r: Option<f64>,
    /// Photon number of a Fock state.
    #[arg(long)]
    n: Option<usize>,
    /// Truncation dimension override.
    #[arg(long)]
    dim: Option<usize>,
}

enum Failure {
    Validation,
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidInput(_) | Error::Json(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64, Failure> {
    let bad = || Failure::Config(format!("cannot parse complex number '{s}'"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let z = if let Some((abs, t)) = s.split_once('@') {
        Complex64::from_polar(num(abs)?, num(t)? * std::f64::consts::PI)
    } else if let Some((re, im)) = s.split_once(',') {
        Complex64::new(num(re)?, num(im)?)
    } else {
        Complex64::new(num(s)?, 0.0)
    };
    Ok(z)
}

impl StateArgs {
    fn build(&self) -> Result<FockAmplitudes, Failure> {
        let kind: StateKind = self.kind.parse()?;
        let alpha = self.alpha.as_deref().map(parse_complex).transpose()?;
        let filter = if self.filter.is_empty() { None } else { Some(FilterSet::new(self.filter.iter().copied())?) };
        if filter.is_some() && kind != StateKind::Filtered {
            return Err(Failure::Config(format!("--filter only applies to filtered states, not {}", kind.as_str())));
        }
        let params = StateParams { alpha: alpha.map(|a| [a.re, a.im]), filter, r: self.r, n: self.n };
        Ok(build_state(kind, &params, self.dim)?)
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { experiment, config, out } => {
            let id = experiment.as_deref().map(str::parse::<ExperimentId>).transpose()?;
            let cfg = match (config, id) {
                (Some(path), id) => {
                    let cfg = ExperimentConfig::from_json(&read(&path)?)?;
                    if let Some(id) = id {
                        if id != cfg.experiment {
                            return Err(Failure::Config(format!(
                                "--experiment {id} does not match config experiment {}",
                                cfg.experiment
                            )));
                        }
                    }
                    cfg
                }
                (None, Some(id)) => ExperimentConfig::preset(id),
                (None, None) => return Err(Failure::Config("give --experiment, --config or both".into())),
            };
            let path = run_and_write(&cfg, &out)?;
            println!("{}", path.display());
        }
        Command::Validate { grid, out } => {
            let grid = match grid {
                Some(path) => ValidationGrid::from_json(&read(&path)?)?,
                None => ValidationGrid::default(),
            };
            let report = validate_oracles(&grid)?;
            if let Some(path) = out {
                report.table.write_atomic(&path)?;
            }
            println!("{} points, max relative deviation {:.3e}", report.table.rows.len(), report.max_deviation);
            if !report.passed() {
                for f in &report.failures {
                    eprintln!("FAIL {f}");
                }
                return Err(Failure::Validation);
            }
        }
        Command::State { state, dump_amps } => {
            let s = state.build()?;
            if dump_amps {
                println!("{}", serde_json::to_string_pretty(&s.to_record()).map_err(Error::from)?);
            } else {
                let m = s.moments();
                let summary = json!({
                    "kind": s.kind().as_str(),
                    "dim": s.dim(),
                    "mean_a": [m.mean_a.re, m.mean_a.im],
                    "mean_a2": [m.mean_a2.re, m.mean_a2.im],
                    "mean_n": m.mean_n,
                });
                println!("{}", serde_json::to_string_pretty(&summary).map_err(Error::from)?);
            }
        }
        Command::Wigner { state, extent, step, out } => {
            let s = state.build()?;
            let extent = extent.unwrap_or_else(|| default_extent(&s));
            let nv = negativity_volume(&s, extent, step)?;
            if let Some(path) = out {
                let grid = wigner_grid(&s, extent, step)?;
                nfcs::experiments::write_file_atomic(&path, |f| grid.write_csv(f))?;
            }
            let summary = json!({
                "n_v": nv.n_v,
                "negative_part": nv.negative_part,
                "extent": nv.extent,
                "step": nv.step,
                "convergence_estimate": nv.convergence_estimate,
                "flagged": nv.flagged,
            });
            println!("{}", serde_json::to_string_pretty(&summary).map_err(Error::from)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
