use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ecosense::accounting::realtime_check;
use ecosense::harness::{
    self, calibrate, emit, expected_metrics, load_config, presets, sweep, sweep_csv,
    CalibrationTarget, Grid, HarnessError, ReportFormat, Scenario,
};
use ecosense::pipeline::RoutingMode;

const SEED_VAR: &str = "ECOSENSE_SEED";

#[derive(Parser)]
#[command(name = "ecosense", version, about = "Edge-cloud collaborative inference simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario config and print its digest.
    Validate { config: String },
    /// Simulate a scenario under one or more routing modes.
    Run {
        config: String,
        #[arg(long, value_delimiter = ',', default_values_t = RoutingMode::ALL.map(|m| m.as_str().to_string()))]
        modes: Vec<String>,
        /// Output file; `.csv` selects CSV. Prints JSON to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the collaborative mode over a grid of one numeric parameter.
    Sweep {
        config: String,
        #[arg(long)]
        param: String,
        /// `start:stop:step`, inclusive.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve free parameters so expected DTVR and ECR hit the targets.
    Calibrate {
        config: String,
        #[arg(long)]
        dtvr: f64,
        #[arg(long)]
        ecr: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List bundled platform profiles with their real-time verdicts.
    Platforms,
}

/// `preset:<name>` selects a bundled scenario; anything else is a path.
fn load(spec: &str) -> Result<Scenario, HarnessError> {
    let scenario = match spec.strip_prefix("preset:") {
        Some(name) => Scenario::preset(name)?,
        None => load_config(spec)?,
    };
    match std::env::var(SEED_VAR) {
        Ok(v) => {
            let seed = v
                .trim()
                .parse::<u64>()
                .map_err(|_| HarnessError::Validation {
                    field: SEED_VAR.into(),
                    reason: format!("`{v}` is not an unsigned integer"),
                })?;
            Ok(scenario.with_seed(seed))
        }
        Err(_) => Ok(scenario),
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| HarnessError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn parse_modes(raw: &[String]) -> Result<BTreeSet<RoutingMode>, HarnessError> {
    let modes = raw
        .iter()
        .map(|m| m.trim().parse::<RoutingMode>())
        .collect::<Result<BTreeSet<_>, _>>()
        .map_err(|reason| HarnessError::Validation {
            field: "modes".into(),
            reason,
        })?;
    if modes.is_empty() {
        return Err(HarnessError::Validation {
            field: "modes".into(),
            reason: "at least one mode is required".into(),
        });
    }
    Ok(modes)
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Validate { config } => {
            let s = load(&config)?;
            println!("ok {} {}", s.config.name, s.config.digest());
        }
        Command::Run { config, modes, out } => {
            let s = load(&config)?;
            let report = harness::run(&s, &parse_modes(&modes)?)?;
            match out {
                Some(path) => emit(&report, ReportFormat::from_path(&path), &path)?,
                None => write_out(None, &report.to_json())?,
            }
        }
        Command::Sweep {
            config,
            param,
            grid,
            out,
        } => {
            let s = load(&config)?;
            let grid: Grid = grid.parse()?;
            let points = sweep(&s.config, &param, &grid)?;
            write_out(out.as_deref(), &sweep_csv(&param, &points))?;
        }
        Command::Calibrate {
            config,
            dtvr,
            ecr,
            out,
        } => {
            let s = load(&config)?;
            let target = CalibrationTarget {
                target_dtvr: dtvr,
                target_ecr: ecr,
            };
            let calibrated = calibrate(target, &s)?;
            let expected = expected_metrics(&Scenario::from_config(calibrated.clone())?);
            eprintln!(
                "p_hard {} scale {} joules_per_byte {:e} -> expected dtvr {} ecr {}",
                calibrated.difficulty.p_hard,
                calibrated.crops.scale,
                calibrated.channel.joules_per_byte,
                expected.dtvr,
                expected.ecr
            );
            write_out(out.as_deref(), &calibrated.to_pretty_json())?;
        }
        Command::Platforms => {
            let bound = presets::realtime_bound_ms();
            let mut text = format!(
                "{:<12} {:<6} {:>11} {:>9} {:>10}  realtime (< {bound} ms)\n",
                "platform", "role", "latency_ms", "power_w", "joules"
            );
            for rec in presets::platform_table() {
                let p = rec.profile().map_err(|e| HarnessError::Validation {
                    field: "platforms".into(),
                    reason: e.to_string(),
                })?;
                let role = match p.role() {
                    ecosense::domain::PlatformRole::Edge => "edge",
                    ecosense::domain::PlatformRole::Cloud => "cloud",
                };
                let verdict = if realtime_check(&p, bound) { "pass" } else { "fail" };
                text.push_str(&format!(
                    "{:<12} {:<6} {:>11} {:>9} {:>10.5}  {verdict}\n",
                    p.name(),
                    role,
                    p.latency_ms(),
                    p.power_w(),
                    p.joules_per_inference()
                ));
            }
            write_out(None, &text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
