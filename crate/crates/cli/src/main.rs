//! `nmeskit` — closed-loop NMES control design at the desk: simulate the
//! knee-joint plant, identify it from session logs, tune RISE gains with the
//! genetic optimizer, and evaluate tracking performance.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use nmeskit_core::controller::RiseGains;
use nmeskit_core::iga::IgaConfig;
use nmeskit_core::reference::TrajectoryKind;

use commands::{GainsArg, TuneSystem};
use config::{load_config, Profile, RunConfig};

/// Exit codes: 0 success, 2 configuration error, 3 data error,
/// 4 infeasible gains or diverged simulation.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        Self { code: 2, message }
    }

    pub fn data(message: String) -> Self {
        Self { code: 3, message }
    }

    pub fn infeasible(message: String) -> Self {
        Self { code: 4, message }
    }

    pub fn diverged(err: nmeskit_core::Error) -> Self {
        Self {
            code: 4,
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum TrajectoryArg {
    Sine,
    Step,
}

impl From<TrajectoryArg> for TrajectoryKind {
    fn from(arg: TrajectoryArg) -> Self {
        match arg {
            TrajectoryArg::Sine => TrajectoryKind::Sine,
            TrajectoryArg::Step => TrajectoryKind::SmoothStep,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum PresetArg {
    /// In-session tuning: N_p = 8, M_r = 0.5, N_g = 6.
    First,
    /// Offline tuning before a later session: N_p = 10, M_r = 0.3, N_g = 30.
    Later,
}

#[derive(Parser, Debug)]
#[command(
    name = "nmeskit",
    about = "NMES knee-joint control design: simulate, identify, tune, evaluate, report",
    version
)]
struct Cli {
    /// JSON configuration file; defaults apply for anything omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Master seed; reseeds excitation, training, and tuning deterministically.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output directory (default "out").
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Session-log directory (default "sessions").
    #[arg(long, global = true, value_name = "DIR")]
    sessions: Option<PathBuf>,

    /// Subject profile; sci lowers the step target to 30 deg and shortens
    /// tests to 40 s.
    #[arg(long, global = true, value_enum)]
    profile: Option<Profile>,

    /// Reference trajectory; commands that accept it default to sine
    /// (tune runs both when omitted).
    #[arg(long, global = true, value_enum)]
    trajectory: Option<TrajectoryArg>,

    /// Tuner preset described in the session protocol.
    #[arg(long, global = true, value_enum)]
    preset: Option<PresetArg>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Open-loop plant rollout with a constant pulse width (or --excite).
    Sim {
        /// Constant pulse width to apply (us).
        #[arg(long, default_value_t = 200.0)]
        pw: f64,
        /// Rollout duration (s).
        #[arg(long, default_value_t = 5.0)]
        duration: f64,
        /// Apply the configured random excitation instead of a constant.
        #[arg(long)]
        excite: bool,
    },
    /// Train a NARX model from the subject's session logs.
    Identify {
        /// Record a synthetic identification session from the plant first.
        #[arg(long)]
        synthetic: bool,
        /// Use only control sessions recorded with tuned gains.
        #[arg(long)]
        control_only: bool,
    },
    /// Tune RISE gains with the genetic optimizer.
    Tune {
        /// Identified model to tune against.
        #[arg(long, value_name = "PATH")]
        model: Option<PathBuf>,
        /// Tune directly against the synthetic plant.
        #[arg(long)]
        against_plant: bool,
    },
    /// Closed-loop evaluation of a gain set against the synthetic plant.
    Evaluate {
        /// Inline gains "alpha1,alpha2,ks,beta".
        #[arg(long, value_name = "G4")]
        gains: Option<String>,
        /// Gains file written by tune.
        #[arg(long, value_name = "PATH")]
        gains_file: Option<PathBuf>,
        /// Also run the shipped empirical gain sets and tabulate both arms.
        #[arg(long)]
        compare_empirical: bool,
        /// Record the run as a control session with this index.
        #[arg(long, value_name = "N")]
        record_session: Option<u32>,
    },
    /// Recompute metrics from an emitted CSV log, or summarize an audit log.
    Report {
        /// Session or evaluation CSV to analyze.
        #[arg(long, value_name = "PATH")]
        log: Option<PathBuf>,
        /// Tuning audit log to summarize.
        #[arg(long, value_name = "PATH")]
        audit: Option<PathBuf>,
    },
}

fn parse_inline_gains(text: &str) -> Result<RiseGains, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config(format!("cannot parse gains {text:?}")))?;
    if values.len() != 4 {
        return Err(CliError::config(format!(
            "expected 4 comma-separated gains (alpha1,alpha2,ks,beta), got {}",
            values.len()
        )));
    }
    let gains = RiseGains::new(values[0], values[1], values[2], values[3]);
    gains
        .validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    Ok(gains)
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let env_vars: Vec<(String, String)> = std::env::vars().collect();
    let mut env_vars = env_vars;
    if let Some(profile) = cli.profile {
        // the flag wins over both the file and the environment
        env_vars.retain(|(k, _)| k != "NMESKIT_PROFILE");
        env_vars.push((
            "NMESKIT_PROFILE".into(),
            match profile {
                Profile::Healthy => "healthy".into(),
                Profile::Sci => "sci".into(),
            },
        ));
    }
    let mut config = load_config(cli.config.as_deref(), &env_vars)?;
    if let Some(seed) = cli.seed {
        config.apply_master_seed(seed);
    }
    if let Some(kind) = cli.trajectory {
        config.trajectory.kind = kind.into();
    }
    if let Some(dir) = &cli.out {
        config.out_dir = dir.clone();
    }
    if let Some(dir) = &cli.sessions {
        config.sessions_dir = dir.clone();
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = effective_config(&cli)?;
    let preset = cli.preset.map(|p| match p {
        PresetArg::First => IgaConfig::preset_first(config.iga.seed),
        PresetArg::Later => IgaConfig::preset_later(config.iga.seed),
    });

    match &cli.command {
        Command::Sim {
            pw,
            duration,
            excite,
        } => commands::cmd_sim(&config, *pw, *duration, *excite),
        Command::Identify {
            synthetic,
            control_only,
        } => commands::cmd_identify(&config, *synthetic, *control_only),
        Command::Tune {
            model,
            against_plant,
        } => {
            let system = match (model, against_plant) {
                (Some(_), true) => {
                    return Err(CliError::config(
                        "--model and --against-plant are mutually exclusive".into(),
                    ))
                }
                (Some(path), false) => TuneSystem::Model(path.clone()),
                (None, true) => TuneSystem::AgainstPlant,
                (None, false) => {
                    return Err(CliError::config(
                        "tune needs --model PATH or --against-plant".into(),
                    ))
                }
            };
            commands::cmd_tune(
                &config,
                system,
                cli.trajectory.map(TrajectoryKind::from),
                preset,
            )
        }
        Command::Evaluate {
            gains,
            gains_file,
            compare_empirical,
            record_session,
        } => {
            let gains_arg = match (gains, gains_file) {
                (Some(_), Some(_)) => {
                    return Err(CliError::config(
                        "--gains and --gains-file are mutually exclusive".into(),
                    ))
                }
                (Some(text), None) => GainsArg::Inline(parse_inline_gains(text)?),
                (None, Some(path)) => GainsArg::File(path.clone()),
                (None, None) => {
                    return Err(CliError::config(
                        "evaluate needs --gains A1,A2,KS,BETA or --gains-file PATH".into(),
                    ))
                }
            };
            let kind = cli
                .trajectory
                .map(TrajectoryKind::from)
                .unwrap_or(TrajectoryKind::Sine);
            commands::cmd_evaluate(
                &config,
                &gains_arg,
                kind,
                *compare_empirical,
                *record_session,
            )
        }
        Command::Report { log, audit } => match (log, audit) {
            (Some(path), None) => {
                let kind = cli
                    .trajectory
                    .map(TrajectoryKind::from)
                    .unwrap_or(TrajectoryKind::Sine);
                commands::cmd_report_log(&config, path, kind)
            }
            (None, Some(path)) => commands::cmd_report_audit(path),
            _ => Err(CliError::config(
                "report needs exactly one of --log PATH or --audit PATH".into(),
            )),
        },
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {}", err.message);
        std::process::exit(err.code);
    }
}
