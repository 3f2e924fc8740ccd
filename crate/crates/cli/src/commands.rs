//! The five workflow commands: sim, identify, tune, evaluate, report.

use std::path::{Path, PathBuf};

use nmeskit_core::controller::RiseGains;
use nmeskit_core::ident::{
    build_regression_set, fit_metrics, free_run, train, FitMetrics, NarxModel, RegressionSet,
};
use nmeskit_core::iga::{self, IgaConfig, Individual};
use nmeskit_core::reference::{reference, TrajectoryKind};
use nmeskit_core::session::{
    avstd_op, generate_excitation, load_sessions, merge_sessions, parse_csv, rmse,
    run_closed_loop, run_open_loop, save_session, tec, AvStd, ClosedLoopRun, GainSource, LogKind,
    NarxSim, PlantSim, SessionLog, SimSystem, Tec, TecOptions, CONTROL_TS,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

/// Regression orders used by the command pipeline; one past output and one
/// past input gave the best time-utility trade-off.
const LAG_M: usize = 1;
const LAG_N: usize = 1;

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::data(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))
}

// ---------------------------------------------------------------------------
// sim
// ---------------------------------------------------------------------------

/// Open-loop plant rollout: constant pulse width, or the configured random
/// excitation with `--excite`.
pub fn cmd_sim(config: &RunConfig, pw: f64, duration_s: f64, excite: bool) -> Result<(), CliError> {
    if !excite && !(0.0..=400.0).contains(&pw) {
        return Err(CliError::config(format!(
            "pulse width must be in [0, 400] us, got {pw}"
        )));
    }
    if duration_s <= 0.0 {
        return Err(CliError::config("duration must be > 0".into()));
    }
    ensure_dir(&config.out_dir)?;

    let (series, ts) = if excite {
        (generate_excitation(&config.excitation), config.excitation.ts)
    } else {
        let n = (duration_s / CONTROL_TS).round() as usize;
        (vec![pw; n], CONTROL_TS)
    };
    let mut sys = PlantSim::new(config.plant, config.disturbance, ts)
        .map_err(|e| CliError::config(e.to_string()))?;
    let log = run_open_loop(&mut sys, &series).map_err(CliError::diverged)?;

    let path = config.out_dir.join("sim.csv");
    write_text(&path, &log.csv_string())?;
    println!(
        "sim: {} samples at {} s -> {}",
        log.rows.len(),
        ts,
        path.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// identify
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct IdentifyReport {
    format: &'static str,
    version: u32,
    subject: String,
    sessions_used: Vec<u32>,
    control_only: bool,
    sample_time_s: f64,
    pooled_rows: usize,
    /// Pearson correlation between pulse width and angle over the pooled data.
    corr_input_output: Option<f64>,
    one_step_train: FitMetrics,
    one_step_validation: FitMetrics,
    free_run_rmse_deg_per_session: Vec<f64>,
    epochs_run: usize,
    best_epoch: usize,
    best_val_mse: f64,
    warnings: Vec<String>,
}

/// Trains a NARX model from the subject's session logs (optionally generating
/// a synthetic identification session first) and writes the model plus a
/// metrics report.
pub fn cmd_identify(
    config: &RunConfig,
    synthetic: bool,
    control_only: bool,
) -> Result<(), CliError> {
    if synthetic {
        let series = generate_excitation(&config.excitation);
        let mut sys = PlantSim::new(config.plant, config.disturbance, config.excitation.ts)
            .map_err(|e| CliError::config(e.to_string()))?;
        let mut log = run_open_loop(&mut sys, &series).map_err(CliError::diverged)?;
        log.subject = config.subject.clone();
        log.session_index = next_session_index(&config.sessions_dir, &config.subject);
        log.pulse_amplitude_ma = Some(config.pulse_amplitude_ma);
        ensure_dir(&config.sessions_dir)?;
        let path = save_session(&config.sessions_dir, &log)
            .map_err(|e| CliError::data(e.to_string()))?;
        println!(
            "identify: recorded synthetic session {} -> {}",
            log.session_index,
            path.display()
        );
    }

    let logs = load_sessions(&config.sessions_dir, &config.subject)
        .map_err(|e| CliError::data(e.to_string()))?;
    let merged = merge_sessions(&logs, control_only).map_err(|e| CliError::data(e.to_string()))?;
    let usable: Vec<&SessionLog> = merged
        .iter()
        .copied()
        .filter(|log| log.rows.len() > LAG_M.max(LAG_N))
        .collect();
    if usable.is_empty() {
        return Err(CliError::data(format!(
            "no usable session logs for subject {:?} in {} (control_only = {control_only})",
            config.subject,
            config.sessions_dir.display()
        )));
    }
    let ts = usable[0].ts;
    if usable.iter().any(|log| (log.ts - ts).abs() > 1e-12) {
        return Err(CliError::data(
            "cannot pool sessions with mixed sampling periods; \
             use --control-only to select a uniform subset"
                .into(),
        ));
    }

    let mut sets = Vec::new();
    let mut u_all = Vec::new();
    let mut y_all = Vec::new();
    for log in &usable {
        let (u, y) = log.series();
        sets.push(
            build_regression_set(&u, &y, LAG_M, LAG_N)
                .map_err(|e| CliError::data(e.to_string()))?,
        );
        u_all.extend_from_slice(&u);
        y_all.extend_from_slice(&y);
    }
    let pooled = RegressionSet::pool(&sets).map_err(|e| CliError::data(e.to_string()))?;
    let (mut model, report) =
        train(&pooled, &config.train).map_err(|e| CliError::data(e.to_string()))?;
    model.sample_time_s = ts;

    ensure_dir(&config.out_dir)?;
    let model_path = config.out_dir.join("model.json");
    model
        .save(&model_path)
        .map_err(|e| CliError::data(e.to_string()))?;

    // one-step metrics on the chronological train/validation split
    let rows = pooled.rows();
    let val_start = rows - report.val_rows;
    let one_step = |range: std::ops::Range<usize>| -> Result<FitMetrics, CliError> {
        let actual: Vec<f64> = range
            .clone()
            .map(|k| pooled.targets[k] * model.output_scale)
            .collect();
        let predicted: Vec<f64> = range
            .map(|k| model.forward(pooled.row(k)).expect("row width"))
            .collect();
        fit_metrics(&actual, &predicted).map_err(|e| CliError::data(e.to_string()))
    };
    let one_step_train = one_step(0..val_start)?;
    let one_step_validation = one_step(val_start..rows)?;

    let mut free_run_rmse = Vec::new();
    for log in &usable {
        let (u, y) = log.series();
        let rmse_deg = match free_run(&model, &u, &y[..LAG_N]) {
            Ok(y_hat) => rmse(&y, &y_hat).map_err(|e| CliError::data(e.to_string()))?,
            Err(_) => f64::NAN, // diverged replay; reported as NaN, not fatal
        };
        free_run_rmse.push(rmse_deg);
    }

    let corr = fit_metrics(&u_all, &y_all)
        .map_err(|e| CliError::data(e.to_string()))?
        .pearson;
    let doc = IdentifyReport {
        format: "nmeskit-identify-report",
        version: 1,
        subject: config.subject.clone(),
        sessions_used: usable.iter().map(|l| l.session_index).collect(),
        control_only,
        sample_time_s: ts,
        pooled_rows: pooled.rows(),
        corr_input_output: corr,
        one_step_train,
        one_step_validation,
        free_run_rmse_deg_per_session: free_run_rmse,
        epochs_run: report.epochs.len(),
        best_epoch: report.best_epoch,
        best_val_mse: report.best_val_mse,
        warnings: report.warnings.clone(),
    };
    let report_path = config.out_dir.join("identify_report.json");
    write_json(&report_path, &doc)?;

    println!(
        "identify: {} sessions, {} pooled rows, corr {:.4}, one-step R2 train {:.4} / val {:.4}",
        doc.sessions_used.len(),
        doc.pooled_rows,
        doc.corr_input_output.unwrap_or(f64::NAN),
        doc.one_step_train.r_squared.unwrap_or(f64::NAN),
        doc.one_step_validation.r_squared.unwrap_or(f64::NAN),
    );
    println!(
        "identify: model -> {}, report -> {}",
        model_path.display(),
        report_path.display()
    );
    Ok(())
}

fn next_session_index(dir: &Path, subject: &str) -> u32 {
    let subject_dir = dir.join(subject);
    let mut max_index = 0;
    if let Ok(entries) = std::fs::read_dir(subject_dir) {
        for entry in entries.flatten() {
            if let Some(idx) = entry
                .file_name()
                .to_str()
                .and_then(|s| s.parse::<u32>().ok())
            {
                max_index = max_index.max(idx);
            }
        }
    }
    max_index + 1
}

// ---------------------------------------------------------------------------
// tune
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct GainsDocument {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub results: Vec<TuneEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TuneEntry {
    pub trajectory: TrajectoryKind,
    pub best: Individual,
    pub all_infeasible: bool,
    pub evaluations: usize,
    pub ranked: Vec<Individual>,
}

pub enum TuneSystem {
    AgainstPlant,
    Model(PathBuf),
}

fn kind_name(kind: TrajectoryKind) -> &'static str {
    match kind {
        TrajectoryKind::Sine => "sine",
        TrajectoryKind::SmoothStep => "step",
    }
}

/// Runs the genetic tuner per trajectory (both by default) against the plant
/// or an identified model, writing the gains file and per-run audit logs.
pub fn cmd_tune(
    config: &RunConfig,
    system: TuneSystem,
    trajectory: Option<TrajectoryKind>,
    preset: Option<IgaConfig>,
) -> Result<(), CliError> {
    let iga_config = match preset {
        Some(preset) => IgaConfig {
            bounds: config.iga.bounds,
            seed: config.iga.seed,
            fitness_horizon_s: config.iga.fitness_horizon_s,
            saturation_penalty: config.iga.saturation_penalty,
            condition_penalty: config.iga.condition_penalty,
            ..preset
        },
        None => config.iga,
    };

    let kinds: Vec<TrajectoryKind> = match trajectory {
        Some(kind) => vec![kind],
        None => vec![TrajectoryKind::Sine, TrajectoryKind::SmoothStep],
    };

    ensure_dir(&config.out_dir)?;
    let mut entries = Vec::new();
    let mut any_infeasible = false;
    for kind in kinds {
        let spec = config.trajectory_for(kind);
        let mut sys: Box<dyn SimSystem> = match &system {
            TuneSystem::AgainstPlant => Box::new(
                PlantSim::new(config.plant, config.disturbance, CONTROL_TS)
                    .map_err(|e| CliError::config(e.to_string()))?,
            ),
            TuneSystem::Model(path) => {
                let model = NarxModel::load(path).map_err(|e| CliError::data(e.to_string()))?;
                Box::new(NarxSim::new(model).map_err(|e| CliError::data(e.to_string()))?)
            }
        };
        let result = iga::tune(sys.as_mut(), &spec, &iga_config, &config.controller)
            .map_err(|e| CliError::config(e.to_string()))?;

        let audit_path = config
            .out_dir
            .join(format!("tune_audit_{}.log", kind_name(kind)));
        write_text(&audit_path, &result.audit.to_text())?;

        println!(
            "tune[{}]: best gains ({:.4}; {:.4}; {:.4}; {:.4}) cost {:.4} margin {:.4}{}",
            kind_name(kind),
            result.best.gains.alpha1,
            result.best.gains.alpha2,
            result.best.gains.ks,
            result.best.gains.beta,
            result.best.cost,
            result.best.condition_margin,
            if result.all_infeasible {
                " [ALL INFEASIBLE]"
            } else {
                ""
            }
        );
        any_infeasible |= result.all_infeasible;
        entries.push(TuneEntry {
            trajectory: kind,
            best: result.best,
            all_infeasible: result.all_infeasible,
            evaluations: result.audit.len(),
            ranked: result.ranked,
        });
    }

    let doc = GainsDocument {
        format: "nmeskit-gains".into(),
        version: 1,
        seed: iga_config.seed,
        results: entries,
    };
    let gains_path = config.out_dir.join("gains.json");
    write_json(&gains_path, &doc)?;
    println!("tune: gains -> {}", gains_path.display());

    if any_infeasible {
        return Err(CliError::infeasible(
            "no gain set satisfied the sufficient condition; best-by-cost written anyway".into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsSummary {
    pub trajectory: TrajectoryKind,
    pub operating_point_deg: Option<f64>,
    pub rmse_deg: f64,
    pub tec: Tec,
    pub avstd_op: Option<AvStd>,
}

#[derive(Debug, Serialize)]
struct EvaluateReport {
    format: &'static str,
    version: u32,
    gains: RiseGains,
    gain_source: GainSource,
    metrics: MetricsSummary,
    saturated_steps: usize,
    total_steps: usize,
    diverged_at: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct EmpiricalFixture {
    sets: Vec<EmpiricalSet>,
}

#[derive(Debug, Deserialize)]
struct EmpiricalSet {
    label: String,
    gains: RiseGains,
}

#[derive(Debug, Serialize)]
struct ComparisonRow {
    label: String,
    gains: RiseGains,
    rmse_deg: f64,
    tec: Tec,
    avstd_op: Option<AvStd>,
    diverged: bool,
}

/// The empirical comparison arm shipped with the binary.
pub fn empirical_gain_sets() -> Vec<(String, RiseGains)> {
    let fixture: EmpiricalFixture =
        serde_json::from_str(include_str!("../fixtures/empirical_gains.json"))
            .expect("fixture parses");
    fixture
        .sets
        .into_iter()
        .map(|s| (s.label, s.gains))
        .collect()
}

/// Source of the gains to evaluate.
pub enum GainsArg {
    Inline(RiseGains),
    File(PathBuf),
}

fn load_gains(arg: &GainsArg, kind: TrajectoryKind) -> Result<(RiseGains, GainSource), CliError> {
    match arg {
        GainsArg::Inline(gains) => Ok((*gains, GainSource::Empirical)),
        GainsArg::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
            let doc: GainsDocument = serde_json::from_str(&text)
                .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            let entry = doc
                .results
                .iter()
                .find(|r| r.trajectory == kind)
                .ok_or_else(|| {
                    CliError::data(format!(
                        "{}: no tuned entry for the {} trajectory",
                        path.display(),
                        kind_name(kind)
                    ))
                })?;
            Ok((entry.best.gains, GainSource::Iga))
        }
    }
}

fn metrics_from_log(
    log: &SessionLog,
    spec: &nmeskit_core::reference::TrajectorySpec,
    operating_point_deg: Option<f64>,
) -> Result<MetricsSummary, CliError> {
    let data_err = |e: nmeskit_core::Error| CliError::data(e.to_string());
    let theta: Vec<f64> = log.rows.iter().map(|r| r.angle).collect();
    let mut theta_d = Vec::with_capacity(log.rows.len());
    for row in &log.rows {
        theta_d.push(reference(row.t, spec).map_err(data_err)?.0);
    }
    let rmse_deg = rmse(&theta, &theta_d).map_err(data_err)?;
    let tec_value = tec(&theta, &theta_d, log.ts, &TecOptions::default()).map_err(data_err)?;
    let avstd = match operating_point_deg {
        Some(op) => Some(avstd_op(&theta, log.ts, op, 5.0).map_err(data_err)?),
        None => None,
    };
    Ok(MetricsSummary {
        trajectory: spec.kind,
        operating_point_deg,
        rmse_deg,
        tec: tec_value,
        avstd_op: avstd,
    })
}

fn rollout(
    config: &RunConfig,
    gains: &RiseGains,
    spec: &nmeskit_core::reference::TrajectorySpec,
) -> Result<ClosedLoopRun, CliError> {
    let mut sys = PlantSim::new(config.plant, config.disturbance, CONTROL_TS)
        .map_err(|e| CliError::config(e.to_string()))?;
    run_closed_loop(&mut sys, gains, spec, &config.controller, spec.duration_s)
        .map_err(|e| CliError::data(e.to_string()))
}

fn fmt_tec(t: &Tec) -> String {
    match t {
        Tec::Ok { seconds } => format!("{seconds:.2} s"),
        Tec::NotComputable => "NC".into(),
    }
}

fn fmt_avstd(a: &Option<AvStd>) -> String {
    match a {
        Some(AvStd::Ok { mean_deg, std_deg }) => format!("{mean_deg:.2}({std_deg:.2}) deg"),
        Some(AvStd::NotComputable) => "NC".into(),
        None => "-".into(),
    }
}

/// Closed-loop evaluation against the synthetic plant: CSV log, metrics
/// summary, plot data, and optionally the tuned-vs-empirical comparison.
pub fn cmd_evaluate(
    config: &RunConfig,
    gains_arg: &GainsArg,
    kind: TrajectoryKind,
    compare_empirical: bool,
    record_session: Option<u32>,
) -> Result<(), CliError> {
    let spec = config.trajectory_for(kind);
    let (gains, gain_source) = load_gains(gains_arg, kind)?;
    gains
        .validate()
        .map_err(|e| CliError::config(e.to_string()))?;
    ensure_dir(&config.out_dir)?;

    let run = rollout(config, &gains, &spec)?;
    let operating_point = match kind {
        TrajectoryKind::SmoothStep => Some(spec.theta_high_deg),
        TrajectoryKind::Sine => None,
    };
    let metrics = metrics_from_log(&run.log, &spec, operating_point)?;

    let stem = format!("evaluate_{}", kind_name(kind));
    let log_path = config.out_dir.join(format!("{stem}.csv"));
    write_text(&log_path, &run.log.csv_string())?;

    // plot data: reference and command side by side with the response
    let mut plot = String::from("t_s,theta_rad,theta_d_rad,pw_us\n");
    for row in &run.log.rows {
        let (theta_d, _) = reference(row.t, &spec).map_err(|e| CliError::data(e.to_string()))?;
        plot.push_str(&format!("{},{},{},{}\n", row.t, row.angle, theta_d, row.pw));
    }
    write_text(&config.out_dir.join(format!("{stem}_plot.csv")), &plot)?;

    let report = EvaluateReport {
        format: "nmeskit-evaluate-report",
        version: 1,
        gains,
        gain_source,
        metrics: metrics.clone(),
        saturated_steps: run.saturated_steps,
        total_steps: run.total_steps,
        diverged_at: run.diverged_at,
    };
    write_json(&config.out_dir.join(format!("{stem}_metrics.json")), &report)?;

    println!(
        "evaluate[{}]: RMSE {:.3} deg, TEC {}, AvStd {}",
        kind_name(kind),
        metrics.rmse_deg,
        fmt_tec(&metrics.tec),
        fmt_avstd(&metrics.avstd_op),
    );

    if compare_empirical {
        let mut rows = Vec::new();
        let mut arms = vec![("tuned".to_string(), gains)];
        arms.extend(empirical_gain_sets());
        for (label, arm_gains) in arms {
            let run = rollout(config, &arm_gains, &spec)?;
            let m = metrics_from_log(&run.log, &spec, operating_point)?;
            println!(
                "  {:<12} ({:>5.2}; {:>5.2}; {:>6.2}; {:>5.2})  RMSE {:>7.3} deg  TEC {:>8}  AvStd {}",
                label,
                arm_gains.alpha1,
                arm_gains.alpha2,
                arm_gains.ks,
                arm_gains.beta,
                m.rmse_deg,
                fmt_tec(&m.tec),
                fmt_avstd(&m.avstd_op),
            );
            rows.push(ComparisonRow {
                label,
                gains: arm_gains,
                rmse_deg: m.rmse_deg,
                tec: m.tec,
                avstd_op: m.avstd_op,
                diverged: run.diverged_at.is_some(),
            });
        }
        write_json(&config.out_dir.join(format!("{stem}_comparison.json")), &rows)?;
    }

    if let Some(index) = record_session {
        let mut log = run.log.clone();
        log.subject = config.subject.clone();
        log.session_index = index;
        log.gain_source = Some(gain_source);
        log.pulse_amplitude_ma = Some(config.pulse_amplitude_ma);
        ensure_dir(&config.sessions_dir)?;
        let path =
            save_session(&config.sessions_dir, &log).map_err(|e| CliError::data(e.to_string()))?;
        println!("evaluate: recorded control session {index} -> {}", path.display());
    }

    if let Some(t) = run.diverged_at {
        return Err(CliError::infeasible(format!(
            "simulation diverged at t = {t:.3} s; partial outputs written"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct LogReport {
    format: &'static str,
    version: u32,
    log: String,
    samples: usize,
    sample_time_s: f64,
    metrics: MetricsSummary,
}

/// Recomputes the tracking metrics from an emitted CSV log.
pub fn cmd_report_log(
    config: &RunConfig,
    log_path: &Path,
    kind: TrajectoryKind,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(log_path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", log_path.display())))?;
    let rows = parse_csv(&text, &log_path.display().to_string())
        .map_err(|e| CliError::data(e.to_string()))?;
    if rows.len() < 2 {
        return Err(CliError::data(format!(
            "{}: need at least 2 samples",
            log_path.display()
        )));
    }
    let ts = rows[1].t - rows[0].t;
    let spec = config.trajectory_for(kind);
    let log = SessionLog {
        subject: config.subject.clone(),
        session_index: 0,
        kind: LogKind::Control,
        ts,
        rows,
        trajectory: Some(spec),
        gains: None,
        gain_source: None,
        pulse_amplitude_ma: None,
    };
    let operating_point = match kind {
        TrajectoryKind::SmoothStep => Some(spec.theta_high_deg),
        TrajectoryKind::Sine => None,
    };
    let metrics = metrics_from_log(&log, &spec, operating_point)?;

    ensure_dir(&config.out_dir)?;
    let doc = LogReport {
        format: "nmeskit-log-report",
        version: 1,
        log: log_path.display().to_string(),
        samples: log.rows.len(),
        sample_time_s: ts,
        metrics: metrics.clone(),
    };
    write_json(&config.out_dir.join("report.json"), &doc)?;
    println!(
        "report[{}]: {} samples, RMSE {:.3} deg, TEC {}, AvStd {}",
        kind_name(kind),
        log.rows.len(),
        metrics.rmse_deg,
        fmt_tec(&metrics.tec),
        fmt_avstd(&metrics.avstd_op),
    );
    Ok(())
}

/// Summarizes a tuning audit log: evaluations per phase and the best record.
pub fn cmd_report_audit(audit_path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(audit_path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", audit_path.display())))?;
    let mut evaluations = 0usize;
    let mut best: Option<(f64, String)> = None;
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        evaluations += 1;
        let cost = line
            .split_whitespace()
            .find_map(|field| field.strip_prefix("cost="))
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| {
                CliError::data(format!(
                    "{}: malformed audit line {:?}",
                    audit_path.display(),
                    line
                ))
            })?;
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, line.to_string()));
        }
    }
    match best {
        Some((cost, line)) => {
            println!("audit: {evaluations} evaluations, best cost {cost}");
            println!("  {line}");
        }
        None => println!("audit: empty log"),
    }
    Ok(())
}
