//! Session protocol emulation: excitation signals, CSV session logs,
//! multi-session merging, closed-loop rollouts, and tracking metrics.
//!
//! Log files are plain CSV with the exact header `t_s,pw_us,angle_rad`, one
//! row per sample, `\n` newlines, full-precision floats. A session directory
//! holds `<subject>/<session-index>/<kind>.csv` plus a JSON `meta` sidecar.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::{ControllerSettings, ControllerState, RiseGains};
use crate::ident::NarxModel;
use crate::plant::{self, DisturbanceModel, PlantParams, PlantState};
use crate::reference::{reference, TrajectorySpec, RAD_TO_DEG};
use crate::{Error, Result};

/// Control-loop sampling period (s).
pub const CONTROL_TS: f64 = 0.005;
/// Exact header of a session CSV.
pub const CSV_HEADER: &str = "t_s,pw_us,angle_rad";

// ---------------------------------------------------------------------------
// Session logs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogKind {
    Identification,
    Control,
}

impl LogKind {
    pub fn file_stem(&self) -> &'static str {
        match self {
            LogKind::Identification => "identification",
            LogKind::Control => "control",
        }
    }
}

/// How the gains of a control session were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainSource {
    Iga,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    /// Sample time (s).
    pub t: f64,
    /// Commanded pulse width (us).
    pub pw: f64,
    /// Measured angle (rad).
    pub angle: f64,
}

/// A recorded stimulation session: timestamped (pulse width, angle) samples
/// plus the metadata needed to reuse them for identification.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub subject: String,
    pub session_index: u32,
    pub kind: LogKind,
    /// Sampling period (s); 0.02 for identification, 0.005 for control runs.
    pub ts: f64,
    pub rows: Vec<LogRow>,
    /// Reference tracked during a control session.
    pub trajectory: Option<TrajectorySpec>,
    /// Gains used during a control session.
    pub gains: Option<RiseGains>,
    pub gain_source: Option<GainSource>,
    /// Stimulator pulse amplitude (mA); recorded only, never controlled.
    pub pulse_amplitude_ma: Option<f64>,
}

impl SessionLog {
    pub fn validate(&self) -> Result<()> {
        if !self.ts.is_finite() || self.ts <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sampling period must be > 0, got {}",
                self.ts
            )));
        }
        for (k, row) in self.rows.iter().enumerate() {
            if !(row.t.is_finite() && row.pw.is_finite() && row.angle.is_finite()) {
                return Err(Error::NonFinite(format!("log row {k}")));
            }
            if (row.t - k as f64 * self.ts).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "non-uniform timestamps at row {k}: {} vs {}",
                    row.t,
                    k as f64 * self.ts
                )));
            }
            if !(0.0..=400.0).contains(&row.pw) {
                return Err(Error::InvalidParameter(format!(
                    "pulse width {} out of [0, 400] at row {k}",
                    row.pw
                )));
            }
        }
        Ok(())
    }

    /// Input and output series `(pulse widths, angles)`.
    pub fn series(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.rows.iter().map(|r| r.pw).collect(),
            self.rows.iter().map(|r| r.angle).collect(),
        )
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for row in &self.rows {
            writeln!(w, "{},{},{}", row.t, row.pw, row.angle)?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

/// Parses rows from session CSV text; errors carry 1-based line numbers.
pub fn parse_csv(text: &str, path: &str) -> Result<Vec<LogRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(Error::Csv {
                path: path.to_string(),
                line: 1,
                msg: format!("expected header {CSV_HEADER:?}, found {header:?}"),
            })
        }
        None => {
            return Err(Error::Csv {
                path: path.to_string(),
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next_f64 = |name: &str| -> Result<f64> {
            let field = fields.next().ok_or_else(|| Error::Csv {
                path: path.to_string(),
                line: lineno,
                msg: format!("missing {name} column"),
            })?;
            field.parse::<f64>().map_err(|_| Error::Csv {
                path: path.to_string(),
                line: lineno,
                msg: format!("cannot parse {name} value {field:?}"),
            })
        };
        let t = next_f64("t_s")?;
        let pw = next_f64("pw_us")?;
        let angle = next_f64("angle_rad")?;
        if fields.next().is_some() {
            return Err(Error::Csv {
                path: path.to_string(),
                line: lineno,
                msg: "too many columns".into(),
            });
        }
        rows.push(LogRow { t, pw, angle });
    }
    Ok(rows)
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct SessionMeta {
    subject: String,
    session: u32,
    logs: BTreeMap<String, LogMeta>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LogMeta {
    ts: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory: Option<TrajectorySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gains: Option<RiseGains>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gain_source: Option<GainSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pulse_amplitude_ma: Option<f64>,
}

/// Writes `<dir>/<subject>/<session-index>/<kind>.csv` and updates the
/// session's `meta` sidecar. Returns the CSV path.
pub fn save_session(dir: &Path, log: &SessionLog) -> Result<PathBuf> {
    log.validate()?;
    let session_dir = dir.join(&log.subject).join(log.session_index.to_string());
    std::fs::create_dir_all(&session_dir)?;

    let csv_path = session_dir.join(format!("{}.csv", log.kind.file_stem()));
    std::fs::write(&csv_path, log.csv_string())?;

    let meta_path = session_dir.join("meta");
    let mut meta: SessionMeta = match std::fs::read_to_string(&meta_path) {
        Ok(text) => serde_json::from_str(&text)?,
        Err(_) => SessionMeta::default(),
    };
    meta.subject = log.subject.clone();
    meta.session = log.session_index;
    meta.logs.insert(
        log.kind.file_stem().to_string(),
        LogMeta {
            ts: log.ts,
            trajectory: log.trajectory,
            gains: log.gains,
            gain_source: log.gain_source,
            pulse_amplitude_ma: log.pulse_amplitude_ma,
        },
    );
    let mut text = serde_json::to_string_pretty(&meta)?;
    text.push('\n');
    std::fs::write(&meta_path, text)?;
    Ok(csv_path)
}

/// Loads every session log of a subject, ordered by session index.
pub fn load_sessions(dir: &Path, subject: &str) -> Result<Vec<SessionLog>> {
    let subject_dir = dir.join(subject);
    let mut indices: Vec<u32> = Vec::new();
    let entries = std::fs::read_dir(&subject_dir).map_err(|e| {
        Error::InvalidParameter(format!(
            "cannot read sessions for {subject:?} in {}: {e}",
            dir.display()
        ))
    })?;
    for entry in entries {
        let entry = entry?;
        if let Some(idx) = entry
            .file_name()
            .to_str()
            .and_then(|s| s.parse::<u32>().ok())
        {
            if entry.path().is_dir() {
                indices.push(idx);
            }
        }
    }
    indices.sort_unstable();

    let mut logs = Vec::new();
    for idx in indices {
        let session_dir = subject_dir.join(idx.to_string());
        let meta_path = session_dir.join("meta");
        let meta: SessionMeta = match std::fs::read_to_string(&meta_path) {
            Ok(text) => serde_json::from_str(&text)?,
            Err(_) => SessionMeta {
                subject: subject.to_string(),
                session: idx,
                logs: BTreeMap::new(),
            },
        };
        for kind in [LogKind::Identification, LogKind::Control] {
            let csv_path = session_dir.join(format!("{}.csv", kind.file_stem()));
            let text = match std::fs::read_to_string(&csv_path) {
                Ok(text) => text,
                Err(_) => continue,
            };
            let rows = parse_csv(&text, &csv_path.display().to_string())?;
            let lm = meta.logs.get(kind.file_stem());
            let ts = lm.map(|m| m.ts).unwrap_or_else(|| {
                if rows.len() >= 2 {
                    rows[1].t - rows[0].t
                } else {
                    CONTROL_TS
                }
            });
            let log = SessionLog {
                subject: subject.to_string(),
                session_index: idx,
                kind,
                ts,
                rows,
                trajectory: lm.and_then(|m| m.trajectory),
                gains: lm.and_then(|m| m.gains),
                gain_source: lm.and_then(|m| m.gain_source),
                pulse_amplitude_ma: lm.and_then(|m| m.pulse_amplitude_ma),
            };
            log.validate()?;
            logs.push(log);
        }
    }
    Ok(logs)
}

/// Orders a subject's logs by session index and optionally keeps only control
/// sessions recorded with tuned gains, mirroring how past rehabilitation data
/// is reused. Rejects logs from mixed subjects.
pub fn merge_sessions(logs: &[SessionLog], control_only: bool) -> Result<Vec<&SessionLog>> {
    if let Some(first) = logs.first() {
        for log in logs {
            if log.subject != first.subject {
                return Err(Error::MixedSubjects(
                    first.subject.clone(),
                    log.subject.clone(),
                ));
            }
        }
    }
    let mut selected: Vec<&SessionLog> = logs
        .iter()
        .filter(|log| {
            if control_only {
                log.kind == LogKind::Control && log.gain_source == Some(GainSource::Iga)
            } else {
                true
            }
        })
        .collect();
    selected.sort_by_key(|log| log.session_index);
    Ok(selected)
}

// ---------------------------------------------------------------------------
// Excitation
// ---------------------------------------------------------------------------

/// Piecewise-constant random excitation: pulse widths uniform in
/// `[pw_low, pw_high]`, each held for a uniform random 4-7 s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExcitationSpec {
    /// Pulse width mapped to the minimum extension angle (us).
    pub pw_low: f64,
    /// Pulse width mapped to the maximum extension angle (us).
    pub pw_high: f64,
    pub hold_min_s: f64,
    pub hold_max_s: f64,
    pub duration_s: f64,
    /// Sampling period of the identification log (s).
    pub ts: f64,
    pub seed: u64,
}

impl Default for ExcitationSpec {
    fn default() -> Self {
        Self {
            pw_low: 70.0,
            pw_high: 220.0,
            hold_min_s: 4.0,
            hold_max_s: 7.0,
            duration_s: 60.0,
            ts: 0.02,
            seed: 1,
        }
    }
}

impl ExcitationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.pw_low >= 0.0 && self.pw_low < self.pw_high && self.pw_high <= 400.0) {
            return Err(Error::InvalidParameter(format!(
                "excitation pulse widths must satisfy 0 <= low < high <= 400, got [{}, {}]",
                self.pw_low, self.pw_high
            )));
        }
        if !(self.hold_min_s > 0.0 && self.hold_min_s <= self.hold_max_s) {
            return Err(Error::InvalidParameter(format!(
                "hold range must satisfy 0 < min <= max, got [{}, {}]",
                self.hold_min_s, self.hold_max_s
            )));
        }
        if !(self.duration_s > 0.0 && self.ts > 0.0) {
            return Err(Error::InvalidParameter(
                "excitation duration and ts must be > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.duration_s / self.ts).round() as usize
    }
}

/// Random `(pulse width, hold seconds)` segments covering the duration; the
/// final segment is truncated at the total duration.
pub fn excitation_segments(spec: &ExcitationSpec) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut segments = Vec::new();
    let mut covered = 0.0;
    while covered < spec.duration_s {
        let pw = rng.gen_range(spec.pw_low..=spec.pw_high);
        let hold = rng.gen_range(spec.hold_min_s..=spec.hold_max_s);
        let hold = hold.min(spec.duration_s - covered);
        segments.push((pw, hold));
        covered += hold;
    }
    segments
}

/// Samples the piecewise-constant excitation at `spec.ts`.
pub fn generate_excitation(spec: &ExcitationSpec) -> Vec<f64> {
    let segments = excitation_segments(spec);
    let n = spec.samples();
    let mut series = Vec::with_capacity(n);
    let mut seg_iter = segments.iter();
    let (mut pw, mut seg_end) = {
        let &(pw, hold) = seg_iter.next().expect("at least one segment");
        (pw, hold)
    };
    for k in 0..n {
        let t = k as f64 * spec.ts;
        while t >= seg_end {
            match seg_iter.next() {
                Some(&(next_pw, hold)) => {
                    pw = next_pw;
                    seg_end += hold;
                }
                None => break,
            }
        }
        series.push(pw);
    }
    series
}

// ---------------------------------------------------------------------------
// Simulated systems and closed-loop rollouts
// ---------------------------------------------------------------------------

/// A single-input single-output system stepped at a fixed sampling period;
/// either the synthetic plant or an identified model.
pub trait SimSystem {
    fn reset(&mut self);
    fn sample_time(&self) -> f64;
    /// Current output angle (rad).
    fn angle(&self) -> f64;
    /// Apply `u` for one sample period; returns the new angle (rad).
    fn step(&mut self, u: f64) -> Result<f64>;
}

/// The synthetic plant stepped by RK4; the integrator never steps coarser
/// than the control period even when sampled slower.
pub struct PlantSim {
    params: PlantParams,
    disturbance: DisturbanceModel,
    ts: f64,
    substeps: usize,
    state: PlantState,
}

impl PlantSim {
    pub fn new(params: PlantParams, disturbance: DisturbanceModel, ts: f64) -> Result<Self> {
        params.validate()?;
        disturbance.validate()?;
        if !(ts.is_finite() && ts > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sample time must be > 0, got {ts}"
            )));
        }
        let substeps = (ts / CONTROL_TS).round().max(1.0) as usize;
        Ok(Self {
            params,
            disturbance,
            ts,
            substeps,
            state: PlantState::at_rest(),
        })
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }
}

impl SimSystem for PlantSim {
    fn reset(&mut self) {
        self.state = PlantState::at_rest();
    }

    fn sample_time(&self) -> f64 {
        self.ts
    }

    fn angle(&self) -> f64 {
        self.state.theta
    }

    fn step(&mut self, u: f64) -> Result<f64> {
        let dt = self.ts / self.substeps as f64;
        for _ in 0..self.substeps {
            self.state = plant::step(&self.state, u, dt, &self.params, &self.disturbance)?;
        }
        Ok(self.state.theta)
    }
}

/// An identified NARX model in parallel (output-feedback) form, stepped at
/// its training sample time.
pub struct NarxSim {
    model: NarxModel,
    /// Most recent first.
    y_hist: Vec<f64>,
    u_hist: Vec<f64>,
    k: usize,
}

impl NarxSim {
    pub fn new(model: NarxModel) -> Result<Self> {
        model.validate()?;
        let (lag_n, lag_m) = (model.lag_n, model.lag_m);
        Ok(Self {
            model,
            y_hist: vec![0.0; lag_n],
            u_hist: vec![0.0; lag_m],
            k: 0,
        })
    }
}

impl SimSystem for NarxSim {
    fn reset(&mut self) {
        self.y_hist.iter_mut().for_each(|y| *y = 0.0);
        self.u_hist.iter_mut().for_each(|u| *u = 0.0);
        self.k = 0;
    }

    fn sample_time(&self) -> f64 {
        self.model.sample_time_s
    }

    fn angle(&self) -> f64 {
        self.y_hist[0]
    }

    fn step(&mut self, u: f64) -> Result<f64> {
        self.u_hist.rotate_right(1);
        self.u_hist[0] = u;
        let mut features = Vec::with_capacity(self.model.feature_len());
        features.extend(self.y_hist.iter().map(|y| self.model.normalize_output(*y)));
        features.extend(self.u_hist.iter().map(|u| self.model.normalize_input(*u)));
        let y = self.model.forward(&features)?;
        self.k += 1;
        if !y.is_finite() || y.abs() > std::f64::consts::PI {
            return Err(Error::Diverged {
                t: self.k as f64 * self.model.sample_time_s,
                theta: y,
            });
        }
        self.y_hist.rotate_right(1);
        self.y_hist[0] = y;
        Ok(y)
    }
}

/// Result of a closed-loop rollout. `diverged_at` carries the time the angle
/// left the physical range, with the partial log retained.
pub struct ClosedLoopRun {
    pub log: SessionLog,
    pub diverged_at: Option<f64>,
    /// Control steps whose raw output exceeded the saturation range.
    pub saturated_steps: usize,
    pub total_steps: usize,
    /// Tracking RMSE over the logged samples (deg).
    pub rmse_deg: f64,
}

/// Runs the RISE controller against `system` for `duration_s`, logging
/// `(t, u, theta)` at the system sample time. Controller state starts fresh.
pub fn run_closed_loop(
    system: &mut dyn SimSystem,
    gains: &RiseGains,
    spec: &TrajectorySpec,
    settings: &ControllerSettings,
    duration_s: f64,
) -> Result<ClosedLoopRun> {
    gains.validate()?;
    spec.validate()?;
    if !(duration_s > 0.0 && duration_s <= spec.duration_s) {
        return Err(Error::InvalidParameter(format!(
            "rollout duration must be in (0, {}], got {duration_s}",
            spec.duration_s
        )));
    }
    let mut controller = ControllerState::new(settings)?;
    controller.reset();
    system.reset();

    let ts = system.sample_time();
    let n = (duration_s / ts).round() as usize;
    let mut rows = Vec::with_capacity(n);
    let mut sum_sq_err = 0.0;
    let mut saturated = 0usize;
    let mut diverged_at = None;

    for k in 0..n {
        let t = k as f64 * ts;
        let theta = system.angle();
        let (theta_d, theta_d_dot) = reference(t, spec)?;
        let u = controller.rise_step(theta, theta_d, theta_d_dot, gains, ts)?;
        if controller.last_saturated() {
            saturated += 1;
        }
        rows.push(LogRow {
            t,
            pw: u,
            angle: theta,
        });
        let e = (theta_d - theta) * RAD_TO_DEG;
        sum_sq_err += e * e;

        match system.step(u) {
            Ok(theta_next) if theta_next.abs() <= std::f64::consts::PI => {}
            Ok(_) => {
                diverged_at = Some(t + ts);
                break;
            }
            Err(Error::Diverged { t, .. }) => {
                diverged_at = Some(t);
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let total_steps = rows.len();
    let rmse_deg = (sum_sq_err / total_steps.max(1) as f64).sqrt();
    Ok(ClosedLoopRun {
        log: SessionLog {
            subject: String::new(),
            session_index: 0,
            kind: LogKind::Control,
            ts,
            rows,
            trajectory: Some(*spec),
            gains: Some(*gains),
            gain_source: None,
            pulse_amplitude_ma: None,
        },
        diverged_at,
        saturated_steps: saturated,
        total_steps,
        rmse_deg,
    })
}

/// Open-loop rollout of a pulse-width series against a system, producing an
/// identification-style log.
pub fn run_open_loop(system: &mut dyn SimSystem, pw: &[f64]) -> Result<SessionLog> {
    system.reset();
    let ts = system.sample_time();
    let mut rows = Vec::with_capacity(pw.len());
    for (k, &u) in pw.iter().enumerate() {
        rows.push(LogRow {
            t: k as f64 * ts,
            pw: u,
            angle: system.angle(),
        });
        system.step(u)?;
    }
    Ok(SessionLog {
        subject: String::new(),
        session_index: 0,
        kind: LogKind::Identification,
        ts,
        rows,
        trajectory: None,
        gains: None,
        gain_source: None,
        pulse_amplitude_ma: None,
    })
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

/// Root-mean-square tracking error in degrees; inputs are radians.
pub fn rmse(theta: &[f64], theta_d: &[f64]) -> Result<f64> {
    if theta.len() != theta_d.len() {
        return Err(Error::LengthMismatch {
            left: theta.len(),
            right: theta_d.len(),
        });
    }
    if theta.is_empty() {
        return Err(Error::SeriesTooShort { len: 0, min: 1 });
    }
    let sum_sq: f64 = theta
        .iter()
        .zip(theta_d)
        .map(|(a, d)| {
            let e = (d - a) * RAD_TO_DEG;
            e * e
        })
        .sum();
    Ok((sum_sq / theta.len() as f64).sqrt())
}

/// Time of effective control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Tec {
    Ok { seconds: f64 },
    NotComputable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TecOptions {
    /// Tracking band (deg).
    pub band_deg: f64,
    /// Dropout length that ends effective control (s).
    pub dwell_s: f64,
    /// Measure from the first in-band sample instead of t = 0.
    pub clock_from_first_entry: bool,
}

impl Default for TecOptions {
    fn default() -> Self {
        Self {
            band_deg: 5.0,
            dwell_s: 5.0,
            clock_from_first_entry: false,
        }
    }
}

/// Time of effective control: how long the limb tracked the reference before
/// a sustained dropout.
///
/// Not computable when the error never enters the band. Otherwise, the clock
/// runs from t = 0 to the start of the first continuous out-of-band run of at
/// least `dwell_s` that begins after the first in-band sample; if no such run
/// exists, the whole duration counts.
pub fn tec(theta: &[f64], theta_d: &[f64], ts: f64, opts: &TecOptions) -> Result<Tec> {
    if theta.len() != theta_d.len() {
        return Err(Error::LengthMismatch {
            left: theta.len(),
            right: theta_d.len(),
        });
    }
    if !(ts.is_finite() && ts > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample time must be > 0, got {ts}"
        )));
    }
    let n = theta.len();
    let in_band: Vec<bool> = theta
        .iter()
        .zip(theta_d)
        .map(|(a, d)| ((d - a) * RAD_TO_DEG).abs() <= opts.band_deg)
        .collect();

    let first_in = match in_band.iter().position(|b| *b) {
        Some(k) => k,
        None => return Ok(Tec::NotComputable),
    };
    let origin = if opts.clock_from_first_entry {
        first_in as f64 * ts
    } else {
        0.0
    };

    let mut k = first_in + 1;
    while k < n {
        if in_band[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && !in_band[k] {
            k += 1;
        }
        if (k - start) as f64 * ts >= opts.dwell_s {
            return Ok(Tec::Ok {
                seconds: start as f64 * ts - origin,
            });
        }
    }
    Ok(Tec::Ok {
        seconds: n as f64 * ts - origin,
    })
}

/// Mean and standard deviation of the angle around the operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AvStd {
    Ok { mean_deg: f64, std_deg: f64 },
    NotComputable,
}

/// Angle statistics over the window from the first sample within `band_deg`
/// of the operating point to the end of the series; not computable if the
/// angle never enters that band.
pub fn avstd_op(theta: &[f64], ts: f64, operating_point_deg: f64, band_deg: f64) -> Result<AvStd> {
    if !(ts.is_finite() && ts > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample time must be > 0, got {ts}"
        )));
    }
    let entry = theta
        .iter()
        .position(|a| (a * RAD_TO_DEG - operating_point_deg).abs() <= band_deg);
    let entry = match entry {
        Some(k) => k,
        None => return Ok(AvStd::NotComputable),
    };
    let window: Vec<f64> = theta[entry..].iter().map(|a| a * RAD_TO_DEG).collect();
    let n = window.len() as f64;
    let mean = window.iter().sum::<f64>() / n;
    let var = window.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    Ok(AvStd::Ok {
        mean_deg: mean,
        std_deg: var.sqrt(),
    })
}
