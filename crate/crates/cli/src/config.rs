//! Run configuration: one JSON document with a section per subsystem, every
//! field defaulted so a minimal (or absent) config runs the full demo.
//!
//! Precedence, lowest to highest: profile defaults, config file, environment
//! overrides (`NMESKIT_SECTION__FIELD`), command-line flags.

use std::path::PathBuf;

use nmeskit_core::controller::ControllerSettings;
use nmeskit_core::ident::TrainConfig;
use nmeskit_core::iga::IgaConfig;
use nmeskit_core::plant::{DisturbanceModel, PlantParams};
use nmeskit_core::reference::{TrajectoryKind, TrajectorySpec};
use nmeskit_core::session::ExcitationSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const ENV_PREFIX: &str = "NMESKIT_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Healthy,
    Sci,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub subject: String,
    pub profile: Profile,
    /// Master seed; `--seed` derives every subsystem seed from it.
    pub seed: u64,
    /// Regulation target of the step trajectory (deg); the sine sweep keeps
    /// using `trajectory.theta_high_deg`.
    pub step_target_deg: f64,
    /// Stimulator pulse amplitude (mA), recorded in session metadata only.
    pub pulse_amplitude_ma: f64,
    pub plant: PlantParams,
    pub disturbance: DisturbanceModel,
    pub trajectory: TrajectorySpec,
    pub excitation: ExcitationSpec,
    pub train: TrainConfig,
    pub iga: IgaConfig,
    pub controller: ControllerSettings,
    pub sessions_dir: PathBuf,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::defaults_for(Profile::Healthy)
    }
}

impl RunConfig {
    pub fn defaults_for(profile: Profile) -> Self {
        let mut config = Self {
            subject: "synthetic".into(),
            profile,
            seed: 42,
            step_target_deg: 40.0,
            pulse_amplitude_ma: 80.0,
            plant: PlantParams::default(),
            disturbance: DisturbanceModel::None,
            trajectory: TrajectorySpec::default(),
            excitation: ExcitationSpec::default(),
            train: TrainConfig::default(),
            iga: IgaConfig::default(),
            controller: ControllerSettings::default(),
            sessions_dir: PathBuf::from("sessions"),
            out_dir: PathBuf::from("out"),
        };
        config.apply_master_seed(config.seed);
        if profile == Profile::Sci {
            // shorter tests, lower step target, higher pulse amplitude
            config.trajectory.duration_s = 40.0;
            config.excitation.duration_s = 40.0;
            config.step_target_deg = 30.0;
            config.pulse_amplitude_ma = 120.0;
        }
        config
    }

    /// Reseeds every subsystem from one master seed.
    pub fn apply_master_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.excitation.seed = seed.wrapping_add(1);
        self.train.seed = seed.wrapping_add(2);
        self.iga.seed = seed.wrapping_add(3);
    }

    /// Trajectory specification for one reference kind; the step wave
    /// regulates around `step_target_deg`.
    pub fn trajectory_for(&self, kind: TrajectoryKind) -> TrajectorySpec {
        let mut spec = TrajectorySpec {
            kind,
            ..self.trajectory
        };
        if kind == TrajectoryKind::SmoothStep {
            spec.theta_high_deg = self.step_target_deg;
        }
        spec
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let check = |r: nmeskit_core::Result<()>| r.map_err(|e| CliError::config(e.to_string()));
        check(self.plant.validate())?;
        check(self.disturbance.validate())?;
        check(self.trajectory.validate())?;
        check(self.excitation.validate())?;
        check(self.train.validate())?;
        check(self.iga.validate())?;
        check(self.controller.validate())?;
        if !(0.0 < self.step_target_deg && self.step_target_deg <= 40.0) {
            return Err(CliError::config(format!(
                "step target must be in (0, 40] deg, got {}",
                self.step_target_deg
            )));
        }
        if self.subject.is_empty()
            || self
                .subject
                .chars()
                .any(|c| !(c.is_ascii_alphanumeric() || c == '-' || c == '_'))
        {
            return Err(CliError::config(format!(
                "subject must be non-empty alphanumeric/-/_, got {:?}",
                self.subject
            )));
        }
        Ok(())
    }
}

/// Deep-merges `overlay` into `base`: objects merge key-wise, everything else
/// replaces.
fn merge_value(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(base_map), Value::Object(overlay_map)) => {
            for (key, value) in overlay_map {
                match base_map.get_mut(&key) {
                    Some(slot) => merge_value(slot, value),
                    None => {
                        base_map.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

fn parse_env_scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies `NMESKIT_KEY` / `NMESKIT_SECTION__FIELD` overrides onto the config
/// value tree. Unknown keys are an error so typos cannot pass silently.
fn apply_env_overrides(
    value: &mut Value,
    vars: &[(String, String)],
) -> Result<(), CliError> {
    let mut sorted: Vec<&(String, String)> = vars
        .iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    sorted.sort();
    for (key, raw) in sorted {
        let path: Vec<String> = key[ENV_PREFIX.len()..]
            .split("__")
            .map(|s| s.to_ascii_lowercase())
            .collect();
        if path.iter().any(|p| p.is_empty()) {
            return Err(CliError::config(format!("malformed override {key}")));
        }
        let mut slot = &mut *value;
        for (depth, segment) in path.iter().enumerate() {
            let map = slot.as_object_mut().ok_or_else(|| {
                CliError::config(format!("{key}: {} is not a section", path[..depth].join(".")))
            })?;
            slot = map.get_mut(segment).ok_or_else(|| {
                CliError::config(format!("{key}: unknown config key {segment:?}"))
            })?;
        }
        *slot = parse_env_scalar(raw);
    }
    Ok(())
}

/// Assembles the effective configuration from the optional file, the process
/// environment, and flag-level overrides.
pub fn load_config(
    config_path: Option<&std::path::Path>,
    env_vars: &[(String, String)],
) -> Result<RunConfig, CliError> {
    let file_value: Option<Value> = match config_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::config(format!("cannot read config {}: {e}", path.display()))
            })?;
            Some(serde_json::from_str(&text).map_err(|e| {
                CliError::config(format!("config {}: {e}", path.display()))
            })?)
        }
        None => None,
    };

    // the profile shapes the defaults, so resolve it first: env beats file
    let env_profile = env_vars
        .iter()
        .find(|(k, _)| k == "NMESKIT_PROFILE")
        .map(|(_, v)| v.trim_matches('"').to_string());
    let profile_name = env_profile.or_else(|| {
        file_value
            .as_ref()
            .and_then(|v| v.get("profile"))
            .and_then(|p| p.as_str())
            .map(str::to_string)
    });
    let profile = match profile_name.as_deref() {
        None => Profile::Healthy,
        Some("healthy") => Profile::Healthy,
        Some("sci") => Profile::Sci,
        Some(other) => {
            return Err(CliError::config(format!(
                "unknown profile {other:?} (expected healthy or sci)"
            )))
        }
    };

    let mut value = serde_json::to_value(RunConfig::defaults_for(profile))
        .expect("defaults serialize");
    if let Some(overlay) = file_value {
        merge_value(&mut value, overlay);
    }
    apply_env_overrides(&mut value, env_vars)?;

    let config: RunConfig = serde_json::from_value(value)
        .map_err(|e| CliError::config(format!("invalid config: {e}")))?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_run_and_validate() {
        RunConfig::default().validate().unwrap();
        RunConfig::defaults_for(Profile::Sci).validate().unwrap();
    }

    #[test]
    fn sci_profile_shortens_sessions_and_lowers_step_target() {
        let sci = RunConfig::defaults_for(Profile::Sci);
        assert_eq!(sci.trajectory.duration_s, 40.0);
        assert_eq!(sci.excitation.duration_s, 40.0);
        assert_eq!(sci.step_target_deg, 30.0);
        assert_eq!(sci.pulse_amplitude_ma, 120.0);
        // sine sweep is unchanged
        let sine = sci.trajectory_for(TrajectoryKind::Sine);
        assert_eq!(sine.theta_high_deg, 40.0);
        let step = sci.trajectory_for(TrajectoryKind::SmoothStep);
        assert_eq!(step.theta_high_deg, 30.0);
    }

    #[test]
    fn env_overrides_apply_and_reject_typos() {
        let vars = vec![
            ("NMESKIT_SEED".to_string(), "7".to_string()),
            ("NMESKIT_PLANT__INERTIA".to_string(), "0.5".to_string()),
            (
                "NMESKIT_IGA__POPULATION_SIZE".to_string(),
                "4".to_string(),
            ),
            ("UNRELATED".to_string(), "1".to_string()),
        ];
        let config = load_config(None, &vars).unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.plant.inertia, 0.5);
        assert_eq!(config.iga.population_size, 4);

        let bad = vec![("NMESKIT_PLANT__INERTIAA".to_string(), "1".to_string())];
        assert!(load_config(None, &bad).is_err());
    }

    #[test]
    fn file_overrides_defaults_but_env_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"seed": 9, "profile": "sci", "trajectory": {"period_s": 4.0}}"#)
            .unwrap();
        let vars = vec![("NMESKIT_TRAJECTORY__PERIOD_S".to_string(), "6.0".to_string())];
        let config = load_config(Some(&path), &vars).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.profile, Profile::Sci);
        assert_eq!(config.trajectory.period_s, 6.0);
        assert_eq!(config.step_target_deg, 30.0); // sci default retained
    }

    #[test]
    fn unknown_file_keys_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, r#"{"sed": 9}"#).unwrap();
        assert!(load_config(Some(&path), &[]).is_err());
    }

    #[test]
    fn master_seed_cascades() {
        let mut config = RunConfig::default();
        config.apply_master_seed(100);
        assert_eq!(config.seed, 100);
        assert_eq!(config.excitation.seed, 101);
        assert_eq!(config.train.seed, 102);
        assert_eq!(config.iga.seed, 103);
    }
}
