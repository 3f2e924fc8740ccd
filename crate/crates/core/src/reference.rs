//! Reference trajectories: the isotonic sine wave and the isometric step.
//!
//! Both have bounded derivatives of every order used by the control analysis.
//! The step is a quintic ramp rather than a hard step so velocity and
//! acceleration vanish at both ends of the ramp.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEG_TO_RAD: f64 = std::f64::consts::PI / 180.0;
pub const RAD_TO_DEG: f64 = 180.0 / std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Sine,
    SmoothStep,
}

/// Reference specification. Angles are degrees here (this type crosses the
/// configuration boundary); everything downstream of [`reference`] is radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    /// Lower angle of the sine sweep (deg).
    pub theta_low_deg: f64,
    /// Upper angle of the sine sweep / step operating point (deg).
    pub theta_high_deg: f64,
    /// Sine period (s).
    pub period_s: f64,
    /// Step ramp duration (s).
    pub ramp_s: f64,
    /// Total run duration (s).
    pub duration_s: f64,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            kind: TrajectoryKind::Sine,
            theta_low_deg: 10.0,
            theta_high_deg: 40.0,
            period_s: 5.0,
            ramp_s: 2.0,
            duration_s: 60.0,
        }
    }
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_low_deg >= 0.0
            && self.theta_low_deg < self.theta_high_deg
            && self.theta_high_deg <= 40.0)
        {
            return Err(Error::InvalidParameter(format!(
                "trajectory angles must satisfy 0 <= low < high <= 40 deg, got [{}, {}]",
                self.theta_low_deg, self.theta_high_deg
            )));
        }
        for (name, v) in [
            ("period_s", self.period_s),
            ("ramp_s", self.ramp_s),
            ("duration_s", self.duration_s),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "trajectory {name} must be > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Desired angle and velocity at time `t`, in radians.
///
/// Sine: `theta_d = mid - amp*cos(2*pi*t/T)`, starting at the low angle with
/// zero velocity. Smooth step: quintic ramp from 0 to the high angle over
/// `ramp_s`, constant afterwards. Errors if `t` is outside `[0, duration]`.
pub fn reference(t: f64, spec: &TrajectorySpec) -> Result<(f64, f64)> {
    if !t.is_finite() || t < 0.0 || t > spec.duration_s {
        return Err(Error::InvalidParameter(format!(
            "reference time {t} outside [0, {}]",
            spec.duration_s
        )));
    }
    let low = spec.theta_low_deg * DEG_TO_RAD;
    let high = spec.theta_high_deg * DEG_TO_RAD;
    match spec.kind {
        TrajectoryKind::Sine => {
            let mid = 0.5 * (low + high);
            let amp = 0.5 * (high - low);
            let w = 2.0 * std::f64::consts::PI / spec.period_s;
            Ok((mid - amp * (w * t).cos(), amp * w * (w * t).sin()))
        }
        TrajectoryKind::SmoothStep => {
            if t >= spec.ramp_s {
                return Ok((high, 0.0));
            }
            let x = t / spec.ramp_s;
            // 6x^5 - 15x^4 + 10x^3: zero velocity and acceleration at x = 0, 1
            let s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
            let ds = 30.0 * x * x * (1.0 - x) * (1.0 - x) / spec.ramp_s;
            Ok((high * s, high * ds))
        }
    }
}
