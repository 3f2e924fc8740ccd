//! Continuous-time knee-joint dynamics under electrical stimulation.
//!
//! The shank/foot segment is modeled as a rigid body driven by gravitational,
//! elastic, viscous, disturbance, and stimulation torques:
//!
//! ```text
//! J*theta_dd = gravity(theta) + elastic(theta) + viscous(theta_dot)
//!              + disturbance(t) + stim_scale(t) * Psi(theta, theta_dot) * u
//! ```
//!
//! `u` is the stimulation pulse width in microseconds, held constant over each
//! integration step (zero-order hold). Integration is classic fixed-step RK4.
//! All angles are radians, measured from the resting position with extension
//! positive.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Pulse-width-to-torque map `Psi(theta, theta_dot) = gain * (1 + angle_mod *
/// sin(theta)) * (1 - vel_mod * tanh(vel_scale * theta_dot))`.
///
/// With `|angle_mod| < 1` and `0 <= vel_mod < 1` the map is strictly positive
/// and bounded, so torque is monotone in pulse width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StimMapParams {
    /// Base torque per microsecond of pulse width (N*m/us).
    pub gain: f64,
    /// Moment-arm modulation with angle (dimensionless, |x| < 1).
    pub angle_mod: f64,
    /// Force drop while shortening (dimensionless, 0 <= x < 1).
    pub vel_mod: f64,
    /// Velocity scale of the force-velocity term (s/rad).
    pub vel_scale: f64,
}

impl Default for StimMapParams {
    fn default() -> Self {
        Self {
            gain: 0.028,
            angle_mod: 0.3,
            vel_mod: 0.2,
            vel_scale: 1.0,
        }
    }
}

impl StimMapParams {
    pub fn validate(&self) -> Result<()> {
        if !self.gain.is_finite() || self.gain <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "stim gain must be > 0, got {}",
                self.gain
            )));
        }
        if !self.angle_mod.is_finite() || self.angle_mod.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "stim angle_mod must satisfy |x| < 1, got {}",
                self.angle_mod
            )));
        }
        if !self.vel_mod.is_finite() || !(0.0..1.0).contains(&self.vel_mod) {
            return Err(Error::InvalidParameter(format!(
                "stim vel_mod must be in [0, 1), got {}",
                self.vel_mod
            )));
        }
        if !self.vel_scale.is_finite() {
            return Err(Error::NonFinite("stim vel_scale".into()));
        }
        Ok(())
    }

    /// Torque per microsecond at the given state.
    pub fn psi(&self, theta: f64, theta_dot: f64) -> f64 {
        self.gain
            * (1.0 + self.angle_mod * theta.sin())
            * (1.0 - self.vel_mod * (self.vel_scale * theta_dot).tanh())
    }
}

/// Reading of the viscous-damping term.
///
/// The published form `-k1*tanh(-k2*w) + k3*w` feeds energy into the joint
/// (both terms have the sign of the velocity). `Dissipative` flips the model
/// to `-(k1*tanh(k2*w) + k3*w)`, which removes energy and is the default; the
/// literal reading stays available as `Verbatim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscousConvention {
    Verbatim,
    Dissipative,
}

/// Physical coefficients of the stimulated knee joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantParams {
    /// Inertia of shank + foot about the knee (kg*m^2).
    pub inertia: f64,
    /// Combined mass of shank + foot (kg).
    pub mass: f64,
    /// Knee-to-center-of-mass distance (m).
    pub com_length: f64,
    /// Gravitational acceleration (m/s^2).
    pub gravity: f64,
    /// Elastic stiffness scale (N*m/rad).
    pub psi1: f64,
    /// Elastic exponential decay (1/rad).
    pub psi2: f64,
    /// Elastic rest offset (rad).
    pub psi3: f64,
    /// Saturating damping magnitude (N*m).
    pub kappa1: f64,
    /// Saturating damping velocity scale (s/rad).
    pub kappa2: f64,
    /// Linear damping (N*m*s/rad).
    pub kappa3: f64,
    pub viscous_convention: ViscousConvention,
    pub stim_map: StimMapParams,
}

impl Default for PlantParams {
    /// Synthetic desk-scale parameter set; a constant 200 us input extends the
    /// leg to roughly 35 degrees in about a second. Configuration, not a claim
    /// about any real subject.
    fn default() -> Self {
        Self {
            inertia: 0.362,
            mass: 4.37,
            com_length: 0.238,
            gravity: 9.81,
            psi1: 2.02,
            psi2: 1.0,
            psi3: 0.0,
            kappa1: 0.25,
            kappa2: 5.0,
            kappa3: 0.27,
            viscous_convention: ViscousConvention::Dissipative,
            stim_map: StimMapParams::default(),
        }
    }
}

impl PlantParams {
    pub fn validate(&self) -> Result<()> {
        if !self.inertia.is_finite() || self.inertia <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "inertia must be > 0, got {}",
                self.inertia
            )));
        }
        for (name, v) in [
            ("mass", self.mass),
            ("com_length", self.com_length),
            ("gravity", self.gravity),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("psi1", self.psi1),
            ("psi2", self.psi2),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("kappa3", self.kappa3),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be >= 0, got {v}"
                )));
            }
        }
        if !self.psi3.is_finite() {
            return Err(Error::NonFinite("psi3".into()));
        }
        self.stim_map.validate()
    }

    /// `m*g*l`, the gravitational torque scale.
    pub fn mgl(&self) -> f64 {
        self.mass * self.gravity * self.com_length
    }
}

/// Instantaneous state of the joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    /// Angle from resting position, extension positive (rad).
    pub theta: f64,
    /// Angular velocity (rad/s).
    pub theta_dot: f64,
    /// Simulation time (s).
    pub t: f64,
}

impl PlantState {
    pub fn at_rest() -> Self {
        Self {
            theta: 0.0,
            theta_dot: 0.0,
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.theta_dot.is_finite() && self.t.is_finite()
    }
}

/// Unmodeled bounded disturbances: fatigue scales the stimulation torque
/// down over time, tremor adds an oscillating torque.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceModel {
    #[default]
    None,
    Fatigue {
        /// Exponential decay time constant (s).
        time_constant: f64,
    },
    Tremor {
        /// Additive torque amplitude (N*m).
        amplitude: f64,
        /// Oscillation frequency (Hz).
        frequency: f64,
    },
    Composite {
        fatigue_time_constant: f64,
        tremor_amplitude: f64,
        tremor_frequency: f64,
    },
}

impl DisturbanceModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DisturbanceModel::None => Ok(()),
            DisturbanceModel::Fatigue { time_constant } => {
                if !time_constant.is_finite() || time_constant <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "fatigue time constant must be > 0, got {time_constant}"
                    )));
                }
                Ok(())
            }
            DisturbanceModel::Tremor {
                amplitude,
                frequency,
            } => {
                if !amplitude.is_finite() || amplitude < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "tremor amplitude must be >= 0, got {amplitude}"
                    )));
                }
                if !frequency.is_finite() {
                    return Err(Error::NonFinite("tremor frequency".into()));
                }
                Ok(())
            }
            DisturbanceModel::Composite {
                fatigue_time_constant,
                tremor_amplitude,
                tremor_frequency,
            } => {
                DisturbanceModel::Fatigue {
                    time_constant: fatigue_time_constant,
                }
                .validate()?;
                DisturbanceModel::Tremor {
                    amplitude: tremor_amplitude,
                    frequency: tremor_frequency,
                }
                .validate()
            }
        }
    }
}

/// Gravitational torque `-m*g*l*sin(theta)`.
pub fn gravitational_torque(theta: f64, params: &PlantParams) -> f64 {
    -params.mgl() * theta.sin()
}

/// Elastic torque from joint stiffness, `-(psi1*theta - psi1*psi3) * exp(-psi2*theta)`.
pub fn elastic_torque(theta: f64, params: &PlantParams) -> f64 {
    -(params.psi1 * theta - params.psi1 * params.psi3) * (-params.psi2 * theta).exp()
}

/// Viscous damping torque; sign handling depends on the configured convention.
pub fn viscous_torque(theta_dot: f64, params: &PlantParams) -> f64 {
    match params.viscous_convention {
        ViscousConvention::Verbatim => {
            -params.kappa1 * (-params.kappa2 * theta_dot).tanh() + params.kappa3 * theta_dot
        }
        ViscousConvention::Dissipative => {
            -(params.kappa1 * (params.kappa2 * theta_dot).tanh() + params.kappa3 * theta_dot)
        }
    }
}

/// Torque produced by stimulation: `disturbance_scale * Psi(theta, theta_dot) * u`.
///
/// Rejects `u < 0`: a negative pulse width can only come from a saturation bug
/// upstream.
pub fn stimulation_torque(
    theta: f64,
    theta_dot: f64,
    u: f64,
    params: &PlantParams,
    disturbance_scale: f64,
) -> Result<f64> {
    if u.is_nan() {
        return Err(Error::NonFinite("pulse width".into()));
    }
    if u < 0.0 {
        return Err(Error::NegativePulseWidth(u));
    }
    Ok(disturbance_scale * params.stim_map.psi(theta, theta_dot) * u)
}

/// Evaluate the disturbance model at time `t`.
///
/// Returns `(additive_torque, stim_scale)`: the additive torque enters the
/// dynamics directly, the scale multiplies the stimulation torque.
pub fn disturbance(t: f64, model: &DisturbanceModel) -> (f64, f64) {
    match *model {
        DisturbanceModel::None => (0.0, 1.0),
        DisturbanceModel::Fatigue { time_constant } => (0.0, (-t / time_constant).exp()),
        DisturbanceModel::Tremor {
            amplitude,
            frequency,
        } => (
            amplitude * (2.0 * std::f64::consts::PI * frequency * t).sin(),
            1.0,
        ),
        DisturbanceModel::Composite {
            fatigue_time_constant,
            tremor_amplitude,
            tremor_frequency,
        } => {
            let (add_f, scale_f) = disturbance(
                t,
                &DisturbanceModel::Fatigue {
                    time_constant: fatigue_time_constant,
                },
            );
            let (add_t, scale_t) = disturbance(
                t,
                &DisturbanceModel::Tremor {
                    amplitude: tremor_amplitude,
                    frequency: tremor_frequency,
                },
            );
            (add_f + add_t, scale_f * scale_t)
        }
    }
}

/// Angular acceleration at `(theta, theta_dot, t)` under pulse width `u`.
fn acceleration(
    theta: f64,
    theta_dot: f64,
    t: f64,
    u: f64,
    params: &PlantParams,
    model: &DisturbanceModel,
) -> Result<f64> {
    let (additive, scale) = disturbance(t, model);
    let torque = gravitational_torque(theta, params)
        + elastic_torque(theta, params)
        + viscous_torque(theta_dot, params)
        + additive
        + stimulation_torque(theta, theta_dot, u, params, scale)?;
    Ok(torque / params.inertia)
}

/// Advance the state by one fixed RK4 step of length `dt` with `u` held
/// constant (zero-order hold).
pub fn step(
    state: &PlantState,
    u: f64,
    dt: f64,
    params: &PlantParams,
    model: &DisturbanceModel,
) -> Result<PlantState> {
    if !state.is_finite() {
        return Err(Error::NonFinite("plant state".into()));
    }
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "integration step must be > 0, got {dt}"
        )));
    }

    let f = |th: f64, w: f64, t: f64| acceleration(th, w, t, u, params, model);

    let (th0, w0, t0) = (state.theta, state.theta_dot, state.t);
    let h = dt;

    let a1 = f(th0, w0, t0)?;
    let k1 = (w0, a1);

    let a2 = f(th0 + 0.5 * h * k1.0, w0 + 0.5 * h * k1.1, t0 + 0.5 * h)?;
    let k2 = (w0 + 0.5 * h * k1.1, a2);

    let a3 = f(th0 + 0.5 * h * k2.0, w0 + 0.5 * h * k2.1, t0 + 0.5 * h)?;
    let k3 = (w0 + 0.5 * h * k2.1, a3);

    let a4 = f(th0 + h * k3.0, w0 + h * k3.1, t0 + h)?;
    let k4 = (w0 + h * k3.1, a4);

    Ok(PlantState {
        theta: th0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        theta_dot: w0 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        t: t0 + h,
    })
}
