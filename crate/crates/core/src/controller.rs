//! Discrete-time RISE control law with filtered error derivative and output
//! saturation.
//!
//! The control signal is
//!
//! ```text
//! u(t) = (ks+1)*e2(t) - (ks+1)*e2(0)
//!        + integral_0^t [ (ks+1)*alpha2*e2 + beta*sgn(e2) ]
//! ```
//!
//! with `e1 = theta_d - theta` and `e2 = e1_dot + alpha1*e1`. The error
//! derivative comes from a first-order filtered differentiator `s/(tau*s+1)`
//! discretized with backward Euler; the integral uses the trapezoidal rule.
//! The output is clamped to `[0, rho_max]` microseconds and the integrator is
//! frozen while pushing further past a bound (conditional integration).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The four RISE gains. All strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiseGains {
    pub alpha1: f64,
    pub alpha2: f64,
    pub ks: f64,
    pub beta: f64,
}

impl RiseGains {
    pub fn new(alpha1: f64, alpha2: f64, ks: f64, beta: f64) -> Self {
        Self {
            alpha1,
            alpha2,
            ks,
            beta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("ks", self.ks),
            ("beta", self.beta),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "gain {name} must be > 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Gains as `[alpha1, alpha2, ks, beta]`, the order used everywhere.
    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha1, self.alpha2, self.ks, self.beta]
    }

    pub fn from_array(g: [f64; 4]) -> Self {
        Self::new(g[0], g[1], g[2], g[3])
    }
}

/// Known bounds on the disturbance-dependent terms of the stability analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GainConditionBounds {
    /// Bound on the disturbance term itself.
    pub e_wd: f64,
    /// Bound on its time derivative.
    pub e_wd_dot: f64,
}

impl Default for GainConditionBounds {
    fn default() -> Self {
        // The true bounds depend on unknown plant constants; these are
        // tuning-time placeholders, configurable per subject.
        Self {
            e_wd: 1.0,
            e_wd_dot: 1.0,
        }
    }
}

impl GainConditionBounds {
    pub fn validate(&self) -> Result<()> {
        if !self.e_wd.is_finite() || self.e_wd < 0.0 || !self.e_wd_dot.is_finite()
            || self.e_wd_dot < 0.0
        {
            return Err(Error::InvalidParameter(
                "gain condition bounds must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of the sufficient-condition check on beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainCondition {
    pub satisfied: bool,
    /// `beta - (e_wd + e_wd_dot / alpha2)`; positive iff satisfied.
    pub margin: f64,
}

/// Checks the sufficient condition `beta > e_wd + e_wd_dot / alpha2`.
///
/// The inequality is strict: equality is reported as not satisfied with zero
/// margin.
pub fn check_gain_condition(gains: &RiseGains, bounds: &GainConditionBounds) -> GainCondition {
    let rhs = bounds.e_wd + bounds.e_wd_dot / gains.alpha2;
    let margin = gains.beta - rhs;
    GainCondition {
        satisfied: gains.beta > rhs,
        margin,
    }
}

/// Static controller configuration: filter time constant and saturation range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSettings {
    /// Derivative filter time constant (s).
    pub tau: f64,
    /// Initial/minimum operating pulse width (us); metadata, the lower clamp
    /// is always 0.
    pub rho_min: f64,
    /// Saturation ceiling (us), at most the stimulator range of 400.
    pub rho_max: f64,
    pub condition_bounds: GainConditionBounds,
}

impl Default for ControllerSettings {
    fn default() -> Self {
        Self {
            tau: 0.01,
            rho_min: 0.0,
            rho_max: 300.0,
            condition_bounds: GainConditionBounds::default(),
        }
    }
}

impl ControllerSettings {
    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "filter time constant must be > 0, got {}",
                self.tau
            )));
        }
        if !(self.rho_min >= 0.0 && self.rho_min < self.rho_max && self.rho_max <= 400.0) {
            return Err(Error::InvalidParameter(format!(
                "pulse width range must satisfy 0 <= rho_min < rho_max <= 400, got [{}, {}]",
                self.rho_min, self.rho_max
            )));
        }
        self.condition_bounds.validate()
    }
}

/// Mutable controller memory: filter state, integral accumulator, and the
/// recorded `e2(0)`. One instance per trajectory run; `reset` before reuse.
#[derive(Debug, Clone)]
pub struct ControllerState {
    tau: f64,
    rho_min: f64,
    rho_max: f64,
    initialized: bool,
    /// e2 captured on the first step after (re)initialization.
    e2_init: f64,
    e2_prev: f64,
    integral_acc: f64,
    prev_integrand: f64,
    /// Backward-Euler differentiator memory.
    deriv_filter_state: f64,
    prev_filter_input: f64,
    filter_seeded: bool,
    u_prev: f64,
    last_saturated: bool,
}

impl ControllerState {
    pub fn new(settings: &ControllerSettings) -> Result<Self> {
        settings.validate()?;
        Ok(Self {
            tau: settings.tau,
            rho_min: settings.rho_min,
            rho_max: settings.rho_max,
            initialized: false,
            e2_init: 0.0,
            e2_prev: 0.0,
            integral_acc: 0.0,
            prev_integrand: 0.0,
            deriv_filter_state: 0.0,
            prev_filter_input: 0.0,
            filter_seeded: false,
            u_prev: 0.0,
            last_saturated: false,
        })
    }

    /// Clears all memory for a new trajectory run; settings are kept.
    pub fn reset(&mut self) {
        self.initialized = false;
        self.e2_init = 0.0;
        self.e2_prev = 0.0;
        self.integral_acc = 0.0;
        self.prev_integrand = 0.0;
        self.deriv_filter_state = 0.0;
        self.prev_filter_input = 0.0;
        self.filter_seeded = false;
        self.u_prev = 0.0;
        self.last_saturated = false;
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn integral_acc(&self) -> f64 {
        self.integral_acc
    }

    pub fn last_output(&self) -> f64 {
        self.u_prev
    }

    /// Whether the previous step's raw output exceeded `[0, rho_max]`.
    pub fn last_saturated(&self) -> bool {
        self.last_saturated
    }

    /// Filtered differentiator `s/(tau*s+1)`, backward Euler:
    /// `y_k = (tau*y_{k-1} + x_k - x_{k-1}) / (tau + dt)`.
    ///
    /// The first call seeds the input memory and returns 0.
    pub fn filtered_derivative(&mut self, x_k: f64, dt: f64) -> Result<f64> {
        if !x_k.is_finite() {
            return Err(Error::NonFinite("differentiator input".into()));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {dt}"
            )));
        }
        if !self.filter_seeded {
            self.prev_filter_input = x_k;
            self.deriv_filter_state = 0.0;
            self.filter_seeded = true;
            return Ok(0.0);
        }
        let y = (self.tau * self.deriv_filter_state + (x_k - self.prev_filter_input))
            / (self.tau + dt);
        self.deriv_filter_state = y;
        self.prev_filter_input = x_k;
        Ok(y)
    }

    /// One RISE step given the measured and desired angle (rad).
    ///
    /// `theta_d_dot` participates only in input validation; the error
    /// derivative is reconstructed by the filtered differentiator.
    pub fn rise_step(
        &mut self,
        theta: f64,
        theta_d: f64,
        theta_d_dot: f64,
        gains: &RiseGains,
        dt: f64,
    ) -> Result<f64> {
        if !theta.is_finite() || !theta_d.is_finite() || !theta_d_dot.is_finite() {
            return Err(Error::NonFinite("controller input".into()));
        }
        let e1 = theta_d - theta;
        let e1_dot = self.filtered_derivative(e1, dt)?;
        let e2 = e1_dot + gains.alpha1 * e1;
        self.step_from_e2(e2, gains, dt)
    }

    /// Core update from an already-formed `e2`; exposed so the integral path
    /// can be driven directly, bypassing the derivative filter.
    pub fn step_from_e2(&mut self, e2: f64, gains: &RiseGains, dt: f64) -> Result<f64> {
        if !e2.is_finite() {
            return Err(Error::NonFinite("e2".into()));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "dt must be > 0, got {dt}"
            )));
        }

        let integrand = (gains.ks + 1.0) * gains.alpha2 * e2 + gains.beta * signum_zero(e2);

        if !self.initialized {
            self.e2_init = e2;
            self.initialized = true;
        } else {
            let candidate = self.integral_acc + 0.5 * dt * (integrand + self.prev_integrand);
            let u_candidate = (gains.ks + 1.0) * (e2 - self.e2_init) + candidate;
            // conditional integration: hold the accumulator while it would
            // push the output further past a saturation bound
            let pushing_high = u_candidate > self.rho_max && candidate > self.integral_acc;
            let pushing_low = u_candidate < 0.0 && candidate < self.integral_acc;
            if !(pushing_high || pushing_low) {
                self.integral_acc = candidate;
            }
        }
        self.prev_integrand = integrand;
        self.e2_prev = e2;

        let u_raw = (gains.ks + 1.0) * (e2 - self.e2_init) + self.integral_acc;
        self.last_saturated = u_raw < 0.0 || u_raw > self.rho_max;
        let u = self.saturate(u_raw);
        self.u_prev = u;
        Ok(u)
    }

    /// Clamp a raw command to `[0, rho_max]` microseconds.
    pub fn saturate(&self, u_raw: f64) -> f64 {
        u_raw.clamp(0.0, self.rho_max)
    }
}

/// sgn with sgn(0) = 0, so an exactly-zero error injects no bias.
fn signum_zero(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
