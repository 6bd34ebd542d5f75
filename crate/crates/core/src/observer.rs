//! Finite-time disturbance observer for the pursuer's lateral acceleration.
//!
//! The observer runs on the evader–pursuer LOS rate. It is a third-order
//! sliding-mode differentiator: `z0` tracks the measured LOS rate, `z1` the
//! unknown input that drives it and `z2` that input's derivative. The
//! evader's own acceleration is known and is fed forward.
//!
//! Two structural forms are available (see [`ObserverForm`]). They differ
//! only in where the pursuer's input gain `cos δ_PE / r` is applied.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::PairGeometry;
use crate::{guarded_cos, sign};

/// Errors raised by the observer.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ObserverError {
    /// A state or derivative component became NaN or infinite.
    #[error("observer state is not finite")]
    NonFiniteState,
    /// Gains violate the required ordering or positivity.
    #[error("observer gains invalid: {0}")]
    InvalidGains(&'static str),
}

/// Observer gains G₀..G₂, H₀..H₂ and the Lipschitz bound on the
/// disturbance derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObserverGains {
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    /// Bound on the disturbance derivative, m/s³.
    pub lipschitz: f64,
}

impl Default for ObserverGains {
    fn default() -> Self {
        Self {
            g0: 0.01,
            g1: 0.05,
            g2: 1.3,
            h0: 0.005,
            h1: 3.25,
            h2: 3.3,
            lipschitz: 0.5,
        }
    }
}

impl ObserverGains {
    /// Checks `g2 > g1 > g0 > 0`, `h2 > h1 > h0 > 0` and `lipschitz > 0`.
    pub fn validate(&self) -> Result<(), ObserverError> {
        if !(self.g2 > self.g1 && self.g1 > self.g0 && self.g0 > 0.0) {
            return Err(ObserverError::InvalidGains("require g2 > g1 > g0 > 0"));
        }
        if !(self.h2 > self.h1 && self.h1 > self.h0 && self.h0 > 0.0) {
            return Err(ObserverError::InvalidGains("require h2 > h1 > h0 > 0"));
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return Err(ObserverError::InvalidGains("require lipschitz > 0"));
        }
        Ok(())
    }
}

/// Which linear gain multiplies the `z1` correction error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Z1LinearGain {
    /// Use H₂ (the default).
    #[default]
    H2,
    /// Use H₁, completing the G/H index pattern.
    H1,
}

/// Structural form of the observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverForm {
    /// The differentiator estimates the LOS-acceleration disturbance
    /// `(cos δ_PE / r)·a_P` directly; the pursuer's acceleration is recovered
    /// at the output as `z1·r / cos δ_PE`. Converges for every sign of
    /// `cos δ_PE`.
    #[default]
    Lumped,
    /// `z1` is the pursuer's acceleration itself and the first correction is
    /// scaled by `cos δ_PE / r` inside `ż0`. The effective correction gain is
    /// of order 1e-4 at 10 km and changes sign when the pursuer's lead angle
    /// passes ±90°.
    AsPrinted,
}

/// Complete observer configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObserverSettings {
    pub gains: ObserverGains,
    pub form: ObserverForm,
    pub z1_linear_gain: Z1LinearGain,
}

/// Internal states plus the last evaluated correction terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObserverState {
    /// LOS-rate estimate, rad/s.
    pub z0: f64,
    /// Disturbance estimate.
    pub z1: f64,
    /// Disturbance-derivative estimate.
    pub z2: f64,
    /// First correction term, same units as `z1`.
    pub v0: f64,
    /// Second correction term, same units as `z2`.
    pub v1: f64,
}

impl ObserverState {
    /// Initial state: the LOS-rate estimate starts at the measurement and
    /// the disturbance prior is zero.
    pub fn initial(measured_los_rate: f64) -> Self {
        Self {
            z0: measured_los_rate,
            ..Self::default()
        }
    }

    /// True when every component is finite.
    pub fn is_finite(&self) -> bool {
        [self.z0, self.z1, self.z2, self.v0, self.v1]
            .iter()
            .all(|c| c.is_finite())
    }
}

/// Time derivative of the integrated observer states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObserverDerivative {
    pub z0_dot: f64,
    pub z1_dot: f64,
    pub z2_dot: f64,
}

/// Evaluates the observer right-hand side.
///
/// Returns the derivative and a copy of `s` with the correction terms
/// `v0`, `v1` refreshed.
pub fn observer_derivative(
    s: &ObserverState,
    measured_los_rate: f64,
    pair_ep: &PairGeometry,
    a_e: f64,
    settings: &ObserverSettings,
) -> Result<(ObserverDerivative, ObserverState), ObserverError> {
    let g = &settings.gains;
    let l = g.lipschitz;
    let e0 = s.z0 - measured_los_rate;
    let v0 = -g.g2 * l.cbrt() * e0.abs().powf(2.0 / 3.0) * sign(e0) - g.h2 * e0 + s.z1;
    let e1 = s.z1 - v0;
    let h_z1 = match settings.z1_linear_gain {
        Z1LinearGain::H2 => g.h2,
        Z1LinearGain::H1 => g.h1,
    };
    let v1 = -g.g1 * l.sqrt() * e1.abs().sqrt() * sign(e1) - h_z1 * e1 + s.z2;
    let e2 = s.z2 - v1;
    let z2_dot = -g.g0 * l * sign(e2) - g.h0 * e2;

    let known = -2.0 * pair_ep.v_r * pair_ep.lambda_dot / pair_ep.r
        - pair_ep.delta_first.cos() / pair_ep.r * a_e;
    let z0_dot = match settings.form {
        ObserverForm::Lumped => known + v0,
        ObserverForm::AsPrinted => known + pair_ep.delta_second.cos() / pair_ep.r * v0,
    };

    let derivative = ObserverDerivative {
        z0_dot,
        z1_dot: v1,
        z2_dot,
    };
    let refreshed = ObserverState { v0, v1, ..*s };
    if ![z0_dot, v1, z2_dot].iter().all(|c| c.is_finite()) || !refreshed.is_finite() {
        return Err(ObserverError::NonFiniteState);
    }
    Ok((derivative, refreshed))
}

/// Raw observer output `z1` (the pursuer's acceleration in the as-printed
/// form, the lumped LOS disturbance in the lumped form).
pub fn estimate(s: &ObserverState) -> f64 {
    s.z1
}

/// Estimated pursuer lateral acceleration â_P, m/s², for either form.
pub fn pursuer_accel_estimate(
    s: &ObserverState,
    pair_ep: &PairGeometry,
    form: ObserverForm,
) -> f64 {
    match form {
        ObserverForm::AsPrinted => estimate(s),
        // |cos δ_PE| is floored at cos 89.9°, as in the guidance laws.
        ObserverForm::Lumped => estimate(s) * pair_ep.r / guarded_cos(pair_ep.delta_second),
    }
}
