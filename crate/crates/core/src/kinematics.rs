//! Planar point-mass engagement kinematics.
//!
//! Every agent flies at constant speed and steers only through a lateral
//! acceleration normal to its velocity. All functions here are pure: they
//! turn agent states into pair geometry, state derivatives, line-of-sight
//! accelerations and time-to-go estimates.
//!
//! Pair convention: a pair "XY" is always built with X as the *first* agent.
//! The LOS angle points from X to Y, `delta_first` is X's heading relative to
//! that LOS and `delta_second` is Y's. The radial and transverse relative
//! speeds are Y's velocity minus X's, projected on and across the LOS.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separation below which two agents are treated as coincident, in meters.
pub const COINCIDENCE_FLOOR: f64 = 1e-9;

/// Errors raised by geometry and time-to-go evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum KinematicsError {
    /// The two agents are closer than [`COINCIDENCE_FLOOR`]; the LOS is undefined.
    #[error("agents are coincident (separation {distance:e} m)")]
    CoincidentAgents { distance: f64 },
    /// The pair is not closing, so a collision-course time-to-go does not exist.
    #[error("pair is not closing (radial speed {v_r} m/s)")]
    NotClosing { v_r: f64 },
    /// Deviated pursuit needs the pursuing agent to be strictly faster.
    #[error("own speed {v_own} m/s must exceed target speed {v_target} m/s")]
    SpeedOrderViolation { v_own: f64, v_target: f64 },
    /// The pursuing agent's lead angle is at or beyond ±90°.
    #[error("lead angle {delta} rad is outside (-pi/2, pi/2)")]
    LeadAngleOutOfRange { delta: f64 },
}

/// Wraps an angle to the half-open interval (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

/// Position, heading and speed of one point-mass agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    /// East position, m.
    pub x: f64,
    /// North position, m.
    pub y: f64,
    /// Heading angle measured from the x axis, rad, kept in (−π, π].
    pub gamma: f64,
    /// Speed, m/s. Constant over an engagement.
    pub v: f64,
}

impl AgentState {
    /// Builds a state with the heading wrapped to (−π, π].
    pub fn new(x: f64, y: f64, gamma: f64, v: f64) -> Self {
        Self {
            x,
            y,
            gamma: wrap_angle(gamma),
            v,
        }
    }

    /// Velocity vector (ẋ, ẏ), m/s.
    pub fn velocity(&self) -> (f64, f64) {
        (self.v * self.gamma.cos(), self.v * self.gamma.sin())
    }

    /// Euclidean distance to another agent, m.
    pub fn distance_to(&self, other: &AgentState) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// True when every field is a finite number.
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.gamma.is_finite() && self.v.is_finite()
    }
}

/// Relative geometry of an ordered agent pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGeometry {
    /// Range, m. Always positive.
    pub r: f64,
    /// LOS angle from the first agent to the second, rad.
    pub lambda: f64,
    /// First agent's heading relative to the LOS, rad.
    pub delta_first: f64,
    /// Second agent's heading relative to the LOS, rad.
    pub delta_second: f64,
    /// Radial relative speed (negative when closing), m/s.
    pub v_r: f64,
    /// Transverse relative speed, m/s.
    pub v_lambda: f64,
    /// LOS rate, rad/s. Equal to `v_lambda / r`.
    pub lambda_dot: f64,
}

/// Time derivative of an [`AgentState`] under a lateral acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    /// m/s.
    pub x_dot: f64,
    /// m/s.
    pub y_dot: f64,
    /// Turn rate, rad/s.
    pub gamma_dot: f64,
}

/// A time-to-go value together with whether the closed form is exact for
/// the current situation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeEstimate {
    /// Seconds until capture. Always positive.
    pub value: f64,
    /// `true` when the formula's assumptions hold, so `value` is exact
    /// rather than an estimate.
    pub exact: bool,
}

/// Builds the geometry of the ordered pair (a, b).
pub fn pair_geometry(a: &AgentState, b: &AgentState) -> Result<PairGeometry, KinematicsError> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let r = dx.hypot(dy);
    if !(r >= COINCIDENCE_FLOOR) {
        return Err(KinematicsError::CoincidentAgents { distance: r });
    }
    let lambda = dy.atan2(dx);
    let delta_first = wrap_angle(a.gamma - lambda);
    let delta_second = wrap_angle(b.gamma - lambda);
    let v_r = b.v * delta_second.cos() - a.v * delta_first.cos();
    let v_lambda = b.v * delta_second.sin() - a.v * delta_first.sin();
    Ok(PairGeometry {
        r,
        lambda,
        delta_first,
        delta_second,
        v_r,
        v_lambda,
        lambda_dot: v_lambda / r,
    })
}

/// Planar kinematics of one agent: constant speed, turn rate `accel / v`.
pub fn state_derivative(s: &AgentState, accel: f64) -> StateDerivative {
    StateDerivative {
        x_dot: s.v * s.gamma.cos(),
        y_dot: s.v * s.gamma.sin(),
        gamma_dot: accel / s.v,
    }
}

/// Second derivative of the LOS angle for a pair whose agents apply lateral
/// accelerations `a_first` and `a_second`, rad/s².
pub fn los_accel(pair: &PairGeometry, a_first: f64, a_second: f64) -> f64 {
    -2.0 * pair.v_r * pair.lambda_dot / pair.r - pair.delta_first.cos() / pair.r * a_first
        + pair.delta_second.cos() / pair.r * a_second
}

/// Collision-course time-to-go `−r / v_r`.
///
/// The value is exact only while both agents stay on a collision course
/// (`|λ̇| < los_rate_tolerance`); otherwise it is an estimate.
pub fn tgo_collision(
    pair: &PairGeometry,
    los_rate_tolerance: f64,
) -> Result<TimeEstimate, KinematicsError> {
    if !(pair.v_r < 0.0) {
        return Err(KinematicsError::NotClosing { v_r: pair.v_r });
    }
    Ok(TimeEstimate {
        value: -pair.r / pair.v_r,
        exact: pair.lambda_dot.abs() < los_rate_tolerance,
    })
}

/// Closed-form time-to-go of a deviated-pursuit engagement in which the
/// first agent of `pair` (speed `v_own`) holds its lead angle against the
/// second (speed `v_target`).
///
/// `target_steady` is the caller's assertion that the target does not
/// maneuver and the lead angle is held; it only sets the `exact` flag.
pub fn tgo_deviated_pursuit(
    pair: &PairGeometry,
    v_own: f64,
    v_target: f64,
    target_steady: bool,
) -> Result<TimeEstimate, KinematicsError> {
    if !(v_own > v_target) {
        return Err(KinematicsError::SpeedOrderViolation { v_own, v_target });
    }
    if !(pair.delta_first.abs() < PI / 2.0) {
        return Err(KinematicsError::LeadAngleOutOfRange {
            delta: pair.delta_first,
        });
    }
    Ok(TimeEstimate {
        value: deviated_pursuit_time(pair, v_own, v_target, pair.delta_first.cos()),
        exact: target_steady,
    })
}

/// Deviated-pursuit time-to-go with the lead-angle cosine supplied by the
/// caller (guidance laws pass a guarded cosine).
pub(crate) fn deviated_pursuit_time(
    pair: &PairGeometry,
    v_own: f64,
    v_target: f64,
    cos_own: f64,
) -> f64 {
    let spread = v_own * v_own - v_target * v_target;
    pair.r * (v_own + v_target * (pair.delta_second + pair.delta_first).cos()) / (cos_own * spread)
}

/// Rate of change of the collision-course time-to-go, s/s.
///
/// `a_first` and `a_second` are the lateral accelerations of the pair's
/// first and second agents (evader and pursuer for the EP pair).
pub fn tgo_collision_rate(
    pair: &PairGeometry,
    a_first: f64,
    a_second: f64,
) -> Result<f64, KinematicsError> {
    if !(pair.v_r < 0.0) {
        return Err(KinematicsError::NotClosing { v_r: pair.v_r });
    }
    let v_r2 = pair.v_r * pair.v_r;
    Ok(-1.0
        + pair.r * pair.r * pair.lambda_dot * pair.lambda_dot / v_r2
        + pair.r * pair.delta_first.sin() / v_r2 * a_first
        - pair.r * pair.delta_second.sin() / v_r2 * a_second)
}

/// Rate of change of the deviated-pursuit time-to-go, s/s.
///
/// `a_own` is the pursuing (first) agent's lateral acceleration and
/// `a_target` the second agent's.
pub fn tgo_dp_rate(
    pair: &PairGeometry,
    v_own: f64,
    v_target: f64,
    a_own: f64,
    a_target: f64,
) -> Result<f64, KinematicsError> {
    if !(v_own > v_target) {
        return Err(KinematicsError::SpeedOrderViolation { v_own, v_target });
    }
    if !(pair.delta_first.abs() < PI / 2.0) {
        return Err(KinematicsError::LeadAngleOutOfRange {
            delta: pair.delta_first,
        });
    }
    Ok(deviated_pursuit_rate(pair, v_own, v_target, a_own, a_target))
}

/// The three coefficients of the deviated-pursuit time-to-go rate:
/// `ṫ = −1 + drift + own·a_own + target·a_target`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DeviatedPursuitRate {
    pub drift: f64,
    pub own: f64,
    pub target: f64,
}

pub(crate) fn deviated_pursuit_rate_terms(
    pair: &PairGeometry,
    v_own: f64,
    v_target: f64,
    cos_own: f64,
) -> DeviatedPursuitRate {
    let spread = v_own * v_own - v_target * v_target;
    let sec2 = 1.0 / (cos_own * cos_own);
    let r2 = pair.r * pair.r;
    DeviatedPursuitRate {
        drift: r2 * pair.lambda_dot * pair.lambda_dot * sec2 / spread,
        own: -r2 * pair.lambda_dot * sec2 / (v_own * spread),
        target: -pair.r * (pair.delta_second + pair.delta_first).sin() / (cos_own * spread),
    }
}

fn deviated_pursuit_rate(
    pair: &PairGeometry,
    v_own: f64,
    v_target: f64,
    a_own: f64,
    a_target: f64,
) -> f64 {
    let terms = deviated_pursuit_rate_terms(pair, v_own, v_target, pair.delta_first.cos());
    -1.0 + terms.drift + terms.own * a_own + terms.target * a_target
}
