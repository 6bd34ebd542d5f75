//! Guidance laws for all three agents.
//!
//! * The evader nulls its LOS rate to the pursuer with a fixed-time
//!   sliding-mode law, feeding forward the (estimated) pursuer maneuver.
//! * The defender flies deviated pursuit and shapes its own time-to-go with
//!   one of four sliding-mode laws: against the pursuer (aggressive) or
//!   towards the evader (defensive), with a fixed impact time (indirect
//!   cooperation) or a fixed margin relative to the evader's time-to-go
//!   (direct cooperation).
//! * The pursuer uses proportional navigation, a scripted maneuver, or both.
//!
//! Every defender law has the same structure. Writing the manifold rate as
//! `σ̇ = drift + own·a_D + extra + c_E·a_E + c_P·a_P`, the command is chosen so
//! that `σ̇ = −(F(σ) + ε·sec δ)·sign σ`, which yields
//! `a_D = v_D·λ̇ + (drive − extra − c_E·a_E − c_P·â_P) / own`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{deviated_pursuit_rate_terms, deviated_pursuit_time, PairGeometry};
use crate::{guarded_cos, sign};

/// Below this transverse speed (m/s) the terms divided by `v_λ` are dropped.
pub const V_LAMBDA_GUARD: f64 = 1e-6;

/// Largest lead angle accepted at configuration time, rad (89.9°).
pub const LEAD_ANGLE_LIMIT: f64 = 89.9 * std::f64::consts::PI / 180.0;

/// Errors raised by guidance evaluation and gain validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GuidanceError {
    #[error("lead angle {delta} rad is at or beyond the ±89.9° limit")]
    LeadAngleSingular { delta: f64 },
    #[error("own speed {v_own} m/s must exceed target speed {v_target} m/s")]
    SpeedOrderViolation { v_own: f64, v_target: f64 },
    #[error("evader-pursuer pair is not closing (radial speed {v_r} m/s)")]
    NotClosing { v_r: f64 },
    #[error("invalid gains: {0}")]
    InvalidGains(String),
}

/// Gains of one fixed-time sliding-mode law.
///
/// The reaching term is `F(σ) = (ζ|σ|^α + ξ|σ|^β)^κ`; the robustness margin
/// `ε` is added as `ε·sec δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmcGains {
    pub zeta: f64,
    pub xi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    /// Robustness margin in the manifold's rate units.
    pub epsilon: f64,
    /// Boundary-layer width φ; `sign σ` becomes `σ / (|σ| + φ)` when φ > 0.
    pub boundary_layer: f64,
}

impl SmcGains {
    /// Default gains of the evader's LOS-rate law.
    pub const EVADER: SmcGains = SmcGains {
        zeta: 0.05,
        xi: 0.005,
        alpha: 0.2,
        beta: 2.0,
        kappa: 1.0,
        epsilon: 1e-4,
        boundary_layer: 1e-5,
    };
    /// Default gains of the aggressive, indirect defender law.
    pub const AGGRESSIVE_INDIRECT: SmcGains = SmcGains {
        zeta: 0.005,
        xi: 0.5,
        alpha: 0.3,
        beta: 2.0,
        kappa: 1.0,
        epsilon: 0.5,
        boundary_layer: 0.0,
    };
    /// Default gains of the aggressive, direct defender law.
    pub const AGGRESSIVE_DIRECT: SmcGains = SmcGains::AGGRESSIVE_INDIRECT;
    /// Default gains of the defensive, indirect defender law.
    pub const DEFENSIVE_INDIRECT: SmcGains = SmcGains {
        zeta: 0.05,
        xi: 25.0,
        alpha: 0.3,
        beta: 2.0,
        kappa: 1.0,
        epsilon: 0.5,
        boundary_layer: 0.0,
    };
    /// Default gains of the defensive, direct defender law.
    pub const DEFENSIVE_DIRECT: SmcGains = SmcGains::DEFENSIVE_INDIRECT;

    /// Checks positivity and the exponent conditions `ακ < 1 < βκ`.
    pub fn validate(&self) -> Result<(), GuidanceError> {
        let positive = [
            ("zeta", self.zeta),
            ("xi", self.xi),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("kappa", self.kappa),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GuidanceError::InvalidGains(format!("{name} must be positive")));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(GuidanceError::InvalidGains("epsilon must be non-negative".into()));
        }
        if !(self.boundary_layer >= 0.0 && self.boundary_layer.is_finite()) {
            return Err(GuidanceError::InvalidGains(
                "boundary_layer must be non-negative".into(),
            ));
        }
        if !(self.alpha * self.kappa < 1.0) {
            return Err(GuidanceError::InvalidGains("alpha*kappa must be < 1".into()));
        }
        if !(self.beta * self.kappa > 1.0) {
            return Err(GuidanceError::InvalidGains("beta*kappa must be > 1".into()));
        }
        Ok(())
    }

    /// Reaching term `F(σ) = (ζ|σ|^α + ξ|σ|^β)^κ`.
    pub fn reaching(&self, sigma: f64) -> f64 {
        let m = sigma.abs();
        (self.zeta * m.powf(self.alpha) + self.xi * m.powf(self.beta)).powf(self.kappa)
    }

    /// Switching function: exact sign, or the boundary-layer form.
    pub fn switching(&self, sigma: f64) -> f64 {
        if self.boundary_layer > 0.0 {
            sigma / (sigma.abs() + self.boundary_layer)
        } else {
            sign(sigma)
        }
    }
}

/// Upper bound on the settling time of a fixed-time law, s:
/// `1/(ζ^κ(1 − ακ)) + 1/(ξ^κ(βκ − 1))`.
pub fn fixed_time_bound(gains: &SmcGains) -> f64 {
    let k = gains.kappa;
    1.0 / (gains.zeta.powf(k) * (1.0 - gains.alpha * k))
        + 1.0 / (gains.xi.powf(k) * (gains.beta * k - 1.0))
}

/// Whether the defender engages the pursuer or joins the evader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stance {
    /// Intercept the pursuer before it reaches the evader.
    Aggressive,
    /// Rendezvous with the evader before the pursuer does.
    Defensive,
}

/// How the defender's timing target is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cooperation {
    /// A fixed impact time, s, handed over at launch.
    Indirect { impact_time: f64 },
    /// A constant margin, s, ahead of the evader–pursuer time-to-go.
    Direct { margin: f64 },
}

/// Which coupling the defensive, direct law uses for the defender–evader
/// target term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefensiveDirectForm {
    /// The defender–evader target-maneuver term multiplies â_P, exactly as
    /// the law is usually written.
    #[default]
    AsPrinted,
    /// The defender–evader target-maneuver term multiplies a_E, matching the
    /// time-to-go rate of the defender–evader pair.
    Consistent,
}

/// Defender operating mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceMode {
    pub stance: Stance,
    pub cooperation: Cooperation,
}

/// Scripted lateral-acceleration profile
/// `a(t) = bias + ramp·t + amplitude·sin(π·omega_over_pi·t)`, m/s².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptedProfile {
    /// m/s².
    pub bias: f64,
    /// m/s³.
    pub ramp: f64,
    /// m/s².
    pub amplitude: f64,
    /// Angular frequency in units of π rad/s.
    pub omega_over_pi: f64,
}

impl ScriptedProfile {
    /// Profile value at time `t`, m/s².
    pub fn at(&self, t: f64) -> f64 {
        self.bias + self.ramp * t + self.amplitude * (std::f64::consts::PI * self.omega_over_pi * t).sin()
    }
}

/// The pursuer's homing/maneuver law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PursuerKind {
    /// `a_P = −N·v_r·λ̇` on the evader–pursuer pair.
    ProNav { gain: f64 },
    /// A scripted profile only.
    Scripted { profile: ScriptedProfile },
    /// Proportional navigation with a scripted maneuver added on top.
    ProNavPlusScripted { gain: f64, profile: ScriptedProfile },
}

/// Pursuer strategy with its acceleration limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PursuerStrategy {
    pub kind: PursuerKind,
    /// m/s².
    pub a_max: f64,
}

/// A lateral-acceleration command before and after saturation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GuidanceCommand {
    /// Unsaturated command, m/s².
    pub raw: f64,
    /// Command after clamping to ±a_max, m/s².
    pub applied: f64,
    /// Sliding-manifold value driving the law (rad/s for the evader, s for
    /// the defender, 0 for the pursuer).
    pub manifold: f64,
}

impl GuidanceCommand {
    fn new(raw: f64, a_max: f64, manifold: f64) -> Self {
        Self {
            raw,
            applied: saturate(raw, a_max),
            manifold,
        }
    }
}

/// Clamps an acceleration to `[−a_max, a_max]`.
pub fn saturate(raw: f64, a_max: f64) -> f64 {
    raw.clamp(-a_max, a_max)
}

/// Evader manifold: the evader–pursuer LOS rate, rad/s.
pub fn sigma1(pair_ep: &PairGeometry) -> f64 {
    pair_ep.lambda_dot
}

/// Evader law: drive the evader–pursuer LOS rate to zero in fixed time.
pub fn evader_command(
    pair_ep: &PairGeometry,
    a_p_hat: f64,
    gains: &SmcGains,
    a_max: f64,
) -> GuidanceCommand {
    let sigma = sigma1(pair_ep);
    let c = guarded_cos(pair_ep.delta_first);
    let raw = -2.0 * pair_ep.v_r * pair_ep.lambda_dot / c
        + pair_ep.delta_second.cos() / c * a_p_hat
        + pair_ep.r / c * (gains.reaching(sigma) + gains.epsilon / c) * gains.switching(sigma);
    GuidanceCommand::new(raw, a_max, sigma)
}

/// Known couplings in the defender's manifold rate besides its own pair.
#[derive(Debug, Clone, Copy, Default)]
struct Coupling {
    extra: f64,
    a_e: f64,
    a_p: f64,
}

/// Deviated-pursuit time-to-go of the defender's pair with a guarded cosine.
fn defender_tgo(pair: &PairGeometry, v_d: f64, v_target: f64) -> f64 {
    deviated_pursuit_time(pair, v_d, v_target, guarded_cos(pair.delta_first))
}

#[allow(clippy::too_many_arguments)]
fn defender_raw(
    pair: &PairGeometry,
    v_d: f64,
    v_target: f64,
    sigma: f64,
    gains: &SmcGains,
    coupling: Coupling,
    a_e: f64,
    a_p_hat: f64,
) -> f64 {
    let c = guarded_cos(pair.delta_first);
    let mut raw = v_d * pair.lambda_dot;
    if pair.v_lambda.abs() >= V_LAMBDA_GUARD {
        let spread = v_d * v_d - v_target * v_target;
        let inv_own = -c * c * v_d * spread / (pair.r * pair.v_lambda);
        let drive = -(gains.reaching(sigma) + gains.epsilon / c) * gains.switching(sigma);
        raw += inv_own * (drive - coupling.extra - coupling.a_e * a_e - coupling.a_p * a_p_hat);
    }
    raw
}

/// Target-maneuver coefficient of the defender pair's time-to-go rate.
fn target_coefficient(pair: &PairGeometry, v_d: f64, v_target: f64) -> f64 {
    deviated_pursuit_rate_terms(pair, v_d, v_target, guarded_cos(pair.delta_first)).target
}

/// Evader–pursuer time-to-go and the couplings of its rate into a direct
/// cooperation manifold (`σ̇ ∋ −ṫ_EP`).
fn evader_pursuer_coupling(pair_ep: &PairGeometry) -> Result<(f64, Coupling), GuidanceError> {
    if !(pair_ep.v_r < 0.0) {
        return Err(GuidanceError::NotClosing { v_r: pair_ep.v_r });
    }
    let v_r2 = pair_ep.v_r * pair_ep.v_r;
    let coupling = Coupling {
        extra: -pair_ep.v_lambda * pair_ep.v_lambda / v_r2,
        a_e: -pair_ep.r * pair_ep.delta_first.sin() / v_r2,
        a_p: pair_ep.r * pair_ep.delta_second.sin() / v_r2,
    };
    Ok((-pair_ep.r / pair_ep.v_r, coupling))
}

fn check_speed_order(v_own: f64, v_target: f64) -> Result<(), GuidanceError> {
    if v_own > v_target {
        Ok(())
    } else {
        Err(GuidanceError::SpeedOrderViolation { v_own, v_target })
    }
}

/// Aggressive stance, indirect cooperation: intercept the pursuer at the
/// absolute time `impact_time`.
#[allow(clippy::too_many_arguments)]
pub fn defender_aggressive_indirect(
    pair_dp: &PairGeometry,
    a_p_hat: f64,
    impact_time: f64,
    t: f64,
    v_d: f64,
    v_p: f64,
    gains: &SmcGains,
    a_max: f64,
) -> Result<GuidanceCommand, GuidanceError> {
    check_speed_order(v_d, v_p)?;
    let sigma = defender_tgo(pair_dp, v_d, v_p) - (impact_time - t);
    let coupling = Coupling {
        a_p: target_coefficient(pair_dp, v_d, v_p),
        ..Coupling::default()
    };
    let raw = defender_raw(pair_dp, v_d, v_p, sigma, gains, coupling, 0.0, a_p_hat);
    Ok(GuidanceCommand::new(raw, a_max, sigma))
}

/// Aggressive stance, direct cooperation: intercept the pursuer `margin`
/// seconds before it would reach the evader.
#[allow(clippy::too_many_arguments)]
pub fn defender_aggressive_direct(
    pair_ep: &PairGeometry,
    pair_dp: &PairGeometry,
    a_e: f64,
    a_p_hat: f64,
    margin: f64,
    v_d: f64,
    v_p: f64,
    gains: &SmcGains,
    a_max: f64,
) -> Result<GuidanceCommand, GuidanceError> {
    check_speed_order(v_d, v_p)?;
    let (tgo_ep, mut coupling) = evader_pursuer_coupling(pair_ep)?;
    let sigma = defender_tgo(pair_dp, v_d, v_p) - (tgo_ep - margin);
    coupling.a_p += target_coefficient(pair_dp, v_d, v_p);
    let raw = defender_raw(pair_dp, v_d, v_p, sigma, gains, coupling, a_e, a_p_hat);
    Ok(GuidanceCommand::new(raw, a_max, sigma))
}

/// Defensive stance, indirect cooperation: reach the evader at the absolute
/// time `impact_time`.
pub fn defender_defensive_indirect(
    pair_de: &PairGeometry,
    impact_time: f64,
    t: f64,
    v_d: f64,
    v_e: f64,
    gains: &SmcGains,
    a_max: f64,
) -> Result<GuidanceCommand, GuidanceError> {
    check_speed_order(v_d, v_e)?;
    let sigma = defender_tgo(pair_de, v_d, v_e) - (impact_time - t);
    let raw = defender_raw(pair_de, v_d, v_e, sigma, gains, Coupling::default(), 0.0, 0.0);
    Ok(GuidanceCommand::new(raw, a_max, sigma))
}

/// Defensive stance, direct cooperation: reach the evader `margin` seconds
/// before the pursuer would.
#[allow(clippy::too_many_arguments)]
pub fn defender_defensive_direct(
    pair_ep: &PairGeometry,
    pair_de: &PairGeometry,
    a_e: f64,
    a_p_hat: f64,
    margin: f64,
    v_d: f64,
    v_e: f64,
    gains: &SmcGains,
    a_max: f64,
    form: DefensiveDirectForm,
) -> Result<GuidanceCommand, GuidanceError> {
    check_speed_order(v_d, v_e)?;
    let (tgo_ep, mut coupling) = evader_pursuer_coupling(pair_ep)?;
    let sigma = defender_tgo(pair_de, v_d, v_e) - tgo_ep + margin;
    let target = target_coefficient(pair_de, v_d, v_e);
    match form {
        DefensiveDirectForm::AsPrinted => coupling.a_p += target,
        DefensiveDirectForm::Consistent => coupling.a_e += target,
    }
    let raw = defender_raw(pair_de, v_d, v_e, sigma, gains, coupling, a_e, a_p_hat);
    Ok(GuidanceCommand::new(raw, a_max, sigma))
}

/// Pursuer command at time `t`.
pub fn pursuer_command(pair_ep: &PairGeometry, strategy: &PursuerStrategy, t: f64) -> GuidanceCommand {
    let pro_nav = |gain: f64| -gain * pair_ep.v_r * pair_ep.lambda_dot;
    let raw = match strategy.kind {
        PursuerKind::ProNav { gain } => pro_nav(gain),
        PursuerKind::Scripted { profile } => profile.at(t),
        PursuerKind::ProNavPlusScripted { gain, profile } => pro_nav(gain) + profile.at(t),
    };
    GuidanceCommand::new(raw, strategy.a_max, 0.0)
}
