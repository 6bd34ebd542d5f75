//! Scenario files, validation and built-in presets.
//!
//! Scenarios are TOML documents with the sections `[evader]`, `[pursuer]`
//! (plus an optional `[pursuer.script]`), `[defender]`, `[mode]`,
//! `[gains.sigma1]` … `[gains.sigma5]`, `[observer]` and `[sim]`. Angles are
//! given in degrees and acceleration limits in g (`a_max_g`) or m/s²
//! (`a_max_mps2`); [`ScenarioConfig`] keeps those document units so that
//! rendering and re-parsing reproduces a configuration exactly, and
//! [`ScenarioConfig::resolve`] converts to SI once.
//!
//! Placement: the evader is placed by `x`/`y`. The pursuer and defender are
//! placed either by `x`/`y` or by `range` and `los_deg`, where `los_deg` is
//! the LOS angle of the agent's pair measured from the pair's first agent:
//! evader → pursuer for the pursuer, defender → evader for the defender.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EstimateSource, LawGains, Method, Scenario, SimSettings};
use crate::guidance::{
    Cooperation, DefensiveDirectForm, GuidanceMode, PursuerKind, PursuerStrategy,
    ScriptedProfile, SmcGains, Stance, LEAD_ANGLE_LIMIT,
};
use crate::kinematics::{pair_geometry, AgentState};
use crate::observer::{ObserverForm, ObserverGains, ObserverSettings, Z1LinearGain};
use crate::STANDARD_GRAVITY;

/// Errors raised while reading or validating a scenario.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    /// The text is not a well-formed scenario document.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    /// Required keys are absent.
    #[error("missing required keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),
    /// A named invariant does not hold.
    #[error("{invariant}: {detail}")]
    Validation { invariant: String, detail: String },
    /// No built-in preset has this name.
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
}

fn invalid(invariant: &str, detail: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        invariant: invariant.to_string(),
        detail: detail.into(),
    }
}

/// Initial position of an agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Placement {
    /// Absolute position, m.
    Cartesian { x: f64, y: f64 },
    /// Range (m) and LOS angle (deg) of the agent's pair.
    Polar { range: f64, los_deg: f64 },
}

/// Lateral acceleration limit in document units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AccelLimit {
    /// Multiples of standard gravity.
    G(f64),
    /// m/s².
    Mps2(f64),
}

impl AccelLimit {
    /// Limit in m/s².
    pub fn mps2(&self) -> f64 {
        match *self {
            AccelLimit::G(g) => g * STANDARD_GRAVITY,
            AccelLimit::Mps2(a) => a,
        }
    }
}

/// One agent's initial condition and limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub placement: Placement,
    /// Heading, deg.
    pub heading_deg: f64,
    /// m/s.
    pub speed: f64,
    pub a_max: AccelLimit,
}

/// Pursuer initial condition, limit and strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PursuerConfig {
    pub agent: AgentConfig,
    pub strategy: PursuerKind,
}

/// Observer configuration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObserverConfig {
    pub source: EstimateSource,
    pub settings: ObserverSettings,
}

/// Per-scenario overrides of the simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimOverrides {
    pub dt: Option<f64>,
    pub method: Option<Method>,
    pub capture_radius: Option<f64>,
    pub max_time: Option<f64>,
    pub los_rate_tolerance: Option<f64>,
    pub manifold_tolerance: Option<f64>,
}

impl SimOverrides {
    /// `base` with every populated override applied.
    pub fn apply(&self, base: SimSettings) -> SimSettings {
        SimSettings {
            dt: self.dt.unwrap_or(base.dt),
            method: self.method.unwrap_or(base.method),
            capture_radius: self.capture_radius.unwrap_or(base.capture_radius),
            max_time: self.max_time.unwrap_or(base.max_time),
            los_rate_tolerance: self.los_rate_tolerance.unwrap_or(base.los_rate_tolerance),
            manifold_tolerance: self.manifold_tolerance.unwrap_or(base.manifold_tolerance),
        }
    }
}

/// A scenario as written in a scenario file, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub evader: AgentConfig,
    pub pursuer: PursuerConfig,
    pub defender: AgentConfig,
    pub mode: GuidanceMode,
    pub defensive_direct_form: DefensiveDirectForm,
    pub gains: LawGains,
    pub observer: ObserverConfig,
    pub sim: SimOverrides,
}

impl ScenarioConfig {
    /// Simulation settings: library defaults with this scenario's overrides.
    pub fn sim_settings(&self) -> SimSettings {
        self.sim.apply(SimSettings::default())
    }

    /// Validates every precondition checkable at launch and converts to SI.
    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        let evader = match self.evader.placement {
            Placement::Cartesian { x, y } => agent_state(x, y, &self.evader, "evader")?,
            Placement::Polar { .. } => {
                return Err(invalid(
                    "evader placement",
                    "the evader is the reference agent and must be placed by x/y",
                ))
            }
        };
        let pursuer = place(&self.pursuer.agent, &evader, false, "pursuer")?;
        let defender = place(&self.defender, &evader, true, "defender")?;
        for (name, limit) in [
            ("evader", self.evader.a_max),
            ("pursuer", self.pursuer.agent.a_max),
            ("defender", self.defender.a_max),
        ] {
            let a = limit.mps2();
            if !(a > 0.0 && a.is_finite()) {
                return Err(invalid(
                    "positive acceleration limit",
                    format!("{name} a_max must be positive"),
                ));
            }
        }

        let settings = self.sim_settings();
        settings
            .validate()
            .map_err(|e| invalid("simulation settings", e.to_string()))?;

        match self.mode.cooperation {
            Cooperation::Indirect { impact_time } if !(impact_time > 0.0 && impact_time.is_finite()) => {
                return Err(invalid("timing", "impact_time must be positive"));
            }
            Cooperation::Direct { margin } if !(margin >= 0.0 && margin.is_finite()) => {
                return Err(invalid("timing", "margin must be non-negative"));
            }
            _ => {}
        }

        match self.pursuer.strategy {
            PursuerKind::ProNav { gain } | PursuerKind::ProNavPlusScripted { gain, .. }
                if !(gain > 0.0 && gain.is_finite()) =>
            {
                return Err(invalid("navigation gain", "nav_gain must be positive"));
            }
            _ => {}
        }

        for (name, gains) in [
            ("sigma1", &self.gains.sigma1),
            ("sigma2", &self.gains.sigma2),
            ("sigma3", &self.gains.sigma3),
            ("sigma4", &self.gains.sigma4),
            ("sigma5", &self.gains.sigma5),
        ] {
            gains
                .validate()
                .map_err(|e| invalid("gain exponents", format!("{name}: {e}")))?;
        }
        self.observer
            .settings
            .gains
            .validate()
            .map_err(|e| invalid("observer gains", e.to_string()))?;

        let radius = settings.capture_radius;
        let check_separation = |a: &AgentState, b: &AgentState, what: &str| {
            if a.distance_to(b) > radius {
                Ok(())
            } else {
                Err(invalid(
                    "initial separation",
                    format!("{what} must start farther apart than the capture radius"),
                ))
            }
        };
        check_separation(&evader, &pursuer, "evader and pursuer")?;

        let ep = pair_geometry(&evader, &pursuer)
            .map_err(|e| invalid("initial separation", e.to_string()))?;
        check_lead_angle("evader", ep.delta_first)?;
        if let Cooperation::Direct { .. } = self.mode.cooperation {
            if !(ep.v_r < 0.0) {
                return Err(invalid(
                    "closing geometry",
                    format!(
                        "direct cooperation needs a closing evader-pursuer pair (v_r = {:.3} m/s)",
                        ep.v_r
                    ),
                ));
            }
        }

        match self.mode.stance {
            Stance::Aggressive => {
                if !(defender.v > pursuer.v) {
                    return Err(invalid(
                        "speed ordering",
                        format!(
                            "aggressive stance needs defender speed ({}) > pursuer speed ({})",
                            defender.v, pursuer.v
                        ),
                    ));
                }
                check_separation(&defender, &pursuer, "defender and pursuer")?;
                let dp = pair_geometry(&defender, &pursuer)
                    .map_err(|e| invalid("initial separation", e.to_string()))?;
                check_lead_angle("defender", dp.delta_first)?;
            }
            Stance::Defensive => {
                if !(defender.v > evader.v) {
                    return Err(invalid(
                        "speed ordering",
                        format!(
                            "defensive stance needs defender speed ({}) > evader speed ({})",
                            defender.v, evader.v
                        ),
                    ));
                }
                check_separation(&defender, &evader, "defender and evader")?;
                let de = pair_geometry(&defender, &evader)
                    .map_err(|e| invalid("initial separation", e.to_string()))?;
                check_lead_angle("defender", de.delta_first)?;
            }
        }

        Ok(Scenario {
            name: self.name.clone(),
            evader,
            pursuer,
            defender,
            evader_a_max: self.evader.a_max.mps2(),
            defender_a_max: self.defender.a_max.mps2(),
            pursuer_strategy: PursuerStrategy {
                kind: self.pursuer.strategy,
                a_max: self.pursuer.agent.a_max.mps2(),
            },
            mode: self.mode,
            gains: self.gains,
            estimate_source: self.observer.source,
            observer: self.observer.settings,
            defensive_direct_form: self.defensive_direct_form,
        })
    }
}

fn check_lead_angle(agent: &str, delta: f64) -> Result<(), ConfigError> {
    if delta.abs() < LEAD_ANGLE_LIMIT {
        Ok(())
    } else {
        Err(invalid(
            "lead angle",
            format!(
                "{agent} lead angle {:.2} deg must be inside ±89.9 deg at launch",
                delta.to_degrees()
            ),
        ))
    }
}

fn agent_state(x: f64, y: f64, cfg: &AgentConfig, name: &str) -> Result<AgentState, ConfigError> {
    if !(cfg.speed > 0.0 && cfg.speed.is_finite()) {
        return Err(invalid("positive speed", format!("{name} speed must be positive")));
    }
    if !(x.is_finite() && y.is_finite() && cfg.heading_deg.is_finite()) {
        return Err(invalid("finite values", format!("{name} position/heading must be finite")));
    }
    Ok(AgentState::new(x, y, cfg.heading_deg.to_radians(), cfg.speed))
}

/// Places an agent relative to the evader. For the defender the LOS points
/// from the defender to the evader, for the pursuer from the evader to the
/// pursuer.
fn place(
    cfg: &AgentConfig,
    evader: &AgentState,
    looks_at_evader: bool,
    name: &str,
) -> Result<AgentState, ConfigError> {
    match cfg.placement {
        Placement::Cartesian { x, y } => agent_state(x, y, cfg, name),
        Placement::Polar { range, los_deg } => {
            if !(range > 0.0 && range.is_finite() && los_deg.is_finite()) {
                return Err(invalid(
                    "placement",
                    format!("{name} range must be positive and finite"),
                ));
            }
            let lam = los_deg.to_radians();
            let dir = if looks_at_evader { -1.0 } else { 1.0 };
            agent_state(
                evader.x + dir * range * lam.cos(),
                evader.y + dir * range * lam.sin(),
                cfg,
                name,
            )
        }
    }
}

/// Serde model of the document.
mod doc {
    use super::*;

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Document {
        pub name: Option<String>,
        pub evader: Option<Agent>,
        pub pursuer: Option<Pursuer>,
        pub defender: Option<Agent>,
        pub mode: Option<Mode>,
        pub gains: Option<Gains>,
        pub observer: Option<Observer>,
        pub sim: Option<Sim>,
    }

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Agent {
        pub x: Option<f64>,
        pub y: Option<f64>,
        pub range: Option<f64>,
        pub los_deg: Option<f64>,
        pub heading_deg: Option<f64>,
        pub speed: Option<f64>,
        pub a_max_g: Option<f64>,
        pub a_max_mps2: Option<f64>,
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "snake_case")]
    pub enum Strategy {
        ProNav,
        Scripted,
        ProNavPlusScripted,
    }

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Pursuer {
        pub x: Option<f64>,
        pub y: Option<f64>,
        pub range: Option<f64>,
        pub los_deg: Option<f64>,
        pub heading_deg: Option<f64>,
        pub speed: Option<f64>,
        pub a_max_g: Option<f64>,
        pub a_max_mps2: Option<f64>,
        pub strategy: Option<Strategy>,
        pub nav_gain: Option<f64>,
        pub script: Option<Script>,
    }

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Script {
        pub bias: Option<f64>,
        pub ramp: Option<f64>,
        pub amplitude: Option<f64>,
        pub omega_over_pi: Option<f64>,
    }

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Mode {
        pub stance: Option<Stance>,
        pub cooperation: Option<CooperationKind>,
        pub impact_time: Option<f64>,
        pub margin: Option<f64>,
        pub defensive_direct_form: Option<DefensiveDirectForm>,
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
    #[serde(rename_all = "snake_case")]
    pub enum CooperationKind {
        Indirect,
        Direct,
    }

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Gains {
        pub sigma1: Option<Smc>,
        pub sigma2: Option<Smc>,
        pub sigma3: Option<Smc>,
        pub sigma4: Option<Smc>,
        pub sigma5: Option<Smc>,
    }

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Smc {
        pub zeta: Option<f64>,
        pub xi: Option<f64>,
        pub alpha: Option<f64>,
        pub beta: Option<f64>,
        pub kappa: Option<f64>,
        pub epsilon: Option<f64>,
        pub boundary_layer: Option<f64>,
    }

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Observer {
        pub source: Option<EstimateSource>,
        pub form: Option<ObserverForm>,
        pub z1_linear_gain: Option<Z1LinearGain>,
        pub g0: Option<f64>,
        pub g1: Option<f64>,
        pub g2: Option<f64>,
        pub h0: Option<f64>,
        pub h1: Option<f64>,
        pub h2: Option<f64>,
        pub lipschitz: Option<f64>,
    }

    #[derive(Debug, Default, Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Sim {
        pub dt: Option<f64>,
        pub method: Option<Method>,
        pub capture_radius: Option<f64>,
        pub max_time: Option<f64>,
        pub los_rate_tolerance: Option<f64>,
        pub manifold_tolerance: Option<f64>,
    }
}

/// Collects the names of missing required keys while building the config.
struct Required {
    missing: Vec<String>,
}

impl Required {
    fn take<T>(&mut self, value: Option<T>, key: &str) -> Option<T> {
        if value.is_none() {
            self.missing.push(key.to_string());
        }
        value
    }
}

fn agent_from_doc(
    section: &str,
    placement: (Option<f64>, Option<f64>, Option<f64>, Option<f64>),
    heading_deg: Option<f64>,
    speed: Option<f64>,
    a_max: (Option<f64>, Option<f64>),
    req: &mut Required,
) -> Result<Option<AgentConfig>, ConfigError> {
    let placement = match placement {
        (Some(x), Some(y), None, None) => Some(Placement::Cartesian { x, y }),
        (None, None, Some(range), Some(los_deg)) => Some(Placement::Polar { range, los_deg }),
        (None, None, None, None) => {
            req.missing.push(format!("{section}.x/y or {section}.range/los_deg"));
            None
        }
        _ => {
            return Err(invalid(
                "placement",
                format!("{section} needs exactly one of (x, y) or (range, los_deg)"),
            ))
        }
    };
    let a_max = match a_max {
        (Some(g), None) => Some(AccelLimit::G(g)),
        (None, Some(a)) => Some(AccelLimit::Mps2(a)),
        (None, None) => {
            req.missing.push(format!("{section}.a_max_g or {section}.a_max_mps2"));
            None
        }
        _ => {
            return Err(invalid(
                "acceleration limit",
                format!("{section} needs exactly one of a_max_g or a_max_mps2"),
            ))
        }
    };
    let heading_deg = req.take(heading_deg, &format!("{section}.heading_deg"));
    let speed = req.take(speed, &format!("{section}.speed"));
    Ok(match (placement, heading_deg, speed, a_max) {
        (Some(placement), Some(heading_deg), Some(speed), Some(a_max)) => Some(AgentConfig {
            placement,
            heading_deg,
            speed,
            a_max,
        }),
        _ => None,
    })
}

fn smc_from_doc(doc: Option<doc::Smc>, default: SmcGains) -> SmcGains {
    let d = doc.unwrap_or_default();
    SmcGains {
        zeta: d.zeta.unwrap_or(default.zeta),
        xi: d.xi.unwrap_or(default.xi),
        alpha: d.alpha.unwrap_or(default.alpha),
        beta: d.beta.unwrap_or(default.beta),
        kappa: d.kappa.unwrap_or(default.kappa),
        epsilon: d.epsilon.unwrap_or(default.epsilon),
        boundary_layer: d.boundary_layer.unwrap_or(default.boundary_layer),
    }
}

fn smc_to_doc(g: &SmcGains) -> doc::Smc {
    doc::Smc {
        zeta: Some(g.zeta),
        xi: Some(g.xi),
        alpha: Some(g.alpha),
        beta: Some(g.beta),
        kappa: Some(g.kappa),
        epsilon: Some(g.epsilon),
        boundary_layer: Some(g.boundary_layer),
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

/// Parses and validates a scenario document, filling defaults.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let document: doc::Document = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let config = from_document(document)?;
    config.resolve()?;
    Ok(config)
}

fn from_document(d: doc::Document) -> Result<ScenarioConfig, ConfigError> {
    let mut req = Required { missing: Vec::new() };
    let name = req.take(d.name, "name");

    let evader = match req.take(d.evader, "evader") {
        Some(a) => agent_from_doc(
            "evader",
            (a.x, a.y, a.range, a.los_deg),
            a.heading_deg,
            a.speed,
            (a.a_max_g, a.a_max_mps2),
            &mut req,
        )?,
        None => None,
    };
    let defender = match req.take(d.defender, "defender") {
        Some(a) => agent_from_doc(
            "defender",
            (a.x, a.y, a.range, a.los_deg),
            a.heading_deg,
            a.speed,
            (a.a_max_g, a.a_max_mps2),
            &mut req,
        )?,
        None => None,
    };
    let pursuer = match req.take(d.pursuer, "pursuer") {
        Some(p) => {
            let agent = agent_from_doc(
                "pursuer",
                (p.x, p.y, p.range, p.los_deg),
                p.heading_deg,
                p.speed,
                (p.a_max_g, p.a_max_mps2),
                &mut req,
            )?;
            let gain = p.nav_gain.unwrap_or(5.0);
            let profile = p.script.map(|s| ScriptedProfile {
                bias: s.bias.unwrap_or(0.0),
                ramp: s.ramp.unwrap_or(0.0),
                amplitude: s.amplitude.unwrap_or(0.0),
                omega_over_pi: s.omega_over_pi.unwrap_or(0.0),
            });
            let strategy = match (req.take(p.strategy, "pursuer.strategy"), profile) {
                (Some(doc::Strategy::ProNav), None) => Some(PursuerKind::ProNav { gain }),
                (Some(doc::Strategy::ProNav), Some(_)) => {
                    return Err(invalid(
                        "pursuer strategy",
                        "pursuer.script given but strategy is pro_nav",
                    ))
                }
                (Some(doc::Strategy::Scripted), Some(profile)) => {
                    Some(PursuerKind::Scripted { profile })
                }
                (Some(doc::Strategy::ProNavPlusScripted), Some(profile)) => {
                    Some(PursuerKind::ProNavPlusScripted { gain, profile })
                }
                (Some(_), None) => {
                    req.missing.push("pursuer.script".into());
                    None
                }
                (None, _) => None,
            };
            match (agent, strategy) {
                (Some(agent), Some(strategy)) => Some(PursuerConfig { agent, strategy }),
                _ => None,
            }
        }
        None => None,
    };

    let mut defensive_direct_form = DefensiveDirectForm::default();
    let mode = match req.take(d.mode, "mode") {
        Some(m) => {
            defensive_direct_form = m.defensive_direct_form.unwrap_or_default();
            let stance = req.take(m.stance, "mode.stance");
            let cooperation = match req.take(m.cooperation, "mode.cooperation") {
                Some(doc::CooperationKind::Indirect) => {
                    if m.margin.is_some() {
                        return Err(invalid("timing", "indirect cooperation takes impact_time, not margin"));
                    }
                    req.take(m.impact_time, "mode.impact_time")
                        .map(|impact_time| Cooperation::Indirect { impact_time })
                }
                Some(doc::CooperationKind::Direct) => {
                    if m.impact_time.is_some() {
                        return Err(invalid("timing", "direct cooperation takes margin, not impact_time"));
                    }
                    req.take(m.margin, "mode.margin")
                        .map(|margin| Cooperation::Direct { margin })
                }
                None => None,
            };
            match (stance, cooperation) {
                (Some(stance), Some(cooperation)) => Some(GuidanceMode { stance, cooperation }),
                _ => None,
            }
        }
        None => None,
    };

    if !req.missing.is_empty() {
        return Err(ConfigError::MissingKeys(req.missing));
    }
    let (Some(name), Some(evader), Some(pursuer), Some(defender), Some(mode)) =
        (name, evader, pursuer, defender, mode)
    else {
        unreachable!("missing keys are reported above");
    };

    let g = d.gains.unwrap_or_default();
    let defaults = LawGains::default();
    let gains = LawGains {
        sigma1: smc_from_doc(g.sigma1, defaults.sigma1),
        sigma2: smc_from_doc(g.sigma2, defaults.sigma2),
        sigma3: smc_from_doc(g.sigma3, defaults.sigma3),
        sigma4: smc_from_doc(g.sigma4, defaults.sigma4),
        sigma5: smc_from_doc(g.sigma5, defaults.sigma5),
    };

    let o = d.observer.unwrap_or_default();
    let og = ObserverGains::default();
    let observer = ObserverConfig {
        source: o.source.unwrap_or_default(),
        settings: ObserverSettings {
            gains: ObserverGains {
                g0: o.g0.unwrap_or(og.g0),
                g1: o.g1.unwrap_or(og.g1),
                g2: o.g2.unwrap_or(og.g2),
                h0: o.h0.unwrap_or(og.h0),
                h1: o.h1.unwrap_or(og.h1),
                h2: o.h2.unwrap_or(og.h2),
                lipschitz: o.lipschitz.unwrap_or(og.lipschitz),
            },
            form: o.form.unwrap_or_default(),
            z1_linear_gain: o.z1_linear_gain.unwrap_or_default(),
        },
    };

    let s = d.sim.unwrap_or_default();
    let sim = SimOverrides {
        dt: s.dt,
        method: s.method,
        capture_radius: s.capture_radius,
        max_time: s.max_time,
        los_rate_tolerance: s.los_rate_tolerance,
        manifold_tolerance: s.manifold_tolerance,
    };

    Ok(ScenarioConfig {
        name,
        evader,
        pursuer,
        defender,
        mode,
        defensive_direct_form,
        gains,
        observer,
        sim,
    })
}

fn agent_fields(a: &AgentConfig) -> doc::Agent {
    let (x, y, range, los_deg) = match a.placement {
        Placement::Cartesian { x, y } => (Some(x), Some(y), None, None),
        Placement::Polar { range, los_deg } => (None, None, Some(range), Some(los_deg)),
    };
    let (a_max_g, a_max_mps2) = match a.a_max {
        AccelLimit::G(g) => (Some(g), None),
        AccelLimit::Mps2(m) => (None, Some(m)),
    };
    doc::Agent {
        x,
        y,
        range,
        los_deg,
        heading_deg: Some(a.heading_deg),
        speed: Some(a.speed),
        a_max_g,
        a_max_mps2,
    }
}

/// Renders a configuration as a scenario document that parses back to the
/// identical configuration.
pub fn render_scenario(config: &ScenarioConfig) -> String {
    let a = agent_fields(&config.pursuer.agent);
    let (strategy, nav_gain, script) = match config.pursuer.strategy {
        PursuerKind::ProNav { gain } => (doc::Strategy::ProNav, Some(gain), None),
        PursuerKind::Scripted { profile } => (doc::Strategy::Scripted, None, Some(profile)),
        PursuerKind::ProNavPlusScripted { gain, profile } => {
            (doc::Strategy::ProNavPlusScripted, Some(gain), Some(profile))
        }
    };
    let pursuer = doc::Pursuer {
        x: a.x,
        y: a.y,
        range: a.range,
        los_deg: a.los_deg,
        heading_deg: a.heading_deg,
        speed: a.speed,
        a_max_g: a.a_max_g,
        a_max_mps2: a.a_max_mps2,
        strategy: Some(strategy),
        nav_gain,
        script: script.map(|p| doc::Script {
            bias: Some(p.bias),
            ramp: Some(p.ramp),
            amplitude: Some(p.amplitude),
            omega_over_pi: Some(p.omega_over_pi),
        }),
    };
    let (cooperation, impact_time, margin) = match config.mode.cooperation {
        Cooperation::Indirect { impact_time } => {
            (doc::CooperationKind::Indirect, Some(impact_time), None)
        }
        Cooperation::Direct { margin } => (doc::CooperationKind::Direct, None, Some(margin)),
    };
    let o = &config.observer.settings;
    let s = &config.sim;
    let document = doc::Document {
        name: Some(config.name.clone()),
        evader: Some(agent_fields(&config.evader)),
        pursuer: Some(pursuer),
        defender: Some(agent_fields(&config.defender)),
        mode: Some(doc::Mode {
            stance: Some(config.mode.stance),
            cooperation: Some(cooperation),
            impact_time,
            margin,
            defensive_direct_form: Some(config.defensive_direct_form),
        }),
        gains: Some(doc::Gains {
            sigma1: Some(smc_to_doc(&config.gains.sigma1)),
            sigma2: Some(smc_to_doc(&config.gains.sigma2)),
            sigma3: Some(smc_to_doc(&config.gains.sigma3)),
            sigma4: Some(smc_to_doc(&config.gains.sigma4)),
            sigma5: Some(smc_to_doc(&config.gains.sigma5)),
        }),
        observer: Some(doc::Observer {
            source: Some(config.observer.source),
            form: Some(o.form),
            z1_linear_gain: Some(o.z1_linear_gain),
            g0: Some(o.gains.g0),
            g1: Some(o.gains.g1),
            g2: Some(o.gains.g2),
            h0: Some(o.gains.h0),
            h1: Some(o.gains.h1),
            h2: Some(o.gains.h2),
            lipschitz: Some(o.gains.lipschitz),
        }),
        sim: Some(doc::Sim {
            dt: s.dt,
            method: s.method,
            capture_radius: s.capture_radius,
            max_time: s.max_time,
            los_rate_tolerance: s.los_rate_tolerance,
            manifold_tolerance: s.manifold_tolerance,
        }),
    };
    toml::to_string(&document).expect("scenario documents always serialize")
}

// ---------------------------------------------------------------------------
// Built-in presets
// ---------------------------------------------------------------------------

/// Names of all built-in presets.
pub fn preset_names() -> &'static [&'static str] {
    &[
        "fig3", "fig4", "fig5", "fig6_t20", "fig6_t40", "fig6_dc3", "fig7", "fig8", "fig9_ic",
        "fig9_dc2",
    ]
}

/// Fig. 5 pursuer maneuver `10 + 100·sin(πt)`.
const WEAVE: ScriptedProfile = ScriptedProfile {
    bias: 10.0,
    ramp: 0.0,
    amplitude: 100.0,
    omega_over_pi: 1.0,
};

/// Fig. 9 pursuer maneuver `30 + 1.5t − 10·sin(0.75πt)`.
const DRIFTING_WEAVE: ScriptedProfile = ScriptedProfile {
    bias: 30.0,
    ramp: 1.5,
    amplitude: -10.0,
    omega_over_pi: 0.75,
};

/// Evader at the origin with the defender co-located on the same heading;
/// pursuer 10 km out along `lambda_deg`. Speeds 100/300/400 m/s, evader
/// limited to 5 g, defender and pursuer to 40 g; â_P from the observer.
fn aggressive(
    name: &str,
    lambda_deg: f64,
    evader_heading: f64,
    pursuer_heading: f64,
    cooperation: Cooperation,
    strategy: PursuerKind,
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        evader: AgentConfig {
            placement: Placement::Cartesian { x: 0.0, y: 0.0 },
            heading_deg: evader_heading,
            speed: 100.0,
            a_max: AccelLimit::G(5.0),
        },
        pursuer: PursuerConfig {
            agent: AgentConfig {
                placement: Placement::Polar {
                    range: 10_000.0,
                    los_deg: lambda_deg,
                },
                heading_deg: pursuer_heading,
                speed: 300.0,
                a_max: AccelLimit::G(40.0),
            },
            strategy,
        },
        defender: AgentConfig {
            placement: Placement::Cartesian { x: 0.0, y: 0.0 },
            heading_deg: evader_heading,
            speed: 400.0,
            a_max: AccelLimit::G(40.0),
        },
        mode: GuidanceMode {
            stance: Stance::Aggressive,
            cooperation,
        },
        defensive_direct_form: DefensiveDirectForm::default(),
        gains: LawGains::default(),
        observer: ObserverConfig {
            source: EstimateSource::Observer,
            settings: ObserverSettings::default(),
        },
        sim: SimOverrides::default(),
    }
}

/// Evader at the origin; pursuer 10 km out along `lambda_ep`, defender
/// 10 km away with its LOS to the evader along `lambda_de`. Speeds
/// 300/300/400 m/s, all limited to 20 g; â_P known exactly.
#[allow(clippy::too_many_arguments)]
fn defensive(
    name: &str,
    lambda_ep: f64,
    lambda_de: f64,
    evader_heading: f64,
    pursuer_heading: f64,
    defender_heading: f64,
    cooperation: Cooperation,
    strategy: PursuerKind,
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        evader: AgentConfig {
            placement: Placement::Cartesian { x: 0.0, y: 0.0 },
            heading_deg: evader_heading,
            speed: 300.0,
            a_max: AccelLimit::G(20.0),
        },
        pursuer: PursuerConfig {
            agent: AgentConfig {
                placement: Placement::Polar {
                    range: 10_000.0,
                    los_deg: lambda_ep,
                },
                heading_deg: pursuer_heading,
                speed: 300.0,
                a_max: AccelLimit::G(20.0),
            },
            strategy,
        },
        defender: AgentConfig {
            placement: Placement::Polar {
                range: 10_000.0,
                los_deg: lambda_de,
            },
            heading_deg: defender_heading,
            speed: 400.0,
            a_max: AccelLimit::G(20.0),
        },
        mode: GuidanceMode {
            stance: Stance::Defensive,
            cooperation,
        },
        defensive_direct_form: DefensiveDirectForm::default(),
        gains: LawGains::default(),
        observer: ObserverConfig {
            source: EstimateSource::Truth,
            settings: ObserverSettings::default(),
        },
        sim: SimOverrides::default(),
    }
}

/// Looks up a built-in preset by name.
pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    const PN: PursuerKind = PursuerKind::ProNav { gain: 5.0 };
    let indirect = |impact_time| Cooperation::Indirect { impact_time };
    let direct = |margin| Cooperation::Direct { margin };
    let weave_pn = |profile| PursuerKind::ProNavPlusScripted { gain: 5.0, profile };
    let config = match name {
        "fig3" => aggressive(name, 0.0, 45.0, 135.0, indirect(27.0), PN),
        "fig4" => aggressive(name, -30.0, 0.0, 120.0, direct(5.0), PN),
        "fig5" => aggressive(name, 0.0, 60.0, 120.0, direct(3.0), weave_pn(WEAVE)),
        "fig6_t20" => aggressive(name, 30.0, 45.0, 135.0, indirect(20.0), PN),
        "fig6_t40" => aggressive(name, 30.0, 45.0, 135.0, indirect(40.0), PN),
        "fig6_dc3" => aggressive(name, 30.0, 45.0, 135.0, direct(3.0), PN),
        "fig7" => defensive(name, 0.0, -170.0, 60.0, 100.0, 170.0, indirect(40.0), PN),
        "fig8" => defensive(name, 45.0, -30.0, 100.0, 150.0, -50.0, direct(5.0), PN),
        "fig9_ic" => defensive(
            name,
            0.0,
            -170.0,
            60.0,
            100.0,
            170.0,
            indirect(40.0),
            weave_pn(DRIFTING_WEAVE),
        ),
        "fig9_dc2" => defensive(
            name,
            0.0,
            -170.0,
            60.0,
            100.0,
            170.0,
            direct(2.0),
            weave_pn(DRIFTING_WEAVE),
        ),
        other => return Err(ConfigError::UnknownPreset(other.to_string())),
    };
    Ok(config)
}
