//! Fixed-step simulation of the three-agent engagement.
//!
//! Each step builds the pair geometries, evaluates the pursuer, evader and
//! defender laws once, holds those commands across the integrator stages
//! and advances the agents and the observer together. The run ends at the
//! first capture-radius crossing, at `max_time`, or when the state stops
//! being usable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::guidance::{
    defender_aggressive_direct, defender_aggressive_indirect, defender_defensive_direct,
    defender_defensive_indirect, evader_command, pursuer_command, Cooperation,
    DefensiveDirectForm, GuidanceCommand, GuidanceMode, PursuerStrategy, SmcGains, Stance,
};
use crate::kinematics::{
    deviated_pursuit_time, pair_geometry, state_derivative, tgo_collision, wrap_angle,
    AgentState, PairGeometry,
};
use crate::observer::{
    observer_derivative, pursuer_accel_estimate, ObserverSettings, ObserverState,
};
use crate::scenario::{ConfigError, ScenarioConfig};
use crate::guarded_cos;

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order Runge–Kutta.
    #[default]
    Rk4,
    /// Forward Euler.
    Euler,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Method::Rk4),
            "euler" => Ok(Method::Euler),
            other => Err(format!("unknown method '{other}' (expected rk4 or euler)")),
        }
    }
}

/// Integration and termination settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    /// Step, s.
    pub dt: f64,
    pub method: Method,
    /// Range at which two agents count as having met, m.
    pub capture_radius: f64,
    /// Run length limit, s.
    pub max_time: f64,
    /// LOS rate below which a pair counts as on a collision course, rad/s.
    pub los_rate_tolerance: f64,
    /// |σ| below which a manifold counts as converged (σ's own units).
    pub manifold_tolerance: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            method: Method::Rk4,
            capture_radius: 1.0,
            max_time: 150.0,
            los_rate_tolerance: 1e-6,
            manifold_tolerance: 0.01,
        }
    }
}

impl SimSettings {
    /// Checks `dt > 0`, `capture_radius > 0` and `max_time > dt`.
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = self.dt > 0.0
            && self.dt.is_finite()
            && self.capture_radius > 0.0
            && self.capture_radius.is_finite()
            && self.max_time > self.dt
            && self.max_time.is_finite()
            && self.los_rate_tolerance > 0.0
            && self.manifold_tolerance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidSettings(format!("{self:?}")))
        }
    }
}

/// Where the evader and defender get the pursuer's acceleration from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateSource {
    /// The disturbance observer's estimate.
    #[default]
    Observer,
    /// The pursuer's true applied acceleration.
    Truth,
}

/// Gains of the five sliding-mode laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawGains {
    /// Evader LOS-rate law.
    pub sigma1: SmcGains,
    /// Aggressive, indirect defender law.
    pub sigma2: SmcGains,
    /// Aggressive, direct defender law.
    pub sigma3: SmcGains,
    /// Defensive, indirect defender law.
    pub sigma4: SmcGains,
    /// Defensive, direct defender law.
    pub sigma5: SmcGains,
}

impl Default for LawGains {
    fn default() -> Self {
        Self {
            sigma1: SmcGains::EVADER,
            sigma2: SmcGains::AGGRESSIVE_INDIRECT,
            sigma3: SmcGains::AGGRESSIVE_DIRECT,
            sigma4: SmcGains::DEFENSIVE_INDIRECT,
            sigma5: SmcGains::DEFENSIVE_DIRECT,
        }
    }
}

impl LawGains {
    /// Gains of the defender law selected by `mode`.
    pub fn defender(&self, mode: &GuidanceMode) -> &SmcGains {
        match (mode.stance, mode.cooperation) {
            (Stance::Aggressive, Cooperation::Indirect { .. }) => &self.sigma2,
            (Stance::Aggressive, Cooperation::Direct { .. }) => &self.sigma3,
            (Stance::Defensive, Cooperation::Indirect { .. }) => &self.sigma4,
            (Stance::Defensive, Cooperation::Direct { .. }) => &self.sigma5,
        }
    }
}

/// A fully resolved scenario in SI units, ready to simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub evader: AgentState,
    pub pursuer: AgentState,
    pub defender: AgentState,
    /// m/s².
    pub evader_a_max: f64,
    /// m/s².
    pub defender_a_max: f64,
    pub pursuer_strategy: PursuerStrategy,
    pub mode: GuidanceMode,
    pub gains: LawGains,
    pub estimate_source: EstimateSource,
    pub observer: ObserverSettings,
    pub defensive_direct_form: DefensiveDirectForm,
}

/// Identifies an agent pair, first agent first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairId {
    EvaderPursuer,
    DefenderPursuer,
    DefenderEvader,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    DefenderInterceptedPursuer,
    DefenderRendezvousedEvader,
    PursuerCapturedEvader,
    Timeout,
    NumericalFailure,
}

impl Outcome {
    fn from_pair(pair: PairId) -> Self {
        match pair {
            PairId::EvaderPursuer => Outcome::PursuerCapturedEvader,
            PairId::DefenderPursuer => Outcome::DefenderInterceptedPursuer,
            PairId::DefenderEvader => Outcome::DefenderRendezvousedEvader,
        }
    }
}

/// Pair geometries at the end of the run (`None` where undefined).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FinalGeometries {
    pub ep: Option<PairGeometry>,
    pub dp: Option<PairGeometry>,
    pub de: Option<PairGeometry>,
}

/// One sample of the engagement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// s.
    pub t: f64,
    pub evader: AgentState,
    pub pursuer: AgentState,
    pub defender: AgentState,
    pub ep: PairGeometry,
    /// Undefined only while the defender sits exactly on the pursuer.
    pub dp: Option<PairGeometry>,
    /// Undefined while the defender sits exactly on the evader (launch).
    pub de: Option<PairGeometry>,
    pub a_e_raw: f64,
    pub a_e: f64,
    pub a_p_raw: f64,
    pub a_p: f64,
    pub a_d_raw: f64,
    pub a_d: f64,
    /// Pursuer acceleration used by the evader/defender laws, m/s².
    pub a_p_hat: f64,
    /// Evader manifold (LOS rate), rad/s.
    pub sigma_evader: f64,
    /// Active defender manifold, s.
    pub sigma_defender: f64,
    /// Evader–pursuer collision-course time-to-go, s (`None` when opening).
    pub tgo_ep: Option<f64>,
    /// Deviated-pursuit time-to-go of the defender's active pair, s.
    pub tgo_defender: Option<f64>,
}

/// Outcome of a run plus its full trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub scenario: Scenario,
    pub settings: SimSettings,
    pub outcome: Outcome,
    /// Interpolated event time; `max_time` on timeout; failure time on
    /// numerical failure. s.
    pub event_time: f64,
    /// Why the run was abandoned, for [`Outcome::NumericalFailure`].
    pub failure: Option<String>,
    pub final_geometries: FinalGeometries,
    /// Evader–pursuer range at the terminating event, or the minimum over
    /// the run when no capture event occurred, m.
    pub evader_miss_distance: f64,
    /// Minimum evader–pursuer range over the run (including the event), m.
    pub min_evader_range: f64,
    pub trace: Vec<TraceRecord>,
}

impl SimResult {
    /// True when the defender achieved its stance's objective.
    pub fn mission_success(&self) -> bool {
        matches!(
            (self.scenario.mode.stance, self.outcome),
            (Stance::Aggressive, Outcome::DefenderInterceptedPursuer)
                | (Stance::Defensive, Outcome::DefenderRendezvousedEvader)
        )
    }
}

/// Errors that prevent a run from starting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    ConfigInvalid(#[from] ConfigError),
    #[error("invalid simulation settings: {0}")]
    InvalidSettings(String),
}

/// Relative position (second minus first) of the three pairs, m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePositions {
    pub ep: (f64, f64),
    pub dp: (f64, f64),
    pub de: (f64, f64),
}

impl RelativePositions {
    /// Relative positions of the agents `[evader, pursuer, defender]`.
    pub fn of(agents: &[AgentState; 3]) -> Self {
        let [e, p, d] = agents;
        Self {
            ep: (p.x - e.x, p.y - e.y),
            dp: (p.x - d.x, p.y - d.y),
            de: (e.x - d.x, e.y - d.y),
        }
    }

    fn get(&self, pair: PairId) -> (f64, f64) {
        match pair {
            PairId::EvaderPursuer => self.ep,
            PairId::DefenderPursuer => self.dp,
            PairId::DefenderEvader => self.de,
        }
    }
}

/// Fraction of a step in `[0, 1]` at which the linearly interpolated relative
/// position first reaches `radius`, if it does.
fn crossing_fraction(prev: (f64, f64), curr: (f64, f64), radius: f64) -> Option<f64> {
    let r0 = prev.0.hypot(prev.1);
    let r1 = curr.0.hypot(curr.1);
    if r0 <= radius {
        return None;
    }
    if r1 <= radius {
        // Range crosses the radius within the step: interpolate the range.
        return Some((r0 - radius) / (r0 - r1));
    }
    // Both ends outside: the agents may still fly through each other within
    // the step. Solve |p0 + s·(p1 − p0)| = radius for the first root.
    let d = (curr.0 - prev.0, curr.1 - prev.1);
    let a = d.0 * d.0 + d.1 * d.1;
    if a == 0.0 {
        return None;
    }
    let b = 2.0 * (prev.0 * d.0 + prev.1 * d.1);
    let c = r0 * r0 - radius * radius;
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let s = (-b - disc.sqrt()) / (2.0 * a);
    (0.0..=1.0).contains(&s).then_some(s)
}

/// Detects the first capture-radius crossing during a step from `t_prev`.
///
/// The defender's pair is checked before the evader–pursuer pair, so the
/// defender wins a tie within one step. Returns the pair and the
/// interpolated crossing time.
pub fn detect_event(
    prev: &RelativePositions,
    curr: &RelativePositions,
    defender_pair: PairId,
    t_prev: f64,
    settings: &SimSettings,
) -> Option<(PairId, f64)> {
    [defender_pair, PairId::EvaderPursuer]
        .into_iter()
        .find_map(|pair| {
            crossing_fraction(prev.get(pair), curr.get(pair), settings.capture_radius)
                .map(|s| (pair, t_prev + s * settings.dt))
        })
}

/// Validates a scenario file model and runs it.
pub fn run_scenario(config: &ScenarioConfig, settings: &SimSettings) -> Result<SimResult, SimError> {
    let scenario = config.resolve()?;
    simulate(&scenario, settings)
}

/// Commands and diagnostics evaluated once per step.
struct StepEvaluation {
    record: TraceRecord,
}

/// Integrated state: three agents plus the observer's (z0, z1, z2).
#[derive(Debug, Clone, Copy)]
struct State {
    agents: [AgentState; 3],
    z: [f64; 3],
}

/// Time derivative of [`State`].
#[derive(Debug, Clone, Copy)]
struct Rate {
    agents: [[f64; 3]; 3],
    z: [f64; 3],
}

struct Simulator<'a> {
    scenario: &'a Scenario,
    settings: &'a SimSettings,
    observer_on: bool,
}

impl Simulator<'_> {
    fn defender_pair(&self) -> PairId {
        match self.scenario.mode.stance {
            Stance::Aggressive => PairId::DefenderPursuer,
            Stance::Defensive => PairId::DefenderEvader,
        }
    }

    fn observer_state(z: &[f64; 3]) -> ObserverState {
        ObserverState {
            z0: z[0],
            z1: z[1],
            z2: z[2],
            ..ObserverState::default()
        }
    }

    fn evaluate(&self, state: &State, t: f64) -> Result<StepEvaluation, String> {
        let sc = self.scenario;
        let [e, p, d] = state.agents;
        let ep = pair_geometry(&e, &p).map_err(|err| format!("evader-pursuer pair: {err}"))?;
        let dp = pair_geometry(&d, &p).ok();
        let de = pair_geometry(&d, &e).ok();

        let a_p = pursuer_command(&ep, &sc.pursuer_strategy, t);
        let a_p_hat = match (sc.estimate_source, self.observer_on) {
            (EstimateSource::Observer, true) => {
                pursuer_accel_estimate(&Self::observer_state(&state.z), &ep, sc.observer.form)
            }
            _ => a_p.applied,
        };
        let a_e = evader_command(&ep, a_p_hat, &sc.gains.sigma1, sc.evader_a_max);

        let gains = sc.gains.defender(&sc.mode);
        let missing = |name: &str| format!("defender coincides with the {name}");
        let (a_d, tgo_defender): (GuidanceCommand, f64) = match (sc.mode.stance, sc.mode.cooperation) {
            (Stance::Aggressive, cooperation) => {
                let dp = dp.ok_or_else(|| missing("pursuer"))?;
                let cmd = match cooperation {
                    Cooperation::Indirect { impact_time } => defender_aggressive_indirect(
                        &dp, a_p_hat, impact_time, t, d.v, p.v, gains, sc.defender_a_max,
                    ),
                    Cooperation::Direct { margin } => defender_aggressive_direct(
                        &ep, &dp, a_e.applied, a_p_hat, margin, d.v, p.v, gains, sc.defender_a_max,
                    ),
                }
                .map_err(|err| err.to_string())?;
                (cmd, deviated_pursuit_time(&dp, d.v, p.v, guarded_cos(dp.delta_first)))
            }
            (Stance::Defensive, cooperation) => {
                let de = de.ok_or_else(|| missing("evader"))?;
                let cmd = match cooperation {
                    Cooperation::Indirect { impact_time } => defender_defensive_indirect(
                        &de, impact_time, t, d.v, e.v, gains, sc.defender_a_max,
                    ),
                    Cooperation::Direct { margin } => defender_defensive_direct(
                        &ep,
                        &de,
                        a_e.applied,
                        a_p_hat,
                        margin,
                        d.v,
                        e.v,
                        gains,
                        sc.defender_a_max,
                        sc.defensive_direct_form,
                    ),
                }
                .map_err(|err| err.to_string())?;
                (cmd, deviated_pursuit_time(&de, d.v, e.v, guarded_cos(de.delta_first)))
            }
        };

        let record = TraceRecord {
            t,
            evader: e,
            pursuer: p,
            defender: d,
            ep,
            dp,
            de,
            a_e_raw: a_e.raw,
            a_e: a_e.applied,
            a_p_raw: a_p.raw,
            a_p: a_p.applied,
            a_d_raw: a_d.raw,
            a_d: a_d.applied,
            a_p_hat,
            sigma_evader: a_e.manifold,
            sigma_defender: a_d.manifold,
            tgo_ep: tgo_collision(&ep, self.settings.los_rate_tolerance)
                .ok()
                .map(|t| t.value),
            tgo_defender: tgo_defender.is_finite().then_some(tgo_defender),
        };
        let finite = [
            record.a_e_raw,
            record.a_p_raw,
            record.a_d_raw,
            record.a_p_hat,
            record.sigma_evader,
            record.sigma_defender,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(format!("non-finite guidance output at t = {t}"));
        }
        Ok(StepEvaluation { record })
    }

    fn rate(&self, state: &State, accels: [f64; 3]) -> Result<Rate, String> {
        let mut agents = [[0.0; 3]; 3];
        for (slot, (agent, a)) in agents.iter_mut().zip(state.agents.iter().zip(accels)) {
            let d = state_derivative(agent, a);
            *slot = [d.x_dot, d.y_dot, d.gamma_dot];
        }
        let mut z = [0.0; 3];
        if self.observer_on {
            let ep = pair_geometry(&state.agents[0], &state.agents[1])
                .map_err(|err| format!("evader-pursuer pair: {err}"))?;
            let (dz, _) = observer_derivative(
                &Self::observer_state(&state.z),
                ep.lambda_dot,
                &ep,
                accels[0],
                &self.scenario.observer,
            )
            .map_err(|err| err.to_string())?;
            z = [dz.z0_dot, dz.z1_dot, dz.z2_dot];
        }
        Ok(Rate { agents, z })
    }

    fn advance(state: &State, rate: &Rate, h: f64) -> State {
        let mut next = *state;
        for (agent, r) in next.agents.iter_mut().zip(rate.agents.iter()) {
            agent.x += h * r[0];
            agent.y += h * r[1];
            agent.gamma += h * r[2];
        }
        for (z, dz) in next.z.iter_mut().zip(rate.z) {
            *z += h * dz;
        }
        next
    }

    fn step(&self, state: &State, accels: [f64; 3]) -> Result<State, String> {
        let dt = self.settings.dt;
        let mut next = match self.settings.method {
            Method::Euler => Self::advance(state, &self.rate(state, accels)?, dt),
            Method::Rk4 => {
                let k1 = self.rate(state, accels)?;
                let k2 = self.rate(&Self::advance(state, &k1, 0.5 * dt), accels)?;
                let k3 = self.rate(&Self::advance(state, &k2, 0.5 * dt), accels)?;
                let k4 = self.rate(&Self::advance(state, &k3, dt), accels)?;
                let mut next = *state;
                for i in 0..3 {
                    for j in 0..3 {
                        let incr = k1.agents[i][j]
                            + 2.0 * k2.agents[i][j]
                            + 2.0 * k3.agents[i][j]
                            + k4.agents[i][j];
                        match j {
                            0 => next.agents[i].x += dt / 6.0 * incr,
                            1 => next.agents[i].y += dt / 6.0 * incr,
                            _ => next.agents[i].gamma += dt / 6.0 * incr,
                        }
                    }
                    next.z[i] += dt / 6.0 * (k1.z[i] + 2.0 * k2.z[i] + 2.0 * k3.z[i] + k4.z[i]);
                }
                next
            }
        };
        for agent in next.agents.iter_mut() {
            agent.gamma = wrap_angle(agent.gamma);
        }
        let finite = next.agents.iter().all(AgentState::is_finite)
            && next.z.iter().all(|z| z.is_finite());
        if finite {
            Ok(next)
        } else {
            Err("state became non-finite".to_string())
        }
    }
}

fn final_geometries(agents: &[AgentState; 3]) -> FinalGeometries {
    let [e, p, d] = agents;
    FinalGeometries {
        ep: pair_geometry(e, p).ok(),
        dp: pair_geometry(d, p).ok(),
        de: pair_geometry(d, e).ok(),
    }
}

/// Runs a resolved scenario to termination.
pub fn simulate(scenario: &Scenario, settings: &SimSettings) -> Result<SimResult, SimError> {
    settings.validate()?;
    let sim = Simulator {
        scenario,
        settings,
        observer_on: scenario.estimate_source == EstimateSource::Observer,
    };
    let agents = [scenario.evader, scenario.pursuer, scenario.defender];
    let initial_ep = pair_geometry(&agents[0], &agents[1])
        .map_err(|err| SimError::InvalidSettings(format!("evader-pursuer pair: {err}")))?;
    let mut state = State {
        agents,
        z: [initial_ep.lambda_dot, 0.0, 0.0],
    };
    let n_steps = (settings.max_time / settings.dt * (1.0 + 1e-12)).floor() as u64;
    let mut trace = Vec::with_capacity(n_steps.min(1 << 20) as usize + 1);
    let mut min_evader_range = initial_ep.r;
    let defender_pair = sim.defender_pair();

    let finish = |outcome: Outcome,
                  event_time: f64,
                  failure: Option<String>,
                  agents: &[AgentState; 3],
                  miss: f64,
                  min_range: f64,
                  trace: Vec<TraceRecord>| SimResult {
        scenario: scenario.clone(),
        settings: *settings,
        outcome,
        event_time,
        failure,
        final_geometries: final_geometries(agents),
        evader_miss_distance: miss,
        min_evader_range: min_range,
        trace,
    };

    let mut k: u64 = 0;
    loop {
        let t = k as f64 * settings.dt;
        let eval = match sim.evaluate(&state, t) {
            Ok(eval) => eval,
            Err(reason) => {
                return Ok(finish(
                    Outcome::NumericalFailure,
                    t,
                    Some(reason),
                    &state.agents,
                    min_evader_range,
                    min_evader_range,
                    trace,
                ))
            }
        };
        let accels = [eval.record.a_e, eval.record.a_p, eval.record.a_d];
        trace.push(eval.record);
        if k >= n_steps {
            return Ok(finish(
                Outcome::Timeout,
                settings.max_time,
                None,
                &state.agents,
                min_evader_range,
                min_evader_range,
                trace,
            ));
        }
        let next = match sim.step(&state, accels) {
            Ok(next) => next,
            Err(reason) => {
                return Ok(finish(
                    Outcome::NumericalFailure,
                    t,
                    Some(reason),
                    &state.agents,
                    min_evader_range,
                    min_evader_range,
                    trace,
                ))
            }
        };
        let prev_rel = RelativePositions::of(&state.agents);
        let curr_rel = RelativePositions::of(&next.agents);
        if let Some((pair, event_time)) =
            detect_event(&prev_rel, &curr_rel, defender_pair, t, settings)
        {
            let s = (event_time - t) / settings.dt;
            let ep = (
                prev_rel.ep.0 + s * (curr_rel.ep.0 - prev_rel.ep.0),
                prev_rel.ep.1 + s * (curr_rel.ep.1 - prev_rel.ep.1),
            );
            let miss = ep.0.hypot(ep.1);
            return Ok(finish(
                Outcome::from_pair(pair),
                event_time,
                None,
                &next.agents,
                miss,
                min_evader_range.min(miss),
                trace,
            ));
        }
        min_evader_range = min_evader_range.min(curr_rel.ep.0.hypot(curr_rel.ep.1));
        state = next;
        k += 1;
    }
}
