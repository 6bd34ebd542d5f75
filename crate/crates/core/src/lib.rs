//! Planar pursuer / evader / defender engagement simulator.
//!
//! An evader under attack by a pursuer launches a defender. The evader
//! nulls its line-of-sight rate to the pursuer with a fixed-time
//! sliding-mode law, helped by a finite-time disturbance observer that
//! estimates the pursuer's maneuver. The defender either intercepts the
//! pursuer (aggressive stance) or joins the evader (defensive stance), with
//! its arrival time fixed in advance (indirect cooperation) or tied to the
//! evader's own time-to-go by a margin (direct cooperation).
//!
//! Modules:
//! * [`kinematics`] – pair geometry, LOS accelerations, time-to-go formulas.
//! * [`observer`] – the pursuer-acceleration observer.
//! * [`guidance`] – evader, defender and pursuer laws.
//! * [`engine`] – the fixed-step simulation loop and event detection.
//! * [`scenario`] – scenario files, validation and built-in presets.
//! * [`io`] – CSV traces and JSON summaries.
//! * [`analysis`] – post-run metrics and SVG plots.

// Preconditions are written as `!(x < bound)` on purpose so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod guidance;
pub mod io;
pub mod kinematics;
pub mod observer;
pub mod scenario;

pub use engine::{
    detect_event, run_scenario, simulate, EstimateSource, FinalGeometries, LawGains, Method,
    Outcome, PairId, Scenario, SimError, SimResult, SimSettings, TraceRecord,
};
pub use guidance::{
    Cooperation, DefensiveDirectForm, GuidanceCommand, GuidanceMode, PursuerKind, PursuerStrategy,
    ScriptedProfile, SmcGains, Stance,
};
pub use kinematics::{AgentState, PairGeometry, StateDerivative, TimeEstimate};
pub use observer::{ObserverForm, ObserverGains, ObserverSettings, ObserverState, Z1LinearGain};
pub use scenario::{parse_scenario, preset, preset_names, render_scenario, ConfigError, ScenarioConfig};

/// Standard gravity used for every g ↔ m/s² conversion.
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Sign function with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Smallest |cos δ| used inside the guidance laws: cos 89.9°.
pub(crate) const COS_FLOOR: f64 = 1.745_328_365_898_309e-3;

/// Cosine of a lead angle with its magnitude floored at cos 89.9°,
/// keeping the sign so the laws stay continuous in δ up to the guard.
pub(crate) fn guarded_cos(delta: f64) -> f64 {
    let c = delta.cos();
    c.abs().max(COS_FLOOR).copysign(c)
}
