//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the closed forms under test: agent motion is
//! propagated analytically along circular arcs, pair quantities are
//! rebuilt from raw positions, and deviated pursuit is simulated directly.

#![allow(dead_code)]

use std::f64::consts::PI;

use escort_core::AgentState;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Exact position/heading of an agent turning at constant lateral
/// acceleration `a` (m/s²) for `t` seconds (negative `t` runs backwards).
pub fn propagate(s: &AgentState, a: f64, t: f64) -> AgentState {
    let w = a / s.v;
    if w.abs() < 1e-14 {
        return AgentState {
            x: s.x + s.v * s.gamma.cos() * t,
            y: s.y + s.v * s.gamma.sin() * t,
            ..*s
        };
    }
    let g1 = s.gamma + w * t;
    AgentState {
        x: s.x + s.v / w * (g1.sin() - s.gamma.sin()),
        y: s.y - s.v / w * (g1.cos() - s.gamma.cos()),
        gamma: g1,
        v: s.v,
    }
}

/// LOS angle from `a` to `b`, unwrapped near `reference`.
pub fn los_angle(a: &AgentState, b: &AgentState, reference: f64) -> f64 {
    let raw = (b.y - a.y).atan2(b.x - a.x);
    raw + ((reference - raw) / (2.0 * PI)).round() * 2.0 * PI
}

/// Range between two agents.
pub fn range(a: &AgentState, b: &AgentState) -> f64 {
    (b.x - a.x).hypot(b.y - a.y)
}

/// Range rate and LOS rate from raw velocities (no lead angles involved).
pub fn raw_rates(a: &AgentState, b: &AgentState) -> (f64, f64) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let (dvx, dvy) = (
        b.v * b.gamma.cos() - a.v * a.gamma.cos(),
        b.v * b.gamma.sin() - a.v * a.gamma.sin(),
    );
    let r = dx.hypot(dy);
    ((dx * dvx + dy * dvy) / r, (dx * dvy - dy * dvx) / (r * r))
}

/// Central difference of `f(t)` along the analytic motion of both agents.
pub fn central_difference(
    a: &AgentState,
    b: &AgentState,
    a_a: f64,
    a_b: f64,
    h: f64,
    f: impl Fn(&AgentState, &AgentState) -> f64,
) -> f64 {
    let plus = f(&propagate(a, a_a, h), &propagate(b, a_b, h));
    let minus = f(&propagate(a, a_a, -h), &propagate(b, a_b, -h));
    (plus - minus) / (2.0 * h)
}

/// Deviated-pursuit time-to-go from raw geometry:
/// `r·(v_o + v_t·cos(γ_t + γ_o − 2λ)) / (cos(γ_o − λ)·(v_o² − v_t²))`.
pub fn dp_time_raw(own: &AgentState, target: &AgentState) -> f64 {
    let lam = (target.y - own.y).atan2(target.x - own.x);
    let r = range(own, target);
    r * (own.v + target.v * (target.gamma + own.gamma - 2.0 * lam).cos())
        / ((own.gamma - lam).cos() * (own.v * own.v - target.v * target.v))
}

/// Simulates an agent that holds a fixed lead angle `lead` (rad) to the
/// LOS against a target in straight flight, returning the capture time.
///
/// Positions are integrated with RK4; the step shrinks with range so the
/// end-game is resolved, and the capture instant is taken where the range
/// reaches its minimum (≈ 0) within a metre.
pub fn simulate_deviated_pursuit(own: (f64, f64, f64), target: &AgentState, lead: f64) -> f64 {
    let v_o = own.2;
    let tvx = target.v * target.gamma.cos();
    let tvy = target.v * target.gamma.sin();
    let deriv = |t: f64, p: (f64, f64)| {
        let tx = target.x + tvx * t;
        let ty = target.y + tvy * t;
        let lam = (ty - p.1).atan2(tx - p.0);
        (v_o * (lam + lead).cos(), v_o * (lam + lead).sin())
    };
    let dist = |t: f64, p: (f64, f64)| (target.x + tvx * t - p.0).hypot(target.y + tvy * t - p.1);
    let mut t = 0.0;
    let mut p = (own.0, own.1);
    loop {
        let r = dist(t, p);
        if r < 1e-3 {
            return t;
        }
        let h = (r / (v_o + target.v) * 0.01).min(1e-3);
        let k1 = deriv(t, p);
        let k2 = deriv(t + h / 2.0, (p.0 + h / 2.0 * k1.0, p.1 + h / 2.0 * k1.1));
        let k3 = deriv(t + h / 2.0, (p.0 + h / 2.0 * k2.0, p.1 + h / 2.0 * k2.1));
        let k4 = deriv(t + h, (p.0 + h * k3.0, p.1 + h * k3.1));
        let next = (
            p.0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            p.1 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        // The range may grow early on (a fleeing target); only a growing
        // range inside a metre marks the closest approach.
        if r < 1.0 && dist(t + h, next) > r {
            return t;
        }
        p = next;
        t += h;
        assert!(t < 1e4, "deviated pursuit did not terminate");
    }
}

/// Deterministic generator for oracle sampling.
pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// A random agent pair: first at the origin, second 2–10 km away, with the
/// first agent's lead angle inside ±`max_lead` and given speeds.
pub fn random_pair(rng: &mut StdRng, v_first: f64, v_second: f64, max_lead: f64) -> (AgentState, AgentState) {
    let r = rng.random_range(2_000.0..10_000.0);
    let lam = rng.random_range(-PI..PI);
    let first = AgentState::new(0.0, 0.0, lam + rng.random_range(-max_lead..max_lead), v_first);
    let second = AgentState::new(
        r * lam.cos(),
        r * lam.sin(),
        rng.random_range(-PI..PI),
        v_second,
    );
    (first, second)
}

/// Relative error with a symmetric denominator.
pub fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
