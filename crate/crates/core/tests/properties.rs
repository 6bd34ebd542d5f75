//! Property-based invariants of the kinematics, guidance laws and scenario
//! round-trip.

use std::f64::consts::PI;

use escort_core::guidance::{
    defender_aggressive_direct, defender_aggressive_indirect, defender_defensive_indirect,
    evader_command, fixed_time_bound, pursuer_command, saturate,
};
use escort_core::kinematics::{
    los_accel, pair_geometry, tgo_collision, tgo_collision_rate, tgo_deviated_pursuit,
    tgo_dp_rate, wrap_angle,
};
use escort_core::{
    parse_scenario, preset, render_scenario, AgentState, PursuerKind, PursuerStrategy,
    ScriptedProfile, SmcGains,
};
use proptest::prelude::*;

fn agent(v: f64) -> impl Strategy<Value = AgentState> {
    (-2e4..2e4f64, -2e4..2e4f64, -PI..PI).prop_map(move |(x, y, g)| AgentState::new(x, y, g, v))
}

/// An agent pair 1–20 km apart with the first agent's lead below `max_lead`.
fn pair_with_lead(v1: f64, v2: f64, max_lead: f64) -> impl Strategy<Value = (AgentState, AgentState)> {
    (1e3..2e4f64, -PI..PI, -max_lead..max_lead, -PI..PI).prop_map(move |(r, lam, lead, g2)| {
        (
            AgentState::new(0.0, 0.0, lam + lead, v1),
            AgentState::new(r * lam.cos(), r * lam.sin(), g2, v2),
        )
    })
}

fn unbounded(gains: SmcGains) -> SmcGains {
    SmcGains { boundary_layer: 0.0, ..gains }
}

proptest! {
    #[test]
    fn wrap_angle_is_in_range_and_congruent(a in -1e3..1e3f64) {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI);
        let k = (a - w) / (2.0 * PI);
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn saturation_respects_the_cap(raw in -1e4..1e4f64, cap in 0.0..1e3f64) {
        let s = saturate(raw, cap);
        prop_assert!(s.abs() <= cap);
        prop_assert_eq!(saturate(s, cap), s);
        if raw.abs() <= cap {
            prop_assert_eq!(s, raw);
        }
    }

    #[test]
    fn pair_geometry_is_symmetric(a in agent(300.0), b in agent(400.0)) {
        prop_assume!(a.distance_to(&b) > 1.0);
        let ab = pair_geometry(&a, &b).unwrap();
        let ba = pair_geometry(&b, &a).unwrap();
        prop_assert!((ab.r - ba.r).abs() < 1e-9);
        prop_assert!((ab.v_r - ba.v_r).abs() < 1e-9);
        prop_assert!((ab.lambda_dot - ba.lambda_dot).abs() < 1e-12);
        prop_assert!(wrap_angle(ab.lambda - ba.lambda - PI).abs() < 1e-9);
    }

    #[test]
    fn relative_speed_is_conserved(a in agent(300.0), b in agent(400.0)) {
        prop_assume!(a.distance_to(&b) > 1.0);
        let p = pair_geometry(&a, &b).unwrap();
        let (va, vb) = (a.velocity(), b.velocity());
        let rel2 = (vb.0 - va.0).powi(2) + (vb.1 - va.1).powi(2);
        prop_assert!((p.v_r * p.v_r + p.v_lambda * p.v_lambda - rel2).abs() < 1e-6 * rel2.max(1.0));
    }

    #[test]
    fn los_accel_is_affine_in_the_accelerations(
        (a, b) in pair_with_lead(100.0, 300.0, PI),
        a1 in -100.0..100.0f64,
        a2 in -400.0..400.0f64,
    ) {
        let p = pair_geometry(&a, &b).unwrap();
        let base = los_accel(&p, 0.0, 0.0);
        let sum = los_accel(&p, a1, 0.0) + los_accel(&p, 0.0, a2) - base;
        prop_assert!((los_accel(&p, a1, a2) - sum).abs() < 1e-12);
    }

    #[test]
    fn closing_pairs_have_positive_collision_tgo((a, b) in pair_with_lead(100.0, 300.0, PI)) {
        let p = pair_geometry(&a, &b).unwrap();
        match tgo_collision(&p, 1e-6) {
            Ok(t) => prop_assert!(p.v_r < 0.0 && t.value > 0.0),
            Err(_) => prop_assert!(p.v_r >= 0.0),
        }
    }

    #[test]
    fn deviated_pursuit_tgo_is_positive_and_bounded(
        (d, t) in pair_with_lead(400.0, 300.0, 1.5),
    ) {
        // Bounded below by pure closing at full relative speed, r/(v_o + v_t).
        let p = pair_geometry(&d, &t).unwrap();
        let tgo = tgo_deviated_pursuit(&p, 400.0, 300.0, true).unwrap().value;
        prop_assert!(tgo > 0.0);
        prop_assert!(tgo >= p.r / 700.0 * (1.0 - 1e-12));
    }

    #[test]
    fn evader_law_drives_los_rate_at_the_reaching_rate(
        (e, p) in pair_with_lead(100.0, 300.0, 1.4),
        a_p in -300.0..300.0f64,
    ) {
        // With the true pursuer acceleration and no saturation the closed
        // loop is λ̈ = −(F(σ) + ε/cos δ)·sign σ.
        let gains = unbounded(SmcGains::EVADER);
        let pair = pair_geometry(&e, &p).unwrap();
        let cmd = evader_command(&pair, a_p, &gains, f64::INFINITY);
        let sigma = pair.lambda_dot;
        let expected = -(gains.reaching(sigma) + gains.epsilon / pair.delta_first.cos()) * sigma.signum();
        let got = los_accel(&pair, cmd.applied, a_p);
        prop_assert!((got - expected).abs() < 1e-9 * (1.0 + expected.abs()), "{} vs {}", got, expected);
        if sigma != 0.0 {
            prop_assert!(sigma * got < 0.0);
        }
    }

    #[test]
    fn aggressive_indirect_law_drives_its_manifold(
        (d, p) in pair_with_lead(400.0, 300.0, 1.4),
        a_p in -300.0..300.0f64,
        impact in 10.0..80.0f64,
    ) {
        let gains = unbounded(SmcGains::AGGRESSIVE_INDIRECT);
        let pair = pair_geometry(&d, &p).unwrap();
        prop_assume!(pair.v_lambda.abs() > 1e-3);
        let cmd = defender_aggressive_indirect(&pair, a_p, impact, 0.0, 400.0, 300.0, &gains, f64::INFINITY).unwrap();
        // σ = t_go − (T − t) ⇒ σ̇ = ṫ_go + 1.
        let rate = tgo_dp_rate(&pair, 400.0, 300.0, cmd.applied, a_p).unwrap() + 1.0;
        let s = cmd.manifold;
        let expected = -(gains.reaching(s) + gains.epsilon / pair.delta_first.cos()) * s.signum();
        prop_assert!((rate - expected).abs() < 1e-7 * (1.0 + expected.abs()), "{} vs {}", rate, expected);
    }

    #[test]
    fn aggressive_direct_law_drives_its_manifold(
        (e, p) in pair_with_lead(100.0, 300.0, 0.6),
        lead in -1.3..1.3f64,
        r_dp in 1e3..1e4f64,
        a_e in -40.0..40.0f64,
        a_p in -300.0..300.0f64,
    ) {
        let pair_ep = pair_geometry(&e, &p).unwrap();
        prop_assume!(pair_ep.v_r < -10.0);
        // Place the defender `r_dp` from the pursuer with the given lead.
        let lam = pair_ep.lambda + 2.0;
        let d = AgentState::new(p.x - r_dp * lam.cos(), p.y - r_dp * lam.sin(), lam + lead, 400.0);
        let pair_dp = pair_geometry(&d, &p).unwrap();
        prop_assume!(pair_dp.v_lambda.abs() > 1e-3);
        let gains = unbounded(SmcGains::AGGRESSIVE_DIRECT);
        let cmd = defender_aggressive_direct(&pair_ep, &pair_dp, a_e, a_p, 5.0, 400.0, 300.0, &gains, f64::INFINITY).unwrap();
        // σ = t_go^DP − (t_go^EP − margin) ⇒ σ̇ = ṫ_go^DP − ṫ_go^EP.
        let rate = tgo_dp_rate(&pair_dp, 400.0, 300.0, cmd.applied, a_p).unwrap()
            - tgo_collision_rate(&pair_ep, a_e, a_p).unwrap();
        let s = cmd.manifold;
        let expected = -(gains.reaching(s) + gains.epsilon / pair_dp.delta_first.cos()) * s.signum();
        prop_assert!((rate - expected).abs() < 1e-7 * (1.0 + expected.abs()), "{} vs {}", rate, expected);
    }

    #[test]
    fn defensive_indirect_law_drives_its_manifold(
        (d, e) in pair_with_lead(400.0, 300.0, 1.4),
        impact in 10.0..80.0f64,
    ) {
        let gains = unbounded(SmcGains::DEFENSIVE_INDIRECT);
        let pair = pair_geometry(&d, &e).unwrap();
        prop_assume!(pair.v_lambda.abs() > 1e-3);
        let cmd = defender_defensive_indirect(&pair, impact, 0.0, 400.0, 300.0, &gains, f64::INFINITY).unwrap();
        let rate = tgo_dp_rate(&pair, 400.0, 300.0, cmd.applied, 0.0).unwrap() + 1.0;
        let s = cmd.manifold;
        let expected = -(gains.reaching(s) + gains.epsilon / pair.delta_first.cos()) * s.signum();
        prop_assert!((rate - expected).abs() < 1e-7 * (1.0 + expected.abs()), "{} vs {}", rate, expected);
    }

    #[test]
    fn every_command_respects_its_cap(
        (e, p) in pair_with_lead(100.0, 300.0, 1.5),
        a_p in -1e3..1e3f64,
        cap in 1.0..400.0f64,
    ) {
        let pair = pair_geometry(&e, &p).unwrap();
        let cmd = evader_command(&pair, a_p, &SmcGains::EVADER, cap);
        prop_assert!(cmd.applied.abs() <= cap);
        let strategy = PursuerStrategy { kind: PursuerKind::ProNav { gain: 5.0 }, a_max: cap };
        prop_assert!(pursuer_command(&pair, &strategy, 3.0).applied.abs() <= cap);
    }

    #[test]
    fn reaching_term_is_even_and_switching_is_odd(s in -10.0..10.0f64) {
        let g = SmcGains::AGGRESSIVE_INDIRECT;
        prop_assert_eq!(g.reaching(s), g.reaching(-s));
        prop_assert_eq!(g.switching(s), -g.switching(-s));
        prop_assert!(g.switching(s).abs() <= 1.0);
    }

    #[test]
    fn fixed_time_bound_shrinks_with_gain(
        zeta in 0.01..1.0f64,
        xi in 0.01..1.0f64,
        alpha in 0.1..0.9f64,
        beta in 1.1..3.0f64,
        scale in 1.01..10.0f64,
    ) {
        let g = SmcGains { zeta, xi, alpha, beta, kappa: 1.0, epsilon: 0.0, boundary_layer: 0.0 };
        let faster = SmcGains { zeta: zeta * scale, xi: xi * scale, ..g };
        prop_assert!(fixed_time_bound(&faster) < fixed_time_bound(&g));
        prop_assert!((fixed_time_bound(&faster) * scale - fixed_time_bound(&g)).abs() < 1e-9 * fixed_time_bound(&g));
    }

    #[test]
    fn scripted_profile_is_bias_ramp_and_sine(
        bias in -50.0..50.0f64,
        ramp in -5.0..5.0f64,
        amplitude in -100.0..100.0f64,
        w in 0.0..2.0f64,
        t in 0.0..100.0f64,
    ) {
        let p = ScriptedProfile { bias, ramp, amplitude, omega_over_pi: w };
        let expected = bias + ramp * t + amplitude * (PI * w * t).sin();
        prop_assert!((p.at(t) - expected).abs() < 1e-9);
    }

    #[test]
    fn scenario_files_round_trip(
        heading in -60.0..60.0f64,
        speed in 320.0..500.0f64,
        impact in 20.0..40.0f64,
    ) {
        let mut config = preset("fig3").unwrap();
        config.defender.heading_deg = heading;
        config.defender.speed = speed;
        config.mode.cooperation = escort_core::Cooperation::Indirect { impact_time: impact };
        let text = render_scenario(&config);
        let back = parse_scenario(&text).unwrap();
        prop_assert_eq!(back, config);
    }
}
