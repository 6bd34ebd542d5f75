//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every tolerance is pinned here and never relaxed to make a line pass; a
//! failing criterion fails the test target. Values quoted from the
//! engagement narratives are compared against the built-in presets, and
//! the derived checks use the independent oracles in `common`.

mod common;

use std::thread;

use escort_core::analysis::{
    convergence_report, lyapunov_decrease, margin_report, observer_settling_time, Manifold,
    OBSERVER_SETTLED,
};
use escort_core::kinematics::{
    los_accel, pair_geometry, tgo_collision, tgo_collision_rate, tgo_deviated_pursuit, tgo_dp_rate,
};
use escort_core::{
    preset, preset_names, simulate, EstimateSource, Outcome, PursuerKind,
    ScenarioConfig, ScriptedProfile, SimResult, SimSettings, Stance, STANDARD_GRAVITY,
};

use common::*;
use rand::Rng;

/// Margin adherence tolerance, s.
const MARGIN_TOL: f64 = 0.1;

struct Line {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn line(id: &'static str, pass: bool, detail: String) -> Line {
    Line { id, pass, detail }
}

fn run(config: &ScenarioConfig, settings: &SimSettings) -> SimResult {
    let scenario = config.resolve().expect("acceptance scenarios are valid");
    simulate(&scenario, settings).expect("settings are valid")
}

/// Runs `jobs` on worker threads, preserving order.
fn run_parallel(jobs: Vec<(ScenarioConfig, SimSettings)>) -> Vec<SimResult> {
    let workers = thread::available_parallelism().map_or(4, usize::from).min(jobs.len()).max(1);
    let chunks: Vec<Vec<(usize, ScenarioConfig, SimSettings)>> = {
        let mut chunks = vec![Vec::new(); workers];
        for (i, (c, s)) in jobs.into_iter().enumerate() {
            chunks[i % workers].push((i, c, s));
        }
        chunks
    };
    let mut out: Vec<(usize, SimResult)> = thread::scope(|scope| {
        let handles: Vec<_> = chunks
            .iter()
            .map(|chunk| {
                scope.spawn(move || {
                    chunk
                        .iter()
                        .map(|(i, c, s)| (*i, run(c, s)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    out.sort_by_key(|(i, _)| *i);
    out.into_iter().map(|(_, r)| r).collect()
}

fn outcome_str(r: &SimResult) -> String {
    format!("{:?} at {:.3} s", r.outcome, r.event_time)
}

fn find<'a>(results: &'a [SimResult], name: &str) -> &'a SimResult {
    results
        .iter()
        .find(|r| r.scenario.name == name)
        .expect("preset was run")
}

// 1 ------------------------------------------------------------------------

fn criterion_1() -> Line {
    let tgo = |name: &str| {
        let s = preset(name).unwrap().resolve().unwrap();
        let pair = pair_geometry(&s.evader, &s.pursuer).unwrap();
        tgo_collision(&pair, 1e-6).unwrap().value
    };
    let fig6 = tgo("fig6_t20");
    let fig3 = tgo("fig3");
    // fig3 oracle: closing speed 300·cos45° + 100·cos45° = 282.84 m/s.
    let fig3_oracle = 10_000.0 / (400.0 * std::f64::consts::FRAC_1_SQRT_2);
    let pass = (fig6 - 57.39).abs() <= 0.01
        && (fig3 - 35.36).abs() <= 0.01
        && (fig3 - fig3_oracle).abs() <= 1e-9;
    line(
        "1 analytic tgo",
        pass,
        format!("fig6 tgo_EP = {fig6:.4} s (57.39 ± 0.01); fig3 tgo_EP = {fig3:.4} s (35.36 ± 0.01, oracle {fig3_oracle:.4})"),
    )
}

// 2 ------------------------------------------------------------------------

fn criterion_2(observer: &SimResult, truth: &SimResult) -> Line {
    let ok = |r: &SimResult| {
        r.outcome == Outcome::DefenderInterceptedPursuer
            && (r.event_time - 27.0).abs() <= 0.2
            && r.evader_miss_distance > 0.0
    };
    line(
        "2 fig3 impact time",
        ok(observer) && ok(truth),
        format!(
            "observer: {}, r_EP {:.1} m; perfect a_P: {}, r_EP {:.1} m (27.0 ± 0.2 s)",
            outcome_str(observer),
            observer.evader_miss_distance,
            outcome_str(truth),
            truth.evader_miss_distance
        ),
    )
}

// 3 ------------------------------------------------------------------------

fn margin_line(r: &SimResult, margin: f64) -> (bool, String) {
    let report = margin_report(&r.trace, margin, r.settings.manifold_tolerance, MARGIN_TOL);
    let detail = match (report.window_start, report.max_deviation) {
        (Some(start), Some(max)) => {
            format!("window from {start:.3} s, max |Δtgo − {margin}| = {max:.4} s")
        }
        _ => {
            // Diagnostic only: the first entry into the tolerance band and the
            // deviation after it, including any terminal excursion.
            let first = r
                .trace
                .iter()
                .find(|x| x.sigma_defender.abs() < r.settings.manifold_tolerance)
                .map(|x| x.t);
            let after = first.map(|t0| {
                r.trace
                    .iter()
                    .filter(|x| x.t >= t0 + 1.0)
                    .filter_map(|x| Some(((x.tgo_ep? - x.tgo_defender?) - margin).abs()))
                    .fold(0.0, f64::max)
            });
            let last_out = r
                .trace
                .iter()
                .rev()
                .find(|x| x.sigma_defender.abs() >= r.settings.manifold_tolerance)
                .map(|x| x.t);
            format!(
                "manifold never stays inside ±{} s (first entry {:?} s, last exit {:?} s, max deviation after first entry + 1 s {:?} s)",
                r.settings.manifold_tolerance,
                first.map(|t| (t * 1e3).round() / 1e3),
                last_out.map(|t| (t * 1e3).round() / 1e3),
                after.map(|v| (v * 1e4).round() / 1e4)
            )
        }
    };
    (report.pass == Some(true), detail)
}

fn criterion_3(fig4: &SimResult) -> Line {
    let (margin_ok, detail) = margin_line(fig4, 5.0);
    line(
        "3 fig4 margin",
        margin_ok && fig4.outcome == Outcome::DefenderInterceptedPursuer,
        format!("{}; {detail} (< {MARGIN_TOL} s)", outcome_str(fig4)),
    )
}

// 4 ------------------------------------------------------------------------

fn criterion_4(fig5: &SimResult) -> Line {
    let quoted = 1911.6;
    let miss = fig5.evader_miss_distance;
    line(
        "4 fig5 miss distance",
        fig5.outcome == Outcome::DefenderInterceptedPursuer && (miss - quoted).abs() <= 0.15 * quoted,
        format!("{}; evader miss distance {miss:.1} m (1911.6 m ± 15%)", outcome_str(fig5)),
    )
}

// 5 ------------------------------------------------------------------------

fn criterion_5(t20: &SimResult, t40: &SimResult, dc3: &SimResult) -> Line {
    let a = t20.mission_success();
    let b = t40.outcome == Outcome::PursuerCapturedEvader && (t40.event_time - 30.0).abs() <= 1.0;
    let c = dc3.outcome == Outcome::DefenderInterceptedPursuer && (dc3.event_time - 27.0).abs() <= 0.5;
    line(
        "5 fig6 triple",
        a && b && c,
        format!(
            "T_f=20: {} [{}]; T_f=40: {} [{}] (capture at 30 ± 1 s); margin 3 s: {} [{}] (intercept at 27 ± 0.5 s)",
            outcome_str(t20),
            if a { "ok" } else { "x" },
            outcome_str(t40),
            if b { "ok" } else { "x" },
            outcome_str(dc3),
            if c { "ok" } else { "x" },
        ),
    )
}

// 6 ------------------------------------------------------------------------

fn criterion_6(fig7: &SimResult, fig8: &SimResult, ic: &SimResult, dc2: &SimResult) -> Line {
    let a = fig7.outcome == Outcome::DefenderRendezvousedEvader && (fig7.event_time - 40.0).abs() <= 0.2;
    let (margin_ok, margin_detail) = margin_line(fig8, 5.0);
    let b = fig8.outcome == Outcome::DefenderRendezvousedEvader && margin_ok;
    let c = ic.outcome == Outcome::PursuerCapturedEvader;
    let d = dc2.outcome == Outcome::DefenderRendezvousedEvader;
    let mark = |ok: bool| if ok { "ok" } else { "x" };
    let mut dc2_detail = outcome_str(dc2);
    if let Some(reason) = &dc2.failure {
        dc2_detail.push_str(&format!(" ({reason})"));
    }
    line(
        "6 defensive stance",
        a && b && c && d,
        format!(
            "fig7: {} [{}] (40.0 ± 0.2 s); fig8: {}, {margin_detail} [{}]; fig9 indirect: {} [{}]; fig9 margin 2 s: {dc2_detail} [{}]",
            outcome_str(fig7),
            mark(a),
            outcome_str(fig8),
            mark(b),
            outcome_str(ic),
            mark(c),
            mark(d),
        ),
    )
}

// 7 ------------------------------------------------------------------------

fn criterion_7(results: &[SimResult]) -> Vec<Line> {
    let mut lines = Vec::new();

    // (a) Lyapunov decrease, pooled over every preset and both manifolds.
    let (mut eligible, mut decreasing) = (0usize, 0usize);
    let mut worst: Option<(String, f64)> = None;
    for r in results {
        let tol = r.settings.manifold_tolerance;
        for m in [Manifold::Evader, Manifold::Defender] {
            let rep = lyapunov_decrease(&r.trace, m, tol, OBSERVER_SETTLED);
            eligible += rep.eligible;
            decreasing += rep.decreasing;
            if let Some(f) = rep.fraction {
                if worst.as_ref().is_none_or(|(_, w)| f < *w) {
                    worst = Some((format!("{}/{m:?}", r.scenario.name), f));
                }
            }
        }
    }
    let fraction = decreasing as f64 / eligible.max(1) as f64;
    lines.push(line(
        "7a Lyapunov decrease",
        eligible > 0 && fraction >= 0.99,
        format!(
            "{decreasing}/{eligible} eligible steps decrease |σ| ({:.2}%, need ≥ 99%); worst {}",
            100.0 * fraction,
            worst.map_or("n/a".into(), |(n, f)| format!("{n} {:.2}%", 100.0 * f))
        ),
    ));

    // (b) Convergence before the fixed-time bound.
    let mut misses = Vec::new();
    let mut evader_tight = Vec::new();
    for r in results {
        let s = &r.scenario;
        let tol = r.settings.manifold_tolerance;
        for (m, gains) in [
            (Manifold::Evader, &s.gains.sigma1),
            (Manifold::Defender, s.gains.defender(&s.mode)),
        ] {
            let rep = convergence_report(&r.trace, m, gains, tol);
            if !rep.within_bound {
                misses.push(format!("{}/{m:?} (bound {:.2} s)", s.name, rep.bound));
            }
        }
        // Informational: the 0.01 rad/s band is wider than the initial LOS
        // rates, so also report a band two orders tighter.
        let tight = convergence_report(&r.trace, Manifold::Evader, &s.gains.sigma1, 1e-4);
        evader_tight.push(format!(
            "{}={}",
            s.name,
            tight.time.map_or("never".into(), |t| format!("{t:.2}"))
        ));
    }
    lines.push(line(
        "7b fixed-time convergence",
        misses.is_empty(),
        format!(
            "not converged within bound: [{}]; info: evader σ below 1e-4 rad/s from [{}] s",
            misses.join(", "),
            evader_tight.join(", ")
        ),
    ));

    // (c) Acceleration caps, and the caps themselves as specified.
    let mut cap_errors = Vec::new();
    for r in results {
        let s = &r.scenario;
        let g = STANDARD_GRAVITY;
        let expected = match s.mode.stance {
            Stance::Aggressive => (5.0 * g, 40.0 * g, 40.0 * g),
            Stance::Defensive => (20.0 * g, 20.0 * g, 20.0 * g),
        };
        if (s.evader_a_max, s.pursuer_strategy.a_max, s.defender_a_max) != expected {
            cap_errors.push(format!("{}: caps differ from specification", s.name));
        }
        let over = r.trace.iter().filter(|x| {
            x.a_e.abs() > s.evader_a_max
                || x.a_p.abs() > s.pursuer_strategy.a_max
                || x.a_d.abs() > s.defender_a_max
        });
        let n = over.count();
        if n > 0 {
            cap_errors.push(format!("{}: {n} samples over cap", s.name));
        }
    }
    let samples: usize = results.iter().map(|r| r.trace.len()).sum();
    lines.push(line(
        "7c acceleration caps",
        cap_errors.is_empty(),
        format!("{samples} samples checked; violations: [{}]", cap_errors.join(", ")),
    ));

    // (d) Constant speeds.
    let mut worst_speed = 0.0f64;
    for r in results {
        let first = &r.trace[0];
        for x in &r.trace {
            for (a, a0) in [
                (&x.evader, &first.evader),
                (&x.pursuer, &first.pursuer),
                (&x.defender, &first.defender),
            ] {
                worst_speed = worst_speed.max((a.v - a0.v).abs() / a0.v);
            }
        }
    }
    lines.push(line(
        "7d constant speeds",
        worst_speed <= 1e-9,
        format!("max relative speed change {worst_speed:.3e} (≤ 1e-9)"),
    ));
    lines
}

// 8 ------------------------------------------------------------------------

fn criterion_8(results: &[SimResult], halved: &[SimResult]) -> Vec<Line> {
    let mut lines = Vec::new();
    let h = 1e-5;
    let mut g = rng(8);

    // λ̈ and collision-course ṫ_go.
    let (mut worst_los, mut worst_tgo, mut worst_dp) = (0.0f64, 0.0f64, 0.0f64);
    let mut n = 0;
    while n < 100 {
        let (e, p) = random_pair(&mut g, 100.0, 300.0, 1.4);
        let pair = pair_geometry(&e, &p).unwrap();
        if pair.v_r > -20.0 {
            continue; // collision-course tgo needs a clearly closing pair
        }
        let a_e = g.random_range(-50.0..50.0);
        let a_p = g.random_range(-400.0..400.0);
        let fd_los = central_difference(&e, &p, a_e, a_p, h, |a, b| raw_rates(a, b).1);
        worst_los = worst_los.max(relative_error(los_accel(&pair, a_e, a_p), fd_los));
        let fd_tgo = central_difference(&e, &p, a_e, a_p, h, |a, b| {
            let (rdot, _) = raw_rates(a, b);
            -range(a, b) / rdot
        });
        worst_tgo = worst_tgo.max(relative_error(tgo_collision_rate(&pair, a_e, a_p).unwrap(), fd_tgo));
        n += 1;
    }
    // Deviated-pursuit ṫ_go for the defender against either target speed.
    let mut n = 0;
    while n < 100 {
        let v_t = if n % 2 == 0 { 300.0 } else { 100.0 };
        let (d, t) = random_pair(&mut g, 400.0, v_t, 1.4);
        let pair = pair_geometry(&d, &t).unwrap();
        let a_d = g.random_range(-400.0..400.0);
        let a_t = g.random_range(-200.0..200.0);
        let fd = central_difference(&d, &t, a_d, a_t, h, dp_time_raw);
        let cf = tgo_dp_rate(&pair, 400.0, v_t, a_d, a_t).unwrap();
        worst_dp = worst_dp.max(relative_error(cf, fd));
        n += 1;
    }
    lines.push(line(
        "8a closed forms vs finite differences",
        worst_los < 1e-3 && worst_tgo < 1e-3 && worst_dp < 1e-3,
        format!(
            "100 states each, h = 1e-5 s: max rel. error λ̈ {worst_los:.2e}, collision ṫ_go {worst_tgo:.2e}, deviated-pursuit ṫ_go {worst_dp:.2e} (< 1e-3)"
        ),
    ));

    // Deviated-pursuit tgo vs simulated capture.
    let mut worst = 0.0f64;
    let mut k = 0;
    while k < 12 {
        let v_t = if k % 2 == 0 { 300.0 } else { 100.0 };
        let (d, t) = random_pair(&mut g, 400.0, v_t, 1.2);
        let pair = pair_geometry(&d, &t).unwrap();
        let predicted = tgo_deviated_pursuit(&pair, 400.0, v_t, true).unwrap().value;
        let simulated = simulate_deviated_pursuit((d.x, d.y, d.v), &t, pair.delta_first);
        worst = worst.max(relative_error(predicted, simulated));
        k += 1;
    }
    lines.push(line(
        "8b deviated-pursuit tgo vs simulation",
        worst < 5e-3,
        format!("12 random engagements: max relative error {worst:.2e} (< 5e-3)"),
    ));

    // Halving dt.
    let mut worst = (String::new(), 0.0f64);
    let mut details = Vec::new();
    for (a, b) in results.iter().zip(halved) {
        let rel = relative_error(a.event_time, b.event_time);
        let same = a.outcome == b.outcome;
        if rel > worst.1 || !same {
            worst = (a.scenario.name.clone(), if same { rel } else { f64::INFINITY });
        }
        if rel >= 1e-3 || !same {
            details.push(format!(
                "{}: {:?} {:.4} s → {:?} {:.4} s",
                a.scenario.name, a.outcome, a.event_time, b.outcome, b.event_time
            ));
        }
    }
    lines.push(line(
        "8c step-size robustness",
        details.is_empty(),
        format!(
            "worst {} {:.3e} (< 1e-3); over tolerance: [{}]",
            worst.0,
            worst.1,
            details.join("; ")
        ),
    ));
    lines
}

// 9 ------------------------------------------------------------------------

/// Observer runs: the fig3 geometry with four pursuer behaviours.
fn observer_jobs() -> Vec<(&'static str, ScenarioConfig, SimSettings)> {
    let base = preset("fig3").unwrap();
    let with = |kind: PursuerKind| {
        let mut c = base.clone();
        c.pursuer.strategy = kind;
        c.observer.source = EstimateSource::Observer;
        c
    };
    let constant = ScriptedProfile {
        bias: 20.0,
        ramp: 0.0,
        amplitude: 0.0,
        omega_over_pi: 0.0,
    };
    let weave = ScriptedProfile {
        bias: 10.0,
        ramp: 0.0,
        amplitude: 100.0,
        omega_over_pi: 1.0,
    };
    let drifting = ScriptedProfile {
        bias: 30.0,
        ramp: 1.5,
        amplitude: -10.0,
        omega_over_pi: 0.75,
    };
    let settings = base.sim_settings();
    vec![
        ("constant 20 m/s²", with(PursuerKind::Scripted { profile: constant }), settings),
        ("pro-nav N=5", with(PursuerKind::ProNav { gain: 5.0 }), settings),
        ("10+100 sin(πt)", with(PursuerKind::Scripted { profile: weave }), settings),
        ("30+1.5t−10 sin(0.75πt)", with(PursuerKind::Scripted { profile: drifting }), settings),
    ]
}

/// Settling times (s) observed when the suite was first run. Later runs
/// must reproduce them within five 1 ms samples: debug and release builds
/// can differ by one sample.
/// Regression tolerance on the settling baselines, s.
const BASELINE_TOL: f64 = 5e-3;

const SETTLING_BASELINES: [Option<f64>; 4] = [Some(121.679), Some(0.778), None, Some(26.519)];

fn criterion_9(labels: &[&str], results: &[SimResult]) -> Line {
    let mut all_settled = true;
    let mut regressions = Vec::new();
    let mut parts = Vec::new();
    for ((label, r), baseline) in labels.iter().zip(results).zip(SETTLING_BASELINES) {
        let settled = observer_settling_time(&r.trace, OBSERVER_SETTLED);
        // Diagnostic for unsettled runs: the estimate error over the last second.
        let t_end = r.trace.last().map_or(0.0, |x| x.t);
        let late_error = r
            .trace
            .iter()
            .filter(|x| x.t >= t_end - 1.0)
            .map(|x| (x.a_p_hat - x.a_p).abs())
            .fold(0.0, f64::max);
        all_settled &= settled.is_some();
        let same = match (settled, baseline) {
            (Some(a), Some(b)) => (a - b).abs() <= BASELINE_TOL,
            (None, None) => true,
            _ => false,
        };
        if !same {
            regressions.push(format!("{label}: {settled:?} vs baseline {baseline:?}"));
        }
        parts.push(match settled {
            Some(t) => format!("{label}: {t:.3} s"),
            None => format!("{label}: never (max |â_P − a_P| over the last second {late_error:.2} m/s²)"),
        });
    }
    let mut detail = format!("settling below {OBSERVER_SETTLED} m/s²: {}", parts.join("; "));
    if !regressions.is_empty() {
        detail.push_str(&format!("; baseline regressions: [{}]", regressions.join(", ")));
    }
    line("9 observer settling", all_settled && regressions.is_empty(), detail)
}

fn main() {
    let names = preset_names();
    let configs: Vec<ScenarioConfig> = names.iter().map(|n| preset(n).unwrap()).collect();

    let mut jobs: Vec<(ScenarioConfig, SimSettings)> =
        configs.iter().map(|c| (c.clone(), c.sim_settings())).collect();
    // Halved step for the robustness check.
    jobs.extend(configs.iter().map(|c| {
        let mut s = c.sim_settings();
        s.dt /= 2.0;
        (c.clone(), s)
    }));
    // fig3 with the true pursuer acceleration.
    let mut fig3_truth = preset("fig3").unwrap();
    fig3_truth.observer.source = EstimateSource::Truth;
    jobs.push((fig3_truth.clone(), fig3_truth.sim_settings()));
    let observer = observer_jobs();
    let labels: Vec<&str> = observer.iter().map(|(l, _, _)| *l).collect();
    jobs.extend(observer.into_iter().map(|(_, c, s)| (c, s)));

    let all = run_parallel(jobs);
    let n = names.len();
    let base = &all[..n];
    let halved = &all[n..2 * n];
    let truth = &all[2 * n];
    let observer_runs = &all[2 * n + 1..];

    let mut lines = vec![
        criterion_1(),
        criterion_2(find(base, "fig3"), truth),
        criterion_3(find(base, "fig4")),
        criterion_4(find(base, "fig5")),
        criterion_5(find(base, "fig6_t20"), find(base, "fig6_t40"), find(base, "fig6_dc3")),
        criterion_6(
            find(base, "fig7"),
            find(base, "fig8"),
            find(base, "fig9_ic"),
            find(base, "fig9_dc2"),
        ),
    ];
    lines.extend(criterion_7(base));
    lines.extend(criterion_8(base, halved));
    lines.push(criterion_9(&labels, observer_runs));

    println!();
    for l in &lines {
        println!("[{}] {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.detail);
    }
    let failed = lines.iter().filter(|l| !l.pass).count();
    println!("\nacceptance: {} passed, {failed} failed", lines.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
