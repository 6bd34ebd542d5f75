//! Post-run metrics and SVG figures.
//!
//! Metrics work on a trace (`&[TraceRecord]`) so they apply equally to a
//! fresh [`SimResult`] and to a trace read back from CSV. Figures are
//! hand-emitted SVG 1.1 with a fixed 800×600 viewBox and fixed number
//! formatting, so identical traces give byte-identical files.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{EstimateSource, SimResult, TraceRecord};
use crate::guarded_cos;
use crate::guidance::{fixed_time_bound, Cooperation, SmcGains, Stance};
use crate::kinematics::{deviated_pursuit_rate_terms, PairGeometry};

/// Which evader–pursuer range to report as the miss distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissAt {
    /// Range at the last sample (the terminating event).
    Event,
    /// Smallest range over the run.
    Minimum,
}

/// Evader–pursuer range, m. `None` for an empty trace.
pub fn miss_distance(trace: &[TraceRecord], at: MissAt) -> Option<f64> {
    match at {
        MissAt::Event => trace.last().map(|r| r.ep.r),
        MissAt::Minimum => trace.iter().map(|r| r.ep.r).reduce(f64::min),
    }
}

/// First time after which `|value|` stays below `tolerance` for the rest of
/// the series; `None` if the last sample is not below it.
pub fn convergence_time(series: &[(f64, f64)], tolerance: f64) -> Option<f64> {
    let mut first_inside = None;
    for &(t, v) in series {
        if v.abs() < tolerance {
            first_inside.get_or_insert(t);
        } else {
            first_inside = None;
        }
    }
    first_inside
}

/// A sliding manifold recorded in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Manifold {
    /// Evader–pursuer LOS rate, rad/s.
    Evader,
    /// The active defender manifold, s.
    Defender,
}

/// `(t, σ)` samples of one manifold.
pub fn sigma_series(trace: &[TraceRecord], manifold: Manifold) -> Vec<(f64, f64)> {
    trace
        .iter()
        .map(|r| {
            let s = match manifold {
                Manifold::Evader => r.sigma_evader,
                Manifold::Defender => r.sigma_defender,
            };
            (r.t, s)
        })
        .collect()
}

/// `(t, â_P − a_P)` samples, m/s².
pub fn estimate_error_series(trace: &[TraceRecord]) -> Vec<(f64, f64)> {
    trace.iter().map(|r| (r.t, r.a_p_hat - r.a_p)).collect()
}

/// Time after which the pursuer-acceleration estimate stays within
/// `tolerance` (m/s²) of the truth.
pub fn observer_settling_time(trace: &[TraceRecord], tolerance: f64) -> Option<f64> {
    convergence_time(&estimate_error_series(trace), tolerance)
}

/// Convergence of one manifold against its fixed-time bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub manifold: Manifold,
    /// Tolerance in the manifold's units.
    pub tolerance: f64,
    /// s; `None` if the manifold never settled.
    pub time: Option<f64>,
    /// Fixed-time bound of the manifold's gains, s.
    pub bound: f64,
    /// Converged strictly before the bound.
    pub within_bound: bool,
}

/// Convergence time of `manifold` against `fixed_time_bound(gains)`.
pub fn convergence_report(
    trace: &[TraceRecord],
    manifold: Manifold,
    gains: &SmcGains,
    tolerance: f64,
) -> ConvergenceReport {
    let time = convergence_time(&sigma_series(trace, manifold), tolerance);
    let bound = fixed_time_bound(gains);
    ConvergenceReport {
        manifold,
        tolerance,
        time,
        bound,
        within_bound: time.is_some_and(|t| t < bound),
    }
}

/// Adherence to the direct-cooperation time margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginReport {
    /// False when the post-convergence window is empty.
    pub applicable: bool,
    /// Start of the window (manifold convergence + 1 s), s.
    pub window_start: Option<f64>,
    /// Samples in the window.
    pub samples: usize,
    /// max |(tgo_EP − tgo_defender) − margin| over the window, s.
    pub max_deviation: Option<f64>,
    pub tolerance: f64,
    /// `None` when not applicable.
    pub pass: Option<bool>,
}

/// Margin adherence after the defender manifold has converged to within
/// `convergence_tolerance` (s) plus one second, judged at `tolerance` (s).
pub fn margin_report(
    trace: &[TraceRecord],
    margin: f64,
    convergence_tolerance: f64,
    tolerance: f64,
) -> MarginReport {
    let not_applicable = |window_start| MarginReport {
        applicable: false,
        window_start,
        samples: 0,
        max_deviation: None,
        tolerance,
        pass: None,
    };
    let Some(converged) =
        convergence_time(&sigma_series(trace, Manifold::Defender), convergence_tolerance)
    else {
        return not_applicable(None);
    };
    let start = converged + 1.0;
    let deviations: Vec<f64> = trace
        .iter()
        .filter(|r| r.t >= start)
        .filter_map(|r| Some(((r.tgo_ep? - r.tgo_defender?) - margin).abs()))
        .collect();
    if deviations.is_empty() {
        return not_applicable(Some(start));
    }
    let max = deviations.iter().copied().fold(0.0, f64::max);
    MarginReport {
        applicable: true,
        window_start: Some(start),
        samples: deviations.len(),
        max_deviation: Some(max),
        tolerance,
        pass: Some(max < tolerance),
    }
}

/// Sample-to-sample Lyapunov decrease statistics of one manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovReport {
    pub manifold: Manifold,
    /// Steps with |σ| above tolerance and the estimate settled.
    pub eligible: usize,
    /// Eligible steps along which |σ| decreased.
    pub decreasing: usize,
    /// `decreasing / eligible`; `None` without eligible steps.
    pub fraction: Option<f64>,
}

/// Counts steps `k → k+1` with `sign(σ_k)·(σ_{k+1} − σ_k) < 0` among those
/// where `|σ_k| > tolerance` and `|â_P − a_P| ≤ settled_error` (m/s²).
pub fn lyapunov_decrease(
    trace: &[TraceRecord],
    manifold: Manifold,
    tolerance: f64,
    settled_error: f64,
) -> LyapunovReport {
    let series = sigma_series(trace, manifold);
    let mut eligible = 0;
    let mut decreasing = 0;
    for (k, w) in series.windows(2).enumerate() {
        let (s0, s1) = (w[0].1, w[1].1);
        let rec = &trace[k];
        if s0.abs() > tolerance && (rec.a_p_hat - rec.a_p).abs() <= settled_error {
            eligible += 1;
            if crate::sign(s0) * (s1 - s0) < 0.0 {
                decreasing += 1;
            }
        }
    }
    LyapunovReport {
        manifold,
        eligible,
        decreasing,
        fraction: (eligible > 0).then(|| decreasing as f64 / eligible as f64),
    }
}

/// Realized robustness requirement of one switching gain.
///
/// Each law's closed loop reads `σ̇ = −(F(σ) + ε/c)·sign(σ) + k_P·(a_P − â_P)`
/// with `c` the guarded cosine of the agent's own lead angle and `k_P` the
/// pursuer-acceleration coefficient of `σ̇`. Sliding is guaranteed while
/// `ε > |c·k_P·(a_P − â_P)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonCheck {
    pub manifold: Manifold,
    /// Configured ε.
    pub epsilon: f64,
    /// sup over the whole run.
    pub sup_all: f64,
    /// sup after the estimate first settles within 1 m/s² and stays there;
    /// `None` if it never settles.
    pub sup_settled: Option<f64>,
    /// `epsilon > sup_settled`.
    pub satisfied: Option<bool>,
}

/// Estimation-error tolerance that defines a settled observer, m/s².
pub const OBSERVER_SETTLED: f64 = 1.0;

fn evader_requirement(r: &TraceRecord) -> f64 {
    let ep = &r.ep;
    (guarded_cos(ep.delta_first) * ep.delta_second.cos() / ep.r * (r.a_p_hat - r.a_p)).abs()
}

fn ep_pursuer_coupling(ep: &PairGeometry) -> f64 {
    ep.r * ep.delta_second.sin() / (ep.v_r * ep.v_r)
}

fn defender_requirement(r: &TraceRecord, result: &SimResult) -> Option<f64> {
    let s = &result.scenario;
    let v_d = s.defender.v;
    let (pair, v_target) = match s.mode.stance {
        Stance::Aggressive => (r.dp?, s.pursuer.v),
        Stance::Defensive => (r.de?, s.evader.v),
    };
    let c = guarded_cos(pair.delta_first);
    let target = deviated_pursuit_rate_terms(&pair, v_d, v_target, c).target;
    let k_p = match (s.mode.stance, s.mode.cooperation) {
        (Stance::Aggressive, Cooperation::Indirect { .. }) => target,
        (Stance::Aggressive, Cooperation::Direct { .. }) => target + ep_pursuer_coupling(&r.ep),
        (Stance::Defensive, Cooperation::Indirect { .. }) => 0.0,
        (Stance::Defensive, Cooperation::Direct { .. }) => ep_pursuer_coupling(&r.ep),
    };
    Some((c * k_p * (r.a_p_hat - r.a_p)).abs())
}

fn epsilon_check(
    trace: &[TraceRecord],
    manifold: Manifold,
    epsilon: f64,
    requirement: impl Fn(&TraceRecord) -> Option<f64>,
) -> EpsilonCheck {
    let sup = |records: &[TraceRecord]| {
        records
            .iter()
            .filter_map(&requirement)
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max)
    };
    let settled_at = observer_settling_time(trace, OBSERVER_SETTLED);
    let sup_settled = settled_at.map(|t0| {
        let start = trace.partition_point(|r| r.t < t0);
        sup(&trace[start..])
    });
    EpsilonCheck {
        manifold,
        epsilon,
        sup_all: sup(trace),
        sup_settled,
        satisfied: sup_settled.map(|s| epsilon > s),
    }
}

/// ε-sufficiency of the evader law and the active defender law.
pub fn epsilon_report(result: &SimResult) -> [EpsilonCheck; 2] {
    let s = &result.scenario;
    let trace = &result.trace;
    [
        epsilon_check(trace, Manifold::Evader, s.gains.sigma1.epsilon, |r| {
            Some(evader_requirement(r))
        }),
        epsilon_check(
            trace,
            Manifold::Defender,
            s.gains.defender(&s.mode).epsilon,
            |r| defender_requirement(r, result),
        ),
    ]
}

/// Whether â_P came from the observer.
pub fn uses_observer(result: &SimResult) -> bool {
    result.scenario.estimate_source == EstimateSource::Observer
}

// ---------------------------------------------------------------------------
// SVG figures
// ---------------------------------------------------------------------------

/// Figure kinds, mirroring the four panels of the engagement figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PlotKind {
    /// Trajectories in the plane.
    Traj,
    /// Sliding manifolds against time.
    Sigma,
    /// Applied lateral accelerations against time.
    Accel,
    /// Times-to-go against time.
    Tgo,
}

impl PlotKind {
    /// Lower-case name used in file names and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            PlotKind::Traj => "traj",
            PlotKind::Sigma => "sigma",
            PlotKind::Accel => "accel",
            PlotKind::Tgo => "tgo",
        }
    }
}

impl FromStr for PlotKind {
    type Err = PlotError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "traj" => Ok(PlotKind::Traj),
            "sigma" => Ok(PlotKind::Sigma),
            "accel" => Ok(PlotKind::Accel),
            "tgo" => Ok(PlotKind::Tgo),
            other => Err(PlotError::UnknownKind(other.to_string())),
        }
    }
}

/// Errors raised while emitting a figure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlotError {
    #[error("cannot plot an empty trace")]
    EmptyTrace,
    #[error("unknown plot kind '{0}' (expected traj, sigma, accel or tgo)")]
    UnknownKind(String),
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const EVADER_COLOR: &str = "#1f77b4";
const PURSUER_COLOR: &str = "#d62728";
const DEFENDER_COLOR: &str = "#2ca02c";
const ESTIMATE_COLOR: &str = "#ff7f0e";

struct Series {
    label: &'static str,
    color: &'static str,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

struct Panel {
    title: &'static str,
    x_label: &'static str,
    y_label: &'static str,
    series: Vec<Series>,
}

/// Data-to-pixel mapping of one panel.
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y_range.0) / (self.y_range.1 - self.y_range.0) * self.height
    }
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    let span = hi - lo;
    if span <= 1e-12 * lo.abs().max(1.0) {
        let half = lo.abs().max(1.0) * 0.5;
        return (lo - half, hi + half);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.2}")
    }
}

fn draw_frame(svg: &mut String, panel: &Panel, frame: &Frame) {
    let f = frame;
    let _ = writeln!(
        svg,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        f.left, f.top, f.width, f.height
    );
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let xv = f.x_range.0 + frac * (f.x_range.1 - f.x_range.0);
        let yv = f.y_range.0 + frac * (f.y_range.1 - f.y_range.0);
        let x = f.px(xv);
        let y = f.py(yv);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd" stroke-width="0.5"/>"##,
            f.top,
            f.top + f.height
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="0.5"/>"##,
            f.left,
            f.left + f.width
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#,
            f.top + f.height + 14.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{}</text>"#,
            f.left - 4.0,
            y + 3.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{}</text>"#,
        f.left + f.width / 2.0,
        f.top - 8.0,
        panel.title
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
        f.left + f.width / 2.0,
        f.top + f.height + 30.0,
        panel.x_label
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        f.left - 52.0,
        f.top + f.height / 2.0,
        f.left - 52.0,
        f.top + f.height / 2.0,
        panel.y_label
    );
    for (i, s) in panel.series.iter().enumerate() {
        let y = f.top + 14.0 + 14.0 * i as f64;
        let x = f.left + f.width - 120.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"{}/>"#,
            y - 4.0,
            x + 20.0,
            y - 4.0,
            s.color,
            if s.dashed { r#" stroke-dasharray="4 2""# } else { "" }
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{y:.2}" font-size="10">{}</text>"#,
            x + 24.0,
            s.label
        );
    }
}

fn draw_series(svg: &mut String, s: &Series, frame: &Frame) {
    let mut points = String::new();
    for (i, &(x, y)) in s.points.iter().enumerate() {
        if i > 0 {
            points.push(' ');
        }
        let _ = write!(points, "{:.2},{:.2}", frame.px(x), frame.py(y));
    }
    let _ = writeln!(
        svg,
        r#"<polyline class="series" data-label="{}" fill="none" stroke="{}" stroke-width="1.2"{} points="{points}"/>"#,
        s.label,
        s.color,
        if s.dashed { r#" stroke-dasharray="4 2""# } else { "" }
    );
}

fn frame_for(panel: &Panel, top: f64, height: f64, equal_aspect: bool) -> Frame {
    let all = || panel.series.iter().flat_map(|s| s.points.iter());
    let mut x_range = padded_range(all().map(|p| p.0));
    let mut y_range = padded_range(all().map(|p| p.1));
    let (left, width) = (80.0, WIDTH - 110.0);
    if equal_aspect {
        let sx = (x_range.1 - x_range.0) / width;
        let sy = (y_range.1 - y_range.0) / height;
        let s = sx.max(sy);
        let cx = 0.5 * (x_range.0 + x_range.1);
        let cy = 0.5 * (y_range.0 + y_range.1);
        x_range = (cx - 0.5 * s * width, cx + 0.5 * s * width);
        y_range = (cy - 0.5 * s * height, cy + 0.5 * s * height);
    }
    Frame {
        left,
        top,
        width,
        height,
        x_range,
        y_range,
    }
}

fn time_series(trace: &[TraceRecord], f: impl Fn(&TraceRecord) -> Option<f64>) -> Vec<(f64, f64)> {
    trace.iter().filter_map(|r| Some((r.t, f(r)?))).collect()
}

/// Renders one figure of a trace as a self-contained SVG document.
///
/// `traj` draws the three trajectories with a launch marker (•) at each
/// start point and an event marker (×) at each end point; the other kinds
/// draw one polyline per quantity with one vertex per available sample.
pub fn emit_plot(trace: &[TraceRecord], kind: PlotKind) -> Result<String, PlotError> {
    if trace.is_empty() {
        return Err(PlotError::EmptyTrace);
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="800" height="600" viewBox="0 0 800 600" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r##"<rect width="800" height="600" fill="#ffffff"/>"##);
    match kind {
        PlotKind::Traj => {
            let agent = |label, color, f: fn(&TraceRecord) -> (f64, f64)| Series {
                label,
                color,
                dashed: false,
                points: trace.iter().map(f).collect(),
            };
            let panel = Panel {
                title: "Trajectories",
                x_label: "x (m)",
                y_label: "y (m)",
                series: vec![
                    agent("evader", EVADER_COLOR, |r| (r.evader.x, r.evader.y)),
                    agent("pursuer", PURSUER_COLOR, |r| (r.pursuer.x, r.pursuer.y)),
                    agent("defender", DEFENDER_COLOR, |r| (r.defender.x, r.defender.y)),
                ],
            };
            let frame = frame_for(&panel, 40.0, HEIGHT - 90.0, true);
            draw_frame(&mut svg, &panel, &frame);
            for s in &panel.series {
                draw_series(&mut svg, s, &frame);
            }
            for s in &panel.series {
                let (x0, y0) = s.points[0];
                let _ = writeln!(
                    svg,
                    r#"<circle class="launch" cx="{:.2}" cy="{:.2}" r="4" fill="{}"/>"#,
                    frame.px(x0),
                    frame.py(y0),
                    s.color
                );
                let (x1, y1) = *s.points.last().expect("non-empty trace");
                let (cx, cy) = (frame.px(x1), frame.py(y1));
                let _ = writeln!(
                    svg,
                    r#"<path class="event" d="M {:.2} {:.2} L {:.2} {:.2} M {:.2} {:.2} L {:.2} {:.2}" stroke="{}" stroke-width="2"/>"#,
                    cx - 5.0,
                    cy - 5.0,
                    cx + 5.0,
                    cy + 5.0,
                    cx - 5.0,
                    cy + 5.0,
                    cx + 5.0,
                    cy - 5.0,
                    s.color
                );
            }
        }
        PlotKind::Sigma => {
            let panels = [
                Panel {
                    title: "Evader manifold",
                    x_label: "t (s)",
                    y_label: "σ evader (rad/s)",
                    series: vec![Series {
                        label: "evader",
                        color: EVADER_COLOR,
                        dashed: false,
                        points: sigma_series(trace, Manifold::Evader),
                    }],
                },
                Panel {
                    title: "Defender manifold",
                    x_label: "t (s)",
                    y_label: "σ defender (s)",
                    series: vec![Series {
                        label: "defender",
                        color: DEFENDER_COLOR,
                        dashed: false,
                        points: sigma_series(trace, Manifold::Defender),
                    }],
                },
            ];
            for (i, panel) in panels.iter().enumerate() {
                let frame = frame_for(panel, 40.0 + 290.0 * i as f64, 210.0, false);
                draw_frame(&mut svg, panel, &frame);
                for s in &panel.series {
                    draw_series(&mut svg, s, &frame);
                }
            }
        }
        PlotKind::Accel | PlotKind::Tgo => {
            let series = |label, color, dashed, f: fn(&TraceRecord) -> Option<f64>| Series {
                label,
                color,
                dashed,
                points: time_series(trace, f),
            };
            let panel = if kind == PlotKind::Accel {
                Panel {
                    title: "Lateral accelerations",
                    x_label: "t (s)",
                    y_label: "a (m/s²)",
                    series: vec![
                        series("evader", EVADER_COLOR, false, |r| Some(r.a_e)),
                        series("pursuer", PURSUER_COLOR, false, |r| Some(r.a_p)),
                        series("defender", DEFENDER_COLOR, false, |r| Some(r.a_d)),
                        series("pursuer est.", ESTIMATE_COLOR, true, |r| Some(r.a_p_hat)),
                    ],
                }
            } else {
                Panel {
                    title: "Time-to-go",
                    x_label: "t (s)",
                    y_label: "t_go (s)",
                    series: vec![
                        series("evader-pursuer", PURSUER_COLOR, false, |r| r.tgo_ep),
                        series("defender", DEFENDER_COLOR, false, |r| r.tgo_defender),
                    ],
                }
            };
            let frame = frame_for(&panel, 40.0, HEIGHT - 90.0, false);
            draw_frame(&mut svg, &panel, &frame);
            for s in &panel.series {
                draw_series(&mut svg, s, &frame);
            }
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
