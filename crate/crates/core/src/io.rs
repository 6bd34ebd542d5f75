//! CSV traces and JSON run summaries.
//!
//! # Trace format
//!
//! One header row, then one row per sample, comma-separated, every number
//! written with 9 significant digits (`{:.8e}`), undefined values as empty
//! cells. Columns, in order ([`TRACE_COLUMNS`], 45 in total):
//!
//! * `t` (s)
//! * per agent `e_`, `p_`, `d_`: `x`, `y` (m), `gamma` (rad), `v` (m/s)
//! * per pair `ep_`, `dp_`, `de_`: `r` (m), `lambda`, `delta_first`,
//!   `delta_second` (rad), `v_r`, `v_lambda` (m/s), `lambda_dot` (rad/s)
//! * `a_e_raw`, `a_e`, `a_p_raw`, `a_p`, `a_d_raw`, `a_d`, `a_p_hat` (m/s²)
//! * `sigma_evader` (rad/s), `sigma_defender` (s)
//! * `tgo_ep`, `tgo_defender` (s)

use std::io::{self, BufRead, Write};

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    convergence_report, epsilon_report, margin_report, miss_distance, observer_settling_time,
    ConvergenceReport, EpsilonCheck, Manifold, MarginReport, MissAt, OBSERVER_SETTLED,
};
use crate::engine::{Outcome, SimResult, SimSettings, TraceRecord};
use crate::guidance::{Cooperation, GuidanceMode};
use crate::kinematics::{AgentState, PairGeometry};

/// Trace column names in file order.
pub const TRACE_COLUMNS: [&str; 45] = [
    "t",
    "e_x", "e_y", "e_gamma", "e_v",
    "p_x", "p_y", "p_gamma", "p_v",
    "d_x", "d_y", "d_gamma", "d_v",
    "ep_r", "ep_lambda", "ep_delta_first", "ep_delta_second", "ep_v_r", "ep_v_lambda", "ep_lambda_dot",
    "dp_r", "dp_lambda", "dp_delta_first", "dp_delta_second", "dp_v_r", "dp_v_lambda", "dp_lambda_dot",
    "de_r", "de_lambda", "de_delta_first", "de_delta_second", "de_v_r", "de_v_lambda", "de_lambda_dot",
    "a_e_raw", "a_e", "a_p_raw", "a_p", "a_d_raw", "a_d", "a_p_hat",
    "sigma_evader", "sigma_defender",
    "tgo_ep", "tgo_defender",
];

/// Errors raised while reading a trace.
#[derive(Debug, Error)]
pub enum TraceError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("trace header does not match the documented column order")]
    BadHeader,
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
}

fn push_value(row: &mut Vec<String>, v: Option<f64>) {
    row.push(v.map_or_else(String::new, |v| format!("{v:.8e}")));
}

fn push_agent(row: &mut Vec<String>, a: &AgentState) {
    for v in [a.x, a.y, a.gamma, a.v] {
        push_value(row, Some(v));
    }
}

fn push_pair(row: &mut Vec<String>, p: Option<&PairGeometry>) {
    let fields = p.map(|p| [p.r, p.lambda, p.delta_first, p.delta_second, p.v_r, p.v_lambda, p.lambda_dot]);
    for i in 0..7 {
        push_value(row, fields.map(|f| f[i]));
    }
}

fn trace_row(r: &TraceRecord) -> String {
    let mut row = Vec::with_capacity(TRACE_COLUMNS.len());
    push_value(&mut row, Some(r.t));
    push_agent(&mut row, &r.evader);
    push_agent(&mut row, &r.pursuer);
    push_agent(&mut row, &r.defender);
    push_pair(&mut row, Some(&r.ep));
    push_pair(&mut row, r.dp.as_ref());
    push_pair(&mut row, r.de.as_ref());
    for v in [r.a_e_raw, r.a_e, r.a_p_raw, r.a_p, r.a_d_raw, r.a_d, r.a_p_hat, r.sigma_evader, r.sigma_defender] {
        push_value(&mut row, Some(v));
    }
    push_value(&mut row, r.tgo_ep);
    push_value(&mut row, r.tgo_defender);
    row.join(",")
}

/// Writes trace records as CSV.
pub fn write_trace_records<W: Write>(trace: &[TraceRecord], mut sink: W) -> io::Result<()> {
    writeln!(sink, "{}", TRACE_COLUMNS.join(","))?;
    for r in trace {
        writeln!(sink, "{}", trace_row(r))?;
    }
    sink.flush()
}

/// Writes a run's trace as CSV.
pub fn write_trace<W: Write>(result: &SimResult, sink: W) -> io::Result<()> {
    write_trace_records(&result.trace, sink)
}

/// Reads a CSV trace written by [`write_trace`].
pub fn read_trace<R: BufRead>(source: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut lines = source.lines();
    let header = lines.next().transpose()?.ok_or(TraceError::BadHeader)?;
    if header.trim_end() != TRACE_COLUMNS.join(",") {
        return Err(TraceError::BadHeader);
    }
    let mut trace = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| TraceError::BadRow { line: line_no, message };
        let cells: Vec<&str> = line.trim_end().split(',').collect();
        if cells.len() != TRACE_COLUMNS.len() {
            return Err(bad(format!(
                "expected {} columns, found {}",
                TRACE_COLUMNS.len(),
                cells.len()
            )));
        }
        let values = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(Some)
                        .map_err(|e| bad(format!("column {}: {e}", TRACE_COLUMNS[c])))
                }
            })
            .collect::<Result<Vec<Option<f64>>, TraceError>>()?;
        let req = |c: usize| {
            values[c].ok_or_else(|| bad(format!("column {} must not be empty", TRACE_COLUMNS[c])))
        };
        let agent = |c: usize| -> Result<AgentState, TraceError> {
            Ok(AgentState {
                x: req(c)?,
                y: req(c + 1)?,
                gamma: req(c + 2)?,
                v: req(c + 3)?,
            })
        };
        let pair = |c: usize| -> Result<Option<PairGeometry>, TraceError> {
            if values[c..c + 7].iter().all(Option::is_none) {
                return Ok(None);
            }
            Ok(Some(PairGeometry {
                r: req(c)?,
                lambda: req(c + 1)?,
                delta_first: req(c + 2)?,
                delta_second: req(c + 3)?,
                v_r: req(c + 4)?,
                v_lambda: req(c + 5)?,
                lambda_dot: req(c + 6)?,
            }))
        };
        trace.push(TraceRecord {
            t: req(0)?,
            evader: agent(1)?,
            pursuer: agent(5)?,
            defender: agent(9)?,
            ep: pair(13)?.ok_or_else(|| bad("evader-pursuer geometry must be present".into()))?,
            dp: pair(20)?,
            de: pair(27)?,
            a_e_raw: req(34)?,
            a_e: req(35)?,
            a_p_raw: req(36)?,
            a_p: req(37)?,
            a_d_raw: req(38)?,
            a_d: req(39)?,
            a_p_hat: req(40)?,
            sigma_evader: req(41)?,
            sigma_defender: req(42)?,
            tgo_ep: values[43],
            tgo_defender: values[44],
        });
    }
    Ok(trace)
}

/// Machine-readable run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub outcome: Outcome,
    pub mission_success: bool,
    /// s.
    pub event_time: f64,
    pub failure: Option<String>,
    /// Evader–pursuer range at the event, or its minimum without a capture, m.
    pub evader_miss_distance: f64,
    /// Minimum evader–pursuer range over the run, m.
    pub min_evader_range: f64,
    /// Evader–pursuer range at the last recorded sample, m.
    pub final_evader_range: Option<f64>,
    pub mode: GuidanceMode,
    pub convergence: [ConvergenceReport; 2],
    /// Present in direct cooperation only.
    pub margin: Option<MarginReport>,
    pub epsilon: [EpsilonCheck; 2],
    /// Time after which |â_P − a_P| stays below 1 m/s², s.
    pub observer_settling_time: Option<f64>,
    pub samples: usize,
    pub settings: SimSettings,
}

/// Margin-adherence tolerance reported in summaries, s.
pub const MARGIN_TOLERANCE: f64 = 0.1;

impl Summary {
    /// Builds the summary of a finished run.
    pub fn of(result: &SimResult) -> Self {
        let s = &result.scenario;
        let tol = result.settings.manifold_tolerance;
        let trace = &result.trace;
        let margin = match s.mode.cooperation {
            Cooperation::Direct { margin } => Some(margin_report(trace, margin, tol, MARGIN_TOLERANCE)),
            Cooperation::Indirect { .. } => None,
        };
        Summary {
            name: s.name.clone(),
            outcome: result.outcome,
            mission_success: result.mission_success(),
            event_time: result.event_time,
            failure: result.failure.clone(),
            evader_miss_distance: result.evader_miss_distance,
            min_evader_range: result.min_evader_range,
            final_evader_range: miss_distance(trace, MissAt::Event),
            mode: s.mode,
            convergence: [
                convergence_report(trace, Manifold::Evader, &s.gains.sigma1, tol),
                convergence_report(trace, Manifold::Defender, s.gains.defender(&s.mode), tol),
            ],
            margin,
            epsilon: epsilon_report(result),
            observer_settling_time: observer_settling_time(trace, OBSERVER_SETTLED),
            samples: trace.len(),
            settings: result.settings,
        }
    }
}

/// JSON summary of a run.
pub fn write_summary(result: &SimResult) -> String {
    let mut text = serde_json::to_string_pretty(&Summary::of(result))
        .expect("summaries always serialize");
    text.push('\n');
    text
}
