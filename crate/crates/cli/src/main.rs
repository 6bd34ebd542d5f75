//! `escort` — run, batch, plot and list engagement scenarios.
//!
//! Exit codes: 0 when every run achieved the defender's mission, 2 when a
//! run ended without it (pursuer capture, wrong event, timeout), 1 on any
//! error, including a run abandoned for numerical failure.

use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use clap::{Parser, Subcommand};
use escort_core::analysis::{emit_plot, PlotKind};
use escort_core::io::{read_trace, write_summary, write_trace};
use escort_core::scenario::preset_names;
use escort_core::{
    parse_scenario, preset, run_scenario, Cooperation, EstimateSource, Method, Outcome,
    ScenarioConfig, SimResult,
};

#[derive(Parser)]
#[command(name = "escort", version, about = "Pursuer / evader / defender engagement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a built-in preset name or a scenario file).
    Run {
        #[arg(long)]
        scenario: String,
        /// Integration step, s.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_parser = parse_method)]
        method: Option<Method>,
        /// Feed the true pursuer acceleration to the guidance laws.
        #[arg(long)]
        perfect_ap: bool,
        /// Directory for `<name>.trace.csv` and `<name>.summary.json`; without
        /// it the summary goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several scenarios, writing traces and summaries to `--out`.
    Batch {
        /// Comma-separated preset names, scenario files or glob patterns.
        #[arg(long)]
        scenarios: String,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Render an SVG figure from a CSV trace.
    Plot {
        #[arg(long)]
        trace: PathBuf,
        /// traj, sigma, accel or tgo.
        #[arg(long)]
        kind: PlotKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in presets.
    Presets,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

/// Resolves a preset name or a scenario file path.
fn load_scenario(name_or_path: &str) -> Result<ScenarioConfig, String> {
    if preset_names().contains(&name_or_path) {
        return preset(name_or_path).map_err(|e| e.to_string());
    }
    let text = fs::read_to_string(name_or_path).map_err(|e| {
        format!("'{name_or_path}' is neither a preset nor a readable scenario file: {e}")
    })?;
    parse_scenario(&text).map_err(|e| format!("{name_or_path}: {e}"))
}

fn describe(config: &ScenarioConfig) -> String {
    let stance = match config.mode.stance {
        escort_core::Stance::Aggressive => "aggressive",
        escort_core::Stance::Defensive => "defensive",
    };
    let cooperation = match config.mode.cooperation {
        Cooperation::Indirect { impact_time } => format!("indirect, impact time {impact_time} s"),
        Cooperation::Direct { margin } => format!("direct, margin {margin} s"),
    };
    format!("{stance}, {cooperation}")
}

fn outcome_line(result: &SimResult) -> String {
    let mut line = format!(
        "{}: {:?} at {:.3} s, evader miss distance {:.2} m",
        result.scenario.name, result.outcome, result.event_time, result.evader_miss_distance
    );
    if let Some(reason) = &result.failure {
        line.push_str(&format!(" ({reason})"));
    }
    line
}

/// 0 on mission success, 2 on mission failure, 1 on numerical failure.
fn exit_code(result: &SimResult) -> u8 {
    if result.outcome == Outcome::NumericalFailure {
        1
    } else if result.mission_success() {
        0
    } else {
        2
    }
}

fn write_outputs(result: &SimResult, dir: &Path) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let name = &result.scenario.name;
    let trace_path = dir.join(format!("{name}.trace.csv"));
    let file = fs::File::create(&trace_path).map_err(|e| format!("{}: {e}", trace_path.display()))?;
    write_trace(result, BufWriter::new(file)).map_err(|e| format!("{}: {e}", trace_path.display()))?;
    let summary_path = dir.join(format!("{name}.summary.json"));
    fs::write(&summary_path, write_summary(result))
        .map_err(|e| format!("{}: {e}", summary_path.display()))
}

fn run(
    scenario: &str,
    dt: Option<f64>,
    method: Option<Method>,
    perfect_ap: bool,
    out: Option<&Path>,
) -> Result<u8, String> {
    let mut config = load_scenario(scenario)?;
    if perfect_ap {
        config.observer.source = EstimateSource::Truth;
    }
    let mut settings = config.sim_settings();
    if let Some(dt) = dt {
        settings.dt = dt;
    }
    if let Some(method) = method {
        settings.method = method;
    }
    let result = run_scenario(&config, &settings).map_err(|e| e.to_string())?;
    match out {
        Some(dir) => {
            write_outputs(&result, dir)?;
            println!("{}", outcome_line(&result));
        }
        None => print!("{}", write_summary(&result)),
    }
    Ok(exit_code(&result))
}

/// Expands the comma-separated batch list into preset names and file paths.
fn expand_batch_list(list: &str) -> Result<Vec<String>, String> {
    let mut items = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if preset_names().contains(&item) || Path::new(item).is_file() {
            items.push(item.to_string());
            continue;
        }
        let matches = glob::glob(item).map_err(|e| format!("bad pattern '{item}': {e}"))?;
        let mut found: Vec<String> = matches
            .filter_map(Result::ok)
            .filter(|p| p.is_file())
            .map(|p| p.display().to_string())
            .collect();
        if found.is_empty() {
            return Err(format!("'{item}' matches no preset or scenario file"));
        }
        found.sort();
        items.append(&mut found);
    }
    if items.is_empty() {
        return Err("no scenarios given".into());
    }
    Ok(items)
}

/// Batch item index, its exit status (or error) and its outcome line.
type BatchEntry = (usize, Result<u8, String>, String);

fn batch(list: &str, out: &Path, parallel: Option<usize>) -> Result<u8, String> {
    let items = expand_batch_list(list)?;
    let workers = parallel
        .or_else(|| thread::available_parallelism().ok().map(usize::from))
        .unwrap_or(1)
        .clamp(1, items.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<BatchEntry>> = Mutex::new(Vec::new());
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(item) = items.get(i) else { break };
                let outcome = load_scenario(item).and_then(|config| {
                    let result = run_scenario(&config, &config.sim_settings())
                        .map_err(|e| format!("{item}: {e}"))?;
                    write_outputs(&result, out)?;
                    Ok((exit_code(&result), outcome_line(&result)))
                });
                let entry = match outcome {
                    Ok((code, line)) => (i, Ok(code), line),
                    Err(e) => (i, Err(e.clone()), format!("{item}: error: {e}")),
                };
                results.lock().expect("worker panicked").push(entry);
            });
        }
    });
    let mut results = results.into_inner().expect("worker panicked");
    results.sort_by_key(|(i, _, _)| *i);
    let mut code = 0;
    for (_, status, line) in &results {
        println!("{line}");
        code = match status {
            Err(_) | Ok(1) => 1,
            Ok(2) if code == 0 => 2,
            _ => code,
        };
    }
    Ok(code)
}

fn plot(trace: &Path, kind: PlotKind, out: &Path) -> Result<u8, String> {
    let file = fs::File::open(trace).map_err(|e| format!("{}: {e}", trace.display()))?;
    let records = read_trace(BufReader::new(file)).map_err(|e| format!("{}: {e}", trace.display()))?;
    let svg = emit_plot(&records, kind).map_err(|e| e.to_string())?;
    fs::write(out, svg).map_err(|e| format!("{}: {e}", out.display()))?;
    Ok(0)
}

fn presets() -> Result<u8, String> {
    for name in preset_names() {
        let config = preset(name).map_err(|e| e.to_string())?;
        println!("{name:<10} {}", describe(&config));
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Run {
            scenario,
            dt,
            method,
            perfect_ap,
            out,
        } => run(&scenario, dt, method, perfect_ap, out.as_deref()),
        Command::Batch {
            scenarios,
            out,
            parallel,
        } => batch(&scenarios, &out, parallel),
        Command::Plot { trace, kind, out } => plot(&trace, kind, &out),
        Command::Presets => presets(),
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
