//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chainwatch_core::hmm::{write_model, TrainConfig, DEFAULT_MAX_ITERS, DEFAULT_TOLERANCE};
use chainwatch_core::sim::{generate, ChainSpec, EvidenceEmission, Injection};
use chainwatch_core::trace::{parse_trace_str, Trace, VerificationMap};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::detect::detect;
use crate::error::{HarnessError, Result};
use crate::grid::{grid_csv, parse_lengths, pivot_csv, pivot_path, run_grid, GridConfig, WindowRange};
use crate::pipeline::{run_trace, FitConfig, DEFAULT_RESTARTS};

#[derive(Debug, Parser)]
#[command(name = "chainwatch", version, about = "Reconstruct trigger-action chains from device event logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic trace from a chain spec.
    Simulate(SimulateArgs),
    /// Verify, train and decode one trace.
    Run(RunArgs),
    /// Sweep window sizes and sequence lengths.
    Grid(GridArgs),
    /// Score decoded chains and report the crucial pairs.
    Detect(DetectArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    /// File of `label: evidence-id…` lines; listed labels need all their evidence.
    #[arg(long)]
    verify_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// TOML chain spec; the built-in smart-home chain when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output trace file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    gap_ms: Option<u64>,
    #[arg(long)]
    spurious_rate: Option<f64>,
    /// Comma-separated event labels replacing the chain.
    #[arg(long)]
    chain: Option<String>,
    /// `label=id:delay:prob[,id:delay:prob…]`, replaces that label's evidence.
    #[arg(long = "evidence")]
    evidence: Vec<String>,
    /// `position=label:prob`, a ghost event before chain position `position`.
    #[arg(long = "inject")]
    inject: Vec<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value_t = 105)]
    window_ms: u64,
    /// Write the trained model here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Trace file; when omitted the trace is simulated from `--spec`.
    #[arg(long, conflicts_with = "spec")]
    trace: Option<PathBuf>,
    /// TOML chain spec; the built-in smart-home chain when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value = "105:200:5")]
    window_range: String,
    /// `a:b` or a comma-separated list.
    #[arg(long, default_value = "2:30")]
    lengths: String,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    /// CSV output; the F1 pivot goes next to it.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value_t = 105)]
    window_ms: u64,
    #[arg(long, default_value_t = 3)]
    attempts: usize,
    /// CSV output of every scored pair.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fit: FitArgs,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args, stdout),
        Command::Run(args) => run(args, stdout),
        Command::Grid(args) => grid(args, stdout),
        Command::Detect(args) => detect_cmd(args, stdout),
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::file(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| HarnessError::file(path, e))
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| HarnessError::file("<stdout>", e))
}

fn load_trace(path: &Path) -> Result<Trace> {
    Ok(parse_trace_str(&read_file(path)?)?)
}

fn load_spec(path: Option<&Path>) -> Result<ChainSpec> {
    match path {
        Some(p) => Ok(ChainSpec::from_toml(&read_file(p)?)?),
        None => Ok(ChainSpec::smart_home()),
    }
}

impl FitArgs {
    fn config(&self) -> Result<FitConfig> {
        let train = TrainConfig {
            max_iters: self.max_iters,
            tol: self.tol,
        };
        train.validate().map_err(|e| HarnessError::Usage(e.to_string()))?;
        if self.restarts == 0 {
            return Err(HarnessError::Usage("restarts must be at least 1".into()));
        }
        Ok(FitConfig {
            seed: self.seed,
            restarts: self.restarts,
            train,
        })
    }

    fn verification_map(&self) -> Result<Option<VerificationMap>> {
        match &self.verify_map {
            Some(p) => Ok(Some(VerificationMap::parse_str(&read_file(p)?)?)),
            None => Ok(None),
        }
    }
}

fn usage(msg: String) -> HarnessError {
    HarnessError::Usage(msg)
}

fn parse_num<T: std::str::FromStr>(text: &str, what: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| usage(format!("`{text}` is not a valid {what}")))
}

fn parse_evidence_override(text: &str) -> Result<(String, Vec<EvidenceEmission>)> {
    let (label, rest) = text
        .split_once('=')
        .ok_or_else(|| usage(format!("evidence override `{text}` is not label=id:delay:prob")))?;
    let emissions = rest
        .split(',')
        .map(|item| {
            let parts: Vec<&str> = item.split(':').collect();
            let [id, delay, prob] = parts.as_slice() else {
                return Err(usage(format!("evidence `{item}` is not id:delay:prob")));
            };
            Ok(EvidenceEmission {
                id: id.to_string(),
                delay_ms: parse_num(delay, "delay")?,
                probability: parse_num(prob, "probability")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((label.to_string(), emissions))
}

fn parse_injection(text: &str) -> Result<Injection> {
    let (pos, rest) = text
        .split_once('=')
        .ok_or_else(|| usage(format!("injection `{text}` is not position=label:prob")))?;
    let (label, prob) = rest
        .split_once(':')
        .ok_or_else(|| usage(format!("injection `{text}` is not position=label:prob")))?;
    Ok(Injection {
        before: parse_num(pos, "position")?,
        label: label.to_string(),
        probability: parse_num(prob, "probability")?,
    })
}

fn simulate(args: SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let mut spec = load_spec(args.spec.as_deref())?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(r) = args.repetitions {
        spec.repetitions = r;
    }
    if let Some(g) = args.gap_ms {
        spec.inter_event_gap_ms = g;
    }
    if let Some(rate) = args.spurious_rate {
        spec.spurious_evidence_rate = rate;
    }
    if let Some(chain) = &args.chain {
        spec.device_events = chain.split(',').map(|s| s.trim().to_string()).collect();
    }
    for item in &args.evidence {
        let (label, emissions) = parse_evidence_override(item)?;
        spec.evidence_map.insert(label, emissions);
    }
    for item in &args.inject {
        spec.injections.push(parse_injection(item)?);
    }
    spec.validate().map_err(|e| usage(e.to_string()))?;

    let text = generate(&spec)?.to_trace_text();
    match &args.out {
        Some(path) => write_file(path, &text),
        None => emit(stdout, &text),
    }
}

fn run(args: RunArgs, stdout: &mut dyn Write) -> Result<()> {
    let fit = args.fit.config()?;
    let map = args.fit.verification_map()?;
    let trace = load_trace(&args.trace)?;
    let outcome = run_trace(&trace, args.window_ms, fit, map.as_ref())?;

    let report = &outcome.fit.report;
    let verified = outcome.encoded.truth.len();
    let mut text = String::new();
    use std::fmt::Write as _;
    writeln!(text, "window_ms: {}", args.window_ms).unwrap();
    writeln!(text, "verified_events: {verified}").unwrap();
    writeln!(
        text,
        "states: {}  symbols: {}  obs_state_ratio: {:.6}",
        outcome.encoded.states.len(),
        outcome.encoded.alphabet.len(),
        outcome.encoded.obs_state_ratio()
    )
    .unwrap();
    writeln!(
        text,
        "iterations: {} ({}, restart {} of {})",
        report.iterations,
        if report.converged { "converged" } else { "iteration cap reached" },
        outcome.fit.best_restart + 1,
        fit.restarts
    )
    .unwrap();
    writeln!(text, "log_likelihood: {:.6}", outcome.fit.log_likelihood).unwrap();
    writeln!(text, "estimation_time_s: {:.6}", outcome.estimation_time.as_secs_f64()).unwrap();
    writeln!(text, "decoding_time_ms: {:.6}", outcome.decoding_time.as_secs_f64() * 1e3).unwrap();
    writeln!(text, "f1: {:.6}", outcome.f1).unwrap();
    writeln!(text, "decoded: {}", outcome.decoded_labels().join(" ")).unwrap();
    emit(stdout, &text)?;

    if let Some(path) = &args.out {
        let mut buf = Vec::new();
        write_model(&outcome.fit.model, &mut buf)?;
        fs::write(path, buf).map_err(|e| HarnessError::file(path, e))?;
    }
    Ok(())
}

fn grid(args: GridArgs, stdout: &mut dyn Write) -> Result<()> {
    let config = GridConfig {
        windows: WindowRange::parse(&args.window_range)?,
        sequence_lengths: parse_lengths(&args.lengths)?,
        runs_per_cell: args.runs,
        fit: args.fit.config()?,
    };
    config.validate()?;
    let map = args.fit.verification_map()?;
    let trace = match &args.trace {
        Some(path) => load_trace(path)?,
        None => {
            let sim = generate(&load_spec(args.spec.as_deref())?)?;
            Trace {
                events: sim.events,
                evidence: sim.evidence,
            }
        }
    };
    let rows = run_grid(&trace, &config, map.as_ref())?;
    write_file(&args.out, &grid_csv(&rows))?;
    let pivot = pivot_path(&args.out);
    write_file(&pivot, &pivot_csv(&rows))?;
    let filled = rows.iter().filter(|r| r.metrics.is_some()).count();
    emit(
        stdout,
        &format!(
            "{} cells ({} evaluated) written to {}\nf1 pivot written to {}\n",
            rows.len(),
            filled,
            args.out.display(),
            pivot.display()
        ),
    )
}

fn detect_cmd(args: DetectArgs, stdout: &mut dyn Write) -> Result<()> {
    let fit = args.fit.config()?;
    let map = args.fit.verification_map()?;
    let trace = load_trace(&args.trace)?;
    let report = detect(&trace, args.window_ms, args.attempts, fit, map.as_ref())?;
    emit(stdout, &report.to_text())?;
    if let Some(path) = &args.out {
        write_file(path, &report.to_csv())?;
    }
    Ok(())
}
