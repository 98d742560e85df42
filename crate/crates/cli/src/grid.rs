//! Window × sequence-length evaluation sweep.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chainwatch_core::trace::{Trace, VerificationMap};

use crate::error::{HarnessError, Result};
use crate::pipeline::{run_verified, verify, FitConfig};

pub const CSV_HEADER: &str = "window_ms,length,est_time_s,dec_time_ms,iterations,obs_state_ratio,f1";

/// Inclusive `start:stop:step` range of window sizes in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowRange {
    pub start_ms: u64,
    pub stop_ms: u64,
    pub step_ms: u64,
}

impl Default for WindowRange {
    fn default() -> Self {
        Self {
            start_ms: 105,
            stop_ms: 200,
            step_ms: 5,
        }
    }
}

impl WindowRange {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(HarnessError::Usage(format!(
                "window range `{text}` is not start:stop:step"
            )));
        };
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| HarnessError::Usage(format!("`{s}` in window range is not a whole number")))
        };
        let range = Self {
            start_ms: num(start)?,
            stop_ms: num(stop)?,
            step_ms: num(step)?,
        };
        range.validate()?;
        Ok(range)
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_ms == 0 {
            return Err(HarnessError::Usage("window step must be positive".into()));
        }
        if self.start_ms == 0 || self.start_ms > self.stop_ms {
            return Err(HarnessError::Usage(format!(
                "window range {}..{} is empty or starts at zero",
                self.start_ms, self.stop_ms
            )));
        }
        Ok(())
    }

    pub fn windows(&self) -> Vec<u64> {
        (self.start_ms..=self.stop_ms)
            .step_by(self.step_ms as usize)
            .collect()
    }
}

/// Parses `a:b` (inclusive) or a comma-separated list.
pub fn parse_lengths(text: &str) -> Result<Vec<usize>> {
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| HarnessError::Usage(format!("`{s}` is not a sequence length")))
    };
    let lengths = match text.split_once(':') {
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(HarnessError::Usage(format!("length range `{text}` is empty")));
            }
            (a..=b).collect()
        }
        None => text.split(',').map(num).collect::<Result<Vec<_>>>()?,
    };
    Ok(lengths)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub windows: WindowRange,
    pub sequence_lengths: Vec<usize>,
    pub runs_per_cell: usize,
    pub fit: FitConfig,
}

impl GridConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            windows: WindowRange::default(),
            sequence_lengths: (2..=30).collect(),
            runs_per_cell: 10,
            fit: FitConfig::new(seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.windows.validate()?;
        if self.sequence_lengths.is_empty() {
            return Err(HarnessError::Usage("no sequence lengths given".into()));
        }
        if let Some(l) = self.sequence_lengths.iter().find(|&&l| l < 2) {
            return Err(HarnessError::Usage(format!(
                "sequence length {l} is below the minimum of 2"
            )));
        }
        if self.runs_per_cell == 0 {
            return Err(HarnessError::Usage("runs per cell must be at least 1".into()));
        }
        if self.fit.restarts == 0 {
            return Err(HarnessError::Usage("restarts must be at least 1".into()));
        }
        self.fit
            .train
            .validate()
            .map_err(|e| HarnessError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub mean_estimation_time_s: f64,
    pub mean_decoding_time_ms: f64,
    pub iterations: usize,
    pub unique_obs_to_state_ratio: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCellResult {
    pub window_ms: u64,
    pub sequence_length: usize,
    /// `None` when the window verifies fewer than `sequence_length` events.
    pub metrics: Option<CellMetrics>,
}

/// Evaluates every (window, length) cell in row-major order.
///
/// Each cell uses the first `length` verified events. Timings are averaged
/// over `runs_per_cell` identical runs; F1 and iteration counts come from the
/// first run (every run is seeded identically).
pub fn run_grid(
    trace: &Trace,
    config: &GridConfig,
    map: Option<&VerificationMap>,
) -> Result<Vec<GridCellResult>> {
    config.validate()?;
    let mut rows = Vec::new();
    for window_ms in config.windows.windows() {
        let verified = verify(trace, window_ms, map)?;
        for &length in &config.sequence_lengths {
            let metrics = if verified.len() < length {
                None
            } else {
                let prefix = verified.truncated(length);
                let mut est = 0.0;
                let mut dec = 0.0;
                let mut first = None;
                for _ in 0..config.runs_per_cell {
                    let outcome = run_verified(&prefix, config.fit)?;
                    est += outcome.estimation_time.as_secs_f64();
                    dec += outcome.decoding_time.as_secs_f64() * 1e3;
                    first.get_or_insert(outcome);
                }
                let first = first.expect("runs_per_cell >= 1");
                let runs = config.runs_per_cell as f64;
                Some(CellMetrics {
                    mean_estimation_time_s: est / runs,
                    mean_decoding_time_ms: dec / runs,
                    iterations: first.fit.report.iterations,
                    unique_obs_to_state_ratio: first.encoded.obs_state_ratio(),
                    f1: first.f1,
                })
            };
            rows.push(GridCellResult {
                window_ms,
                sequence_length: length,
                metrics,
            });
        }
    }
    Ok(rows)
}

pub fn grid_csv(rows: &[GridCellResult]) -> String {
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    for row in rows {
        match &row.metrics {
            Some(m) => writeln!(
                out,
                "{},{},{:.6},{:.6},{},{:.6},{:.6}",
                row.window_ms,
                row.sequence_length,
                m.mean_estimation_time_s,
                m.mean_decoding_time_ms,
                m.iterations,
                m.unique_obs_to_state_ratio,
                m.f1
            )
            .unwrap(),
            None => writeln!(out, "{},{},,,,,", row.window_ms, row.sequence_length).unwrap(),
        }
    }
    out
}

/// Heatmap layout: one row per window, one F1 column per length.
pub fn pivot_csv(rows: &[GridCellResult]) -> String {
    let mut lengths: Vec<usize> = Vec::new();
    let mut windows: Vec<u64> = Vec::new();
    for row in rows {
        if !lengths.contains(&row.sequence_length) {
            lengths.push(row.sequence_length);
        }
        if !windows.contains(&row.window_ms) {
            windows.push(row.window_ms);
        }
    }
    let mut out = String::from("window_ms");
    for l in &lengths {
        write!(out, ",{l}").unwrap();
    }
    out.push('\n');
    for w in &windows {
        write!(out, "{w}").unwrap();
        for l in &lengths {
            let f1 = rows
                .iter()
                .find(|r| r.window_ms == *w && r.sequence_length == *l)
                .and_then(|r| r.metrics.as_ref())
                .map(|m| format!("{:.6}", m.f1))
                .unwrap_or_default();
            write!(out, ",{f1}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// `dir/name.csv` → `dir/name_f1_pivot.csv`.
pub fn pivot_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "grid".into());
    out.with_file_name(format!("{stem}_f1_pivot.csv"))
}
