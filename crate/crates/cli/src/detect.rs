//! Crucial-pair detection over repeated decoding attempts.

use std::fmt::Write as _;

use chainwatch_core::analysis::{crucial_pairs, score_pairs, CrucialResult, ScoreTable};
use chainwatch_core::trace::{Trace, VerificationMap};

use crate::error::{HarnessError, Result};
use crate::pipeline::{run_verified, verify, FitConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectReport {
    pub original: Vec<String>,
    pub extracted: Vec<Vec<String>>,
    pub table: ScoreTable,
    pub result: CrucialResult,
}

/// Scores already extracted label sequences against `original`.
pub fn detect_from_sequences(
    original: Vec<String>,
    extracted: Vec<Vec<String>>,
) -> Result<DetectReport> {
    let table = score_pairs(&original, &extracted)?;
    let result = crucial_pairs(&table)?;
    Ok(DetectReport {
        original,
        extracted,
        table,
        result,
    })
}

/// Decodes the trace `attempts` times with seeds `seed, seed + 1, …` and
/// scores the decoded label sequences against the chain of distinct event
/// labels in order of first appearance.
pub fn detect(
    trace: &Trace,
    window_ms: u64,
    attempts: usize,
    fit: FitConfig,
    map: Option<&VerificationMap>,
) -> Result<DetectReport> {
    if attempts == 0 {
        return Err(HarnessError::Usage("attempts must be at least 1".into()));
    }
    let verified = verify(trace, window_ms, map)?;
    if verified.len() < 2 {
        return Err(HarnessError::InsufficientVerified {
            found: verified.len(),
            window_ms,
        });
    }
    let mut original = Vec::new();
    let mut extracted = Vec::with_capacity(attempts);
    for a in 0..attempts {
        let config = FitConfig {
            seed: fit.seed.wrapping_add(a as u64),
            ..fit
        };
        let outcome = run_verified(&verified, config)?;
        if original.is_empty() {
            original = outcome.encoded.states.labels().to_vec();
        }
        extracted.push(outcome.decoded_labels());
    }
    detect_from_sequences(original, extracted)
}

impl DetectReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "chain: {}", self.original.join(" -> ")).unwrap();
        writeln!(out, "attempts: {}", self.extracted.len()).unwrap();
        writeln!(out, "pair scores:").unwrap();
        for (from, to, count) in self.table.iter() {
            writeln!(out, "  {from} -> {to}: {count}").unwrap();
        }
        writeln!(out, "crucial pairs (score {}):", self.result.max_count).unwrap();
        for (from, to) in &self.result.pairs {
            writeln!(out, "  {from} -> {to}").unwrap();
        }
        out
    }

    /// `from,to,count,crucial` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("from,to,count,crucial\n");
        for (from, to, count) in self.table.iter() {
            let crucial = self
                .result
                .pairs
                .iter()
                .any(|(a, b)| a == from && b == to);
            writeln!(out, "{from},{to},{count},{crucial}").unwrap();
        }
        out
    }
}
