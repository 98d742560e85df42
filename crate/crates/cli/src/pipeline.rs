//! parse → verify → encode → train → decode → score.

use std::time::{Duration, Instant};

use chainwatch_core::analysis::{align_states, f_score, relabel};
use chainwatch_core::hmm::{train_with_restarts, viterbi, DecodedPath, RestartFit, TrainConfig};
use chainwatch_core::trace::{
    build_alphabet, extract_verified_with, EncodedSequence, Trace, VerificationMap,
    VerifiedSequence, WindowConfig,
};

use crate::error::{HarnessError, Result};

pub const DEFAULT_RESTARTS: usize = 10;

/// How a model is fitted to one observation sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub seed: u64,
    /// Independent random initialisations; the best final likelihood wins.
    pub restarts: usize,
    pub train: TrainConfig,
}

impl FitConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            restarts: DEFAULT_RESTARTS,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub encoded: EncodedSequence,
    pub fit: RestartFit,
    pub decoded: DecodedPath,
    /// `mapping[hidden state] = label index`, see [`align_states`].
    pub mapping: Vec<usize>,
    /// Decoded path expressed in label indices.
    pub aligned: Vec<usize>,
    pub f1: f64,
    pub estimation_time: Duration,
    pub decoding_time: Duration,
}

impl RunOutcome {
    pub fn decoded_labels(&self) -> Vec<String> {
        self.labels(&self.aligned)
    }

    pub fn truth_labels(&self) -> Vec<String> {
        self.labels(&self.encoded.truth)
    }

    fn labels(&self, indices: &[usize]) -> Vec<String> {
        indices
            .iter()
            .map(|&i| self.encoded.states.label(i).expect("state index").to_string())
            .collect()
    }
}

pub fn verify(
    trace: &Trace,
    window_ms: u64,
    map: Option<&VerificationMap>,
) -> Result<VerifiedSequence> {
    let window = WindowConfig::new(window_ms).map_err(|e| HarnessError::Usage(e.to_string()))?;
    Ok(extract_verified_with(&trace.events, &trace.evidence, window, map))
}

/// Runs the whole pipeline on a parsed trace.
pub fn run_trace(
    trace: &Trace,
    window_ms: u64,
    fit: FitConfig,
    map: Option<&VerificationMap>,
) -> Result<RunOutcome> {
    let verified = verify(trace, window_ms, map)?;
    if verified.len() < 2 {
        return Err(HarnessError::InsufficientVerified {
            found: verified.len(),
            window_ms,
        });
    }
    run_verified(&verified, fit)
}

/// Trains and decodes an already verified sequence. Only training and
/// decoding are timed.
pub fn run_verified(verified: &VerifiedSequence, config: FitConfig) -> Result<RunOutcome> {
    let encoded = build_alphabet(verified)?;

    let started = Instant::now();
    let fit = train_with_restarts(
        &encoded.states,
        &encoded.alphabet,
        &encoded.observations,
        config.seed,
        config.restarts,
        config.train,
    )?;
    let estimation_time = started.elapsed();

    let started = Instant::now();
    let decoded = viterbi(&fit.model, &encoded.observations)?;
    let decoding_time = started.elapsed();

    let mapping = align_states(&encoded.truth, &decoded.states, encoded.states.len())?;
    let aligned = relabel(&decoded.states, &mapping);
    let f1 = f_score(&encoded.truth, &aligned)?;
    Ok(RunOutcome {
        encoded,
        fit,
        decoded,
        mapping,
        aligned,
        f1,
        estimation_time,
        decoding_time,
    })
}
