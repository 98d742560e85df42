//! Best-of-R training from independent random initialisations.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::alphabet::{ObservationAlphabet, ObservationSequence, StateSpace};
use super::forward_backward::log_likelihood;
use super::init::init_model;
use super::model::HmmModel;
use super::train::{train, TrainConfig, TrainReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RestartFit {
    pub model: HmmModel,
    /// Report of the winning run.
    pub report: TrainReport,
    /// `ln Pr(Y | model)` of the winning model.
    pub log_likelihood: f64,
    /// Index of the winning restart (0 is the run seeded with `seed` itself).
    pub best_restart: usize,
    pub seeds: Vec<u64>,
    /// EM iterations summed over every restart.
    pub total_iterations: usize,
}

/// Seeds for `restarts` runs. The first is `seed` itself, so a single
/// restart is plain [`init_model`] + [`train`]; the rest are drawn from a
/// generator keyed by `seed`, so nearby base seeds do not share restarts.
pub fn restart_seeds(seed: u64, restarts: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seeds = Vec::with_capacity(restarts);
    if restarts > 0 {
        seeds.push(seed);
    }
    while seeds.len() < restarts {
        seeds.push(rng.next_u64());
    }
    seeds
}

/// Trains from `restarts` random initialisations and keeps the model with the
/// highest final log-likelihood (earliest restart on ties).
pub fn train_with_restarts(
    states: &StateSpace,
    alphabet: &ObservationAlphabet,
    obs: &ObservationSequence,
    seed: u64,
    restarts: usize,
    config: TrainConfig,
) -> Result<RestartFit> {
    if restarts == 0 {
        return Err(Error::Argument("restarts must be at least 1".into()));
    }
    let seeds = restart_seeds(seed, restarts);
    let mut best: Option<RestartFit> = None;
    let mut total_iterations = 0;
    for (r, &s) in seeds.iter().enumerate() {
        let initial = init_model(states.clone(), alphabet.clone(), s)?;
        let (model, report) = train(&initial, obs, config)?;
        let ll = log_likelihood(&model, obs)?;
        total_iterations += report.iterations;
        if best.as_ref().is_none_or(|b| ll > b.log_likelihood) {
            best = Some(RestartFit {
                model,
                report,
                log_likelihood: ll,
                best_restart: r,
                seeds: Vec::new(),
                total_iterations: 0,
            });
        }
    }
    let mut fit = best.expect("at least one restart ran");
    fit.seeds = seeds;
    fit.total_iterations = total_iterations;
    Ok(fit)
}
