//! Baum-Welch re-estimation.

use ndarray::{Array2, Axis};

use super::alphabet::ObservationSequence;
use super::forward_backward::{forward_backward, posteriors};
use super::model::{normalize_in_place, HmmModel};
use crate::error::{Error, Result};

/// Emission probabilities are floored here after every re-estimation.
pub const EMISSION_FLOOR: f64 = 1e-12;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub max_iters: usize,
    /// Stop once no parameter moves by this much or more in one step.
    pub tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOLERANCE,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Argument(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood of the model entering each iteration.
    pub log_likelihood_history: Vec<f64>,
    /// Max-abs parameter change of the last executed iteration.
    pub final_delta: f64,
}

/// One EM step. Returns the re-estimated model and the log-likelihood of the
/// *input* model on `obs`.
///
/// States with zero expected occupancy keep their previous Q and E rows. With
/// a single observation there are no transitions, so Q is returned unchanged.
pub fn baum_welch_step(model: &HmmModel, obs: &ObservationSequence) -> Result<(HmmModel, f64)> {
    let fb = forward_backward(model, obs)?;
    let post = posteriors(model, obs, &fb)?;
    let n = model.n_states();
    let k = model.n_symbols();
    let len = obs.len();
    let gamma = &post.gamma;

    // σ̄_i = δ_1(i)
    let mut initial = gamma.row(0).to_owned();
    normalize_in_place(initial.view_mut());

    // q̄_ij = Σ_{t<T} ξ_t(i,j) / Σ_{t<T} δ_t(i)
    let mut transition = model.transition().to_owned();
    if len >= 2 {
        let expected_moves = post.xi.sum_axis(Axis(0));
        let occupancy = gamma.slice(ndarray::s![..len - 1, ..]).sum_axis(Axis(0));
        for i in 0..n {
            if occupancy[i] > 0.0 {
                let mut row = transition.row_mut(i);
                row.assign(&expected_moves.row(i));
                row.mapv_inplace(|v| v / occupancy[i]);
                normalize_in_place(row);
            }
        }
    }

    // μ̄_j(k) = Σ_t 1(Y_t = y_k) δ_t(j) / Σ_t δ_t(j)
    let mut counts = Array2::<f64>::zeros((n, k));
    for (t, &y) in obs.indices().iter().enumerate() {
        for j in 0..n {
            counts[[j, y]] += gamma[[t, j]];
        }
    }
    let occupancy = gamma.sum_axis(Axis(0));
    let mut emission = model.emission().to_owned();
    for j in 0..n {
        if occupancy[j] > 0.0 {
            let mut row = emission.row_mut(j);
            row.assign(&counts.row(j));
            row.mapv_inplace(|v| (v / occupancy[j]).max(EMISSION_FLOOR));
            normalize_in_place(row);
        }
    }

    Ok((
        model.with_parameters(initial, transition, emission),
        fb.log_likelihood,
    ))
}

/// Iterates [`baum_welch_step`] until the largest parameter change drops below
/// `config.tol` or `config.max_iters` steps have run.
pub fn train(
    model: &HmmModel,
    obs: &ObservationSequence,
    config: TrainConfig,
) -> Result<(HmmModel, TrainReport)> {
    train_observed(model, obs, config, |_, _| {})
}

/// Like [`train`], calling `observer(iteration, model)` with each re-estimated
/// model (iterations count from 1).
pub fn train_observed<F>(
    model: &HmmModel,
    obs: &ObservationSequence,
    config: TrainConfig,
    mut observer: F,
) -> Result<(HmmModel, TrainReport)>
where
    F: FnMut(usize, &HmmModel),
{
    config.validate()?;
    obs.check_alphabet(model.n_symbols())?;

    let mut current = model.clone();
    let mut history = Vec::new();
    let mut final_delta = f64::INFINITY;
    let mut converged = false;
    while history.len() < config.max_iters {
        let (next, ll) = baum_welch_step(&current, obs)?;
        history.push(ll);
        final_delta = current.max_abs_diff(&next);
        current = next;
        observer(history.len(), &current);
        if final_delta < config.tol {
            converged = true;
            break;
        }
    }
    let report = TrainReport {
        iterations: history.len(),
        converged,
        log_likelihood_history: history,
        final_delta,
    };
    Ok((current, report))
}
