//! Seeded random initialisation of model parameters.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::alphabet::{ObservationAlphabet, StateSpace};
use super::model::HmmModel;
use crate::error::{Error, Result};

/// Added to every `|z|` draw so no Gaussian-initialised entry is exactly zero.
pub const GAUSSIAN_EPSILON: f64 = 1e-6;

/// Concentration of the symmetric Dirichlet used for emission rows.
pub const DIRICHLET_CONCENTRATION: f64 = 1.0;

/// Draws a random stochastic model.
///
/// σ and each row of Q are `|z| + ε` for standard normal `z`, normalised.
/// Each row of E is a draw from a symmetric Dirichlet with concentration 1.
/// The same `(seed, N, K)` always yields the same bits.
pub fn init_model(
    states: StateSpace,
    alphabet: ObservationAlphabet,
    seed: u64,
) -> Result<HmmModel> {
    let n = states.len();
    let k = alphabet.len();
    if n == 0 || k == 0 {
        return Err(Error::Dimension(format!(
            "cannot initialise a model with {n} states and {k} symbols"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let initial = Array1::from(gaussian_row(&mut rng, n));
    let mut transition = Array2::zeros((n, n));
    for mut row in transition.rows_mut() {
        row.assign(&Array1::from(gaussian_row(&mut rng, n)));
    }
    let gamma = Gamma::new(DIRICHLET_CONCENTRATION, 1.0).expect("valid gamma parameters");
    let mut emission = Array2::zeros((n, k));
    for mut row in emission.rows_mut() {
        row.assign(&Array1::from(dirichlet_row(&mut rng, &gamma, k)));
    }
    HmmModel::new(states, alphabet, initial, transition, emission)
}

fn gaussian_row<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            z.abs() + GAUSSIAN_EPSILON
        })
        .collect();
    normalized(raw)
}

// Symmetric Dirichlet via independent Gamma(α, 1) draws.
fn dirichlet_row<R: Rng>(rng: &mut R, gamma: &Gamma<f64>, len: usize) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
        if raw.iter().sum::<f64>() > 0.0 {
            return normalized(raw);
        }
    }
}

fn normalized(mut row: Vec<f64>) -> Vec<f64> {
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= sum);
    row
}
