//! Scaled forward-backward recursions and state posteriors.
//!
//! Each forward row is normalised to sum to one. With `c_t` the reciprocal of
//! the unscaled row sum, the stored quantities are
//!
//! ```text
//! alpha[t][i] = α_t(i) / Pr(Y_1..Y_t)
//! beta[t][i]  = β_t(i) · c_{t+1} · … · c_T        (beta[T-1][i] = 1)
//! log Pr(Y_1..Y_T) = −Σ_t ln c_t
//! ```
//!
//! so `alpha[t][i] · beta[t][i]` is already the posterior `Pr(X_t = i | Y)`.

use ndarray::{Array1, Array2, Array3, Axis};

use super::alphabet::ObservationSequence;
use super::model::HmmModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardBackwardTables {
    /// T×N scaled forward variables; each row sums to one.
    pub alpha: Array2<f64>,
    /// T×N scaled backward variables.
    pub beta: Array2<f64>,
    /// Per-step normalisers `c_t > 0`.
    pub scale: Array1<f64>,
    /// `ln Pr(Y_1..Y_T | θ)`.
    pub log_likelihood: f64,
}

impl ForwardBackwardTables {
    pub fn len(&self) -> usize {
        self.scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scale.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTables {
    /// T×N state posteriors `δ_t(i)`.
    pub gamma: Array2<f64>,
    /// (T−1)×N×N pairwise posteriors `ξ_t(i, j)`.
    pub xi: Array3<f64>,
}

pub fn forward_backward(
    model: &HmmModel,
    obs: &ObservationSequence,
) -> Result<ForwardBackwardTables> {
    obs.check_alphabet(model.n_symbols())?;
    let y = obs.indices();
    let n = model.n_states();
    let len = y.len();
    let q = model.transition();
    let e = model.emission();

    let mut alpha = Array2::<f64>::zeros((len, n));
    let mut scale = Array1::<f64>::zeros(len);

    // α_1(i) = σ_i μ_i(y_1)
    {
        let mut row = alpha.row_mut(0);
        for i in 0..n {
            row[i] = model.initial()[i] * e[[i, y[0]]];
        }
    }
    scale[0] = rescale(alpha.row_mut(0), 0)?;

    // α_{t+1}(j) = μ_j(y_{t+1}) Σ_i α_t(i) q_ij
    for t in 1..len {
        let (prev, mut next) = alpha.multi_slice_mut((ndarray::s![t - 1, ..], ndarray::s![t, ..]));
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += prev[i] * q[[i, j]];
            }
            next[j] = acc * e[[j, y[t]]];
        }
        scale[t] = rescale(next, t)?;
    }

    // β_T(i) = 1;  β_t(i) = Σ_j q_ij μ_j(y_{t+1}) β_{t+1}(j), scaled by c_{t+1}
    let mut beta = Array2::<f64>::zeros((len, n));
    beta.row_mut(len - 1).fill(1.0);
    for t in (0..len - 1).rev() {
        let c = scale[t + 1];
        let (mut cur, next) = beta.multi_slice_mut((ndarray::s![t, ..], ndarray::s![t + 1, ..]));
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += q[[i, j]] * e[[j, y[t + 1]]] * next[j];
            }
            cur[i] = acc * c;
        }
    }

    let log_likelihood = -scale.iter().map(|c| c.ln()).sum::<f64>();
    Ok(ForwardBackwardTables {
        alpha,
        beta,
        scale,
        log_likelihood,
    })
}

/// `ln Pr(Y | θ)` via the scaled forward pass.
pub fn log_likelihood(model: &HmmModel, obs: &ObservationSequence) -> Result<f64> {
    Ok(forward_backward(model, obs)?.log_likelihood)
}

// Normalises an unscaled forward row in place and returns c_t.
fn rescale(mut row: ndarray::ArrayViewMut1<'_, f64>, step: usize) -> Result<f64> {
    let sum = row.sum();
    let c = 1.0 / sum;
    if sum.is_nan() || sum <= 0.0 || !c.is_finite() {
        return Err(Error::ZeroLikelihood { step });
    }
    row.mapv_inplace(|a| a * c);
    Ok(c)
}

pub fn posteriors(
    model: &HmmModel,
    obs: &ObservationSequence,
    tables: &ForwardBackwardTables,
) -> Result<PosteriorTables> {
    let n = model.n_states();
    let len = obs.len();
    if tables.alpha.dim() != (len, n)
        || tables.beta.dim() != (len, n)
        || tables.scale.len() != len
    {
        return Err(Error::Dimension(format!(
            "forward-backward tables are {:?}/{:?} but the sequence needs ({len}, {n})",
            tables.alpha.dim(),
            tables.beta.dim()
        )));
    }
    obs.check_alphabet(model.n_symbols())?;
    let y = obs.indices();
    let q = model.transition();
    let e = model.emission();
    let alpha = &tables.alpha;
    let beta = &tables.beta;

    // δ_t(i) = α_t(i) β_t(i) / Σ_j α_t(j) β_t(j)
    let mut gamma = alpha * beta;
    for (t, row) in gamma.axis_iter_mut(Axis(0)).enumerate() {
        if !super::model::normalize_in_place(row) {
            return Err(Error::ZeroLikelihood { step: t });
        }
    }

    // ξ_t(i,j) ∝ α_t(i) q_ij μ_j(y_{t+1}) β_{t+1}(j)
    let mut xi = Array3::<f64>::zeros((len.saturating_sub(1), n, n));
    for (t, mut slab) in xi.axis_iter_mut(Axis(0)).enumerate() {
        let mut total = 0.0;
        for i in 0..n {
            let a = alpha[[t, i]];
            for j in 0..n {
                let v = a * q[[i, j]] * e[[j, y[t + 1]]] * beta[[t + 1, j]];
                slab[[i, j]] = v;
                total += v;
            }
        }
        if total.is_nan() || total <= 0.0 {
            return Err(Error::ZeroLikelihood { step: t + 1 });
        }
        slab.mapv_inplace(|v| v / total);
    }

    Ok(PosteriorTables { gamma, xi })
}
