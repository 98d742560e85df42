//! Log-space Viterbi decoding with backpointer traceback.

use super::alphabet::ObservationSequence;
use super::model::HmmModel;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPath {
    /// Most likely hidden state per time step.
    pub states: Vec<usize>,
    /// `ln max_path Pr(path, Y | θ)`; `-inf` when no path can produce `Y`.
    pub log_probability: f64,
    /// Set when every path has probability zero. `states` is then all zeros.
    pub impossible: bool,
}

/// Relative gap below which two log scores count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `cand` beats `best` only by more than rounding noise, so paths that are
/// equal in exact arithmetic keep the lower index.
fn beats(cand: f64, best: f64) -> bool {
    if best == f64::NEG_INFINITY {
        return cand > best;
    }
    cand > best + TIE_TOLERANCE * best.abs().max(1.0)
}

/// Decodes the most probable state path.
///
/// Ties are broken toward the lowest state index, both when choosing the final
/// state and when choosing each backpointer. Scores within [`TIE_TOLERANCE`]
/// (relative) of each other are ties.
pub fn viterbi(model: &HmmModel, obs: &ObservationSequence) -> Result<DecodedPath> {
    obs.check_alphabet(model.n_symbols())?;
    let n = model.n_states();
    let y = obs.indices();
    let len = y.len();

    let log_q = model.transition().mapv(f64::ln);
    let log_e = model.emission().mapv(f64::ln);

    // ω_1(i) = ln σ_i + ln μ_i(y_1)
    let mut score: Vec<f64> = (0..n)
        .map(|i| model.initial()[i].ln() + log_e[[i, y[0]]])
        .collect();
    let mut next = vec![0.0; n];
    // χ_t(j): best predecessor of j at step t; row 0 is unused.
    let mut back = vec![0usize; len * n];

    for t in 1..len {
        for j in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for i in 0..n {
                let cand = score[i] + log_q[[i, j]];
                if beats(cand, best) {
                    best = cand;
                    arg = i;
                }
            }
            back[t * n + j] = arg;
            next[j] = best + log_e[[j, y[t]]];
        }
        std::mem::swap(&mut score, &mut next);
    }

    let (mut last, mut best) = (0, f64::NEG_INFINITY);
    for (i, &s) in score.iter().enumerate() {
        if beats(s, best) {
            best = s;
            last = i;
        }
    }
    if best == f64::NEG_INFINITY {
        return Ok(DecodedPath {
            states: vec![0; len],
            log_probability: f64::NEG_INFINITY,
            impossible: true,
        });
    }

    // ψ*_t = χ_{t+1}(ψ*_{t+1})
    let mut states = vec![0; len];
    states[len - 1] = last;
    for t in (1..len).rev() {
        states[t - 1] = back[t * n + states[t]];
    }
    Ok(DecodedPath {
        states,
        log_probability: best,
        impossible: false,
    })
}
