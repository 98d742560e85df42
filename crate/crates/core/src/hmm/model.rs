use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::alphabet::{ObservationAlphabet, StateSpace};
use crate::error::{Error, Result};

/// Row sums of every distribution in a model must be within this of 1.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-9;

/// A discrete HMM `θ = (σ, Q, E)` over a labelled state space and an
/// evidence-set alphabet.
///
/// `transition[[i, j]]` is `Pr(X_{t+1} = j | X_t = i)` and
/// `emission[[j, k]]` is `Pr(Y_t = k | X_t = j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    states: StateSpace,
    alphabet: ObservationAlphabet,
    initial: Array1<f64>,
    transition: Array2<f64>,
    emission: Array2<f64>,
}

impl HmmModel {
    pub fn new(
        states: StateSpace,
        alphabet: ObservationAlphabet,
        initial: Array1<f64>,
        transition: Array2<f64>,
        emission: Array2<f64>,
    ) -> Result<Self> {
        let n = states.len();
        let k = alphabet.len();
        if initial.len() != n {
            return Err(Error::Dimension(format!(
                "initial distribution has length {}, expected {n}",
                initial.len()
            )));
        }
        if transition.dim() != (n, n) {
            return Err(Error::Dimension(format!(
                "transition matrix is {:?}, expected ({n}, {n})",
                transition.dim()
            )));
        }
        if emission.dim() != (n, k) {
            return Err(Error::Dimension(format!(
                "emission matrix is {:?}, expected ({n}, {k})",
                emission.dim()
            )));
        }
        let model = Self {
            states,
            alphabet,
            initial,
            transition,
            emission,
        };
        model.check_stochastic(STOCHASTIC_TOLERANCE)?;
        Ok(model)
    }

    /// Same as [`HmmModel::new`] with the matrices given as nested rows.
    pub fn from_rows(
        states: StateSpace,
        alphabet: ObservationAlphabet,
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
        emission: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let transition = rows_to_array(transition, "transition")?;
        let emission = rows_to_array(emission, "emission")?;
        Self::new(states, alphabet, Array1::from(initial), transition, emission)
    }

    /// Number of hidden states, N.
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Number of observation symbols, K.
    pub fn n_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn alphabet(&self) -> &ObservationAlphabet {
        &self.alphabet
    }

    /// σ
    pub fn initial(&self) -> ArrayView1<'_, f64> {
        self.initial.view()
    }

    /// Q
    pub fn transition(&self) -> ArrayView2<'_, f64> {
        self.transition.view()
    }

    /// E
    pub fn emission(&self) -> ArrayView2<'_, f64> {
        self.emission.view()
    }

    /// Verifies that σ and every row of Q and E are probability vectors.
    pub fn check_stochastic(&self, tol: f64) -> Result<()> {
        check_distribution("initial distribution", self.initial.view(), tol)?;
        for (i, row) in self.transition.axis_iter(Axis(0)).enumerate() {
            check_distribution(&format!("transition row {i}"), row, tol)?;
        }
        for (i, row) in self.emission.axis_iter(Axis(0)).enumerate() {
            check_distribution(&format!("emission row {i}"), row, tol)?;
        }
        Ok(())
    }

    /// Largest absolute elementwise difference across σ, Q and E.
    ///
    /// Both models must have the same dimensions.
    pub fn max_abs_diff(&self, other: &HmmModel) -> f64 {
        assert_eq!(self.transition.dim(), other.transition.dim());
        assert_eq!(self.emission.dim(), other.emission.dim());
        let pairs = self
            .initial
            .iter()
            .zip(other.initial.iter())
            .chain(self.transition.iter().zip(other.transition.iter()))
            .chain(self.emission.iter().zip(other.emission.iter()));
        pairs.fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub(crate) fn with_parameters(
        &self,
        initial: Array1<f64>,
        transition: Array2<f64>,
        emission: Array2<f64>,
    ) -> Self {
        debug_assert_eq!(initial.len(), self.n_states());
        debug_assert_eq!(transition.dim(), self.transition.dim());
        debug_assert_eq!(emission.dim(), self.emission.dim());
        Self {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            initial,
            transition,
            emission,
        }
    }
}

fn rows_to_array(rows: Vec<Vec<f64>>, what: &str) -> Result<Array2<f64>> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::Dimension(format!("{what} rows have unequal lengths")));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n_rows, n_cols), flat)
        .map_err(|e| Error::Dimension(format!("{what}: {e}")))
}

fn check_distribution(what: &str, values: ArrayView1<'_, f64>, tol: f64) -> Result<()> {
    if let Some(bad) = values
        .iter()
        .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0)
    {
        return Err(Error::NotStochastic {
            what: what.to_string(),
            detail: format!("entry {bad} outside [0, 1]"),
        });
    }
    let sum = values.sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotStochastic {
            what: what.to_string(),
            detail: format!("sums to {sum}"),
        });
    }
    Ok(())
}

/// Rescales `row` to sum to one. Returns `false` (leaving the row untouched)
/// when the row has no mass.
pub(crate) fn normalize_in_place(mut row: ndarray::ArrayViewMut1<'_, f64>) -> bool {
    let sum = row.sum();
    if !(sum > 0.0 && sum.is_finite()) {
        return false;
    }
    row.mapv_inplace(|p| p / sum);
    true
}
