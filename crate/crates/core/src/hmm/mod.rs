//! Discrete-observation hidden Markov model.
//!
//! Training is Baum-Welch over a single observation sequence; decoding is
//! Viterbi in log space. See [`forward_backward`] for the scaling convention.

mod alphabet;
mod forward_backward;
mod init;
mod io;
mod model;
mod restart;
mod train;
mod viterbi;

pub use alphabet::{EvidenceSet, ObservationAlphabet, ObservationSequence, StateSpace};
pub use forward_backward::{
    forward_backward, log_likelihood, posteriors, ForwardBackwardTables, PosteriorTables,
};
pub use init::{init_model, DIRICHLET_CONCENTRATION, GAUSSIAN_EPSILON};
pub use io::{model_from_str, model_to_string, read_model, write_model};
pub use model::{HmmModel, STOCHASTIC_TOLERANCE};
pub use restart::{restart_seeds, train_with_restarts, RestartFit};
pub use train::{
    baum_welch_step, train, train_observed, TrainConfig, TrainReport, DEFAULT_MAX_ITERS,
    DEFAULT_TOLERANCE, EMISSION_FLOOR,
};
pub use viterbi::{viterbi, DecodedPath, TIE_TOLERANCE};
