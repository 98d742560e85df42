//! Reconstruction of hidden trigger-action event chains from physical evidence.
//!
//! The crate is organised in four layers:
//!
//! * [`hmm`]: a discrete-observation hidden Markov model with scaled
//!   forward-backward, Baum-Welch re-estimation and log-space Viterbi decoding.
//! * [`trace`]: the event/evidence trace format and the sliding-window
//!   verification that turns raw traces into labelled observation sequences.
//! * [`sim`]: a seeded generator of synthetic trigger-action traces.
//! * [`analysis`]: longest-common-subsequence based crucial pair detection and
//!   accuracy scoring of decoded paths.

pub mod analysis;
pub mod error;
pub mod hmm;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
