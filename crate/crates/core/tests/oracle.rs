//! Forward-backward, posteriors and Viterbi against brute-force enumeration
//! of every hidden path.

use chainwatch_core::hmm::{
    baum_welch_step, forward_backward, init_model, posteriors, viterbi, HmmModel,
    ObservationAlphabet, ObservationSequence, StateSpace,
};
use chainwatch_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every path as (states, joint probability, joint log-probability).
fn enumerate(model: &HmmModel, obs: &[usize]) -> Vec<(Vec<usize>, f64, f64)> {
    let n = model.n_states();
    let (s, q, e) = (model.initial(), model.transition(), model.emission());
    let total = n.pow(obs.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut path = vec![0; obs.len()];
            for slot in path.iter_mut().rev() {
                *slot = code % n;
                code /= n;
            }
            let mut p = s[path[0]] * e[[path[0], obs[0]]];
            let mut lp = s[path[0]].ln() + e[[path[0], obs[0]]].ln();
            for t in 1..obs.len() {
                p *= q[[path[t - 1], path[t]]] * e[[path[t], obs[t]]];
                lp += q[[path[t - 1], path[t]]].ln() + e[[path[t], obs[t]]].ln();
            }
            (path, p, lp)
        })
        .collect()
}

/// Rows of small integer weights, so exact ties and zeros are common.
fn quantized_rows(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| loop {
            let w: Vec<f64> = (0..cols).map(|_| rng.random_range(0..3) as f64).collect();
            let sum: f64 = w.iter().sum();
            if sum > 0.0 {
                break w.iter().map(|x| x / sum).collect();
            }
        })
        .collect()
}

fn model_for(seed: u64, n: usize, k: usize, quantized: bool) -> HmmModel {
    let states = StateSpace::numbered(n).unwrap();
    let alphabet = ObservationAlphabet::numbered(k).unwrap();
    if !quantized {
        return init_model(states, alphabet, seed).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = quantized_rows(&mut rng, 1, n).remove(0);
    let transition = quantized_rows(&mut rng, n, n);
    let emission = quantized_rows(&mut rng, n, k);
    HmmModel::from_rows(states, alphabet, initial, transition, emission).unwrap()
}

fn instance() -> impl Strategy<Value = (HmmModel, Vec<usize>)> {
    (1usize..=4, 1usize..=4, 1usize..=6, any::<u64>(), any::<bool>()).prop_flat_map(
        |(n, k, t, seed, quantized)| {
            let model = model_for(seed, n, k, quantized);
            (Just(model), prop::collection::vec(0..k, t))
        },
    )
}

fn reverse_lex_min(paths: &[&Vec<usize>]) -> Vec<usize> {
    paths
        .iter()
        .min_by(|a, b| a.iter().rev().cmp(b.iter().rev()))
        .map(|p| p.to_vec())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn likelihood_matches_enumeration((model, y) in instance()) {
        let obs = ObservationSequence::new(y.clone()).unwrap();
        let paths = enumerate(&model, &y);
        let total: f64 = paths.iter().map(|p| p.1).sum();
        match forward_backward(&model, &obs) {
            Ok(tables) => {
                let rel = (tables.log_likelihood.exp() - total).abs() / total;
                prop_assert!(rel < 1e-10, "relative error {rel}");
            }
            Err(Error::ZeroLikelihood { .. }) => prop_assert_eq!(total, 0.0),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn posteriors_match_enumeration((model, y) in instance()) {
        let obs = ObservationSequence::new(y.clone()).unwrap();
        let Ok(tables) = forward_backward(&model, &obs) else {
            return Ok(());
        };
        let post = posteriors(&model, &obs, &tables).unwrap();
        let paths = enumerate(&model, &y);
        let total: f64 = paths.iter().map(|p| p.1).sum();
        let n = model.n_states();
        for t in 0..y.len() {
            for i in 0..n {
                let mass: f64 = paths.iter().filter(|p| p.0[t] == i).map(|p| p.1).sum();
                prop_assert!((post.gamma[[t, i]] - mass / total).abs() < 1e-10);
            }
        }
        for t in 0..y.len().saturating_sub(1) {
            for i in 0..n {
                let mut row = 0.0;
                for j in 0..n {
                    let mass: f64 = paths
                        .iter()
                        .filter(|p| p.0[t] == i && p.0[t + 1] == j)
                        .map(|p| p.1)
                        .sum();
                    prop_assert!((post.xi[[t, i, j]] - mass / total).abs() < 1e-10);
                    row += post.xi[[t, i, j]];
                }
                prop_assert!((row - post.gamma[[t, i]]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn viterbi_matches_enumeration((model, y) in instance()) {
        let obs = ObservationSequence::new(y.clone()).unwrap();
        let decoded = viterbi(&model, &obs).unwrap();
        let paths = enumerate(&model, &y);
        let best = paths.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
        if best == f64::NEG_INFINITY {
            prop_assert!(decoded.impossible);
            prop_assert_eq!(decoded.log_probability, f64::NEG_INFINITY);
            prop_assert!(decoded.states.iter().all(|&s| s == 0));
            return Ok(());
        }
        let tied: Vec<&Vec<usize>> = paths
            .iter()
            .filter(|p| p.2 >= best - 1e-12)
            .map(|p| &p.0)
            .collect();
        prop_assert_eq!(&decoded.states, &reverse_lex_min(&tied));
        prop_assert!((decoded.log_probability - best).abs() < 1e-10);
        prop_assert!(!decoded.impossible);
    }
}

fn two_state() -> HmmModel {
    HmmModel::from_rows(
        StateSpace::numbered(2).unwrap(),
        ObservationAlphabet::numbered(2).unwrap(),
        vec![0.5, 0.5],
        vec![vec![0.9, 0.1], vec![0.2, 0.8]],
        vec![vec![0.7, 0.3], vec![0.4, 0.6]],
    )
    .unwrap()
}

#[test]
fn two_state_likelihood_by_hand() {
    let model = two_state();
    let obs = ObservationSequence::new(vec![0, 1]).unwrap();
    let by_hand: f64 = 0.5 * 0.7 * (0.9 * 0.3 + 0.1 * 0.6) + 0.5 * 0.4 * (0.2 * 0.3 + 0.8 * 0.6);
    let ll = forward_backward(&model, &obs).unwrap().log_likelihood;
    assert!((ll - by_hand.ln()).abs() < 1e-12);
}

#[test]
fn two_state_reestimated_transition() {
    let model = two_state();
    let y = [0, 1, 0];
    let obs = ObservationSequence::new(y.to_vec()).unwrap();
    let paths = enumerate(&model, &y);
    let total: f64 = paths.iter().map(|p| p.1).sum();
    let (mut num, mut den) = (0.0, 0.0);
    for t in 0..2 {
        num += paths.iter().filter(|p| p.0[t] == 0 && p.0[t + 1] == 1).map(|p| p.1).sum::<f64>() / total;
        den += paths.iter().filter(|p| p.0[t] == 0).map(|p| p.1).sum::<f64>() / total;
    }
    let (next, _) = baum_welch_step(&model, &obs).unwrap();
    assert!((next.transition()[[0, 1]] - num / den).abs() < 1e-12);
}

#[test]
fn two_state_viterbi_over_eight_paths() {
    let model = two_state();
    let y = [0, 0, 1];
    let paths = enumerate(&model, &y);
    let best = paths.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let decoded = viterbi(&model, &ObservationSequence::new(y.to_vec()).unwrap()).unwrap();
    assert_eq!(decoded.states, best.0);
}
