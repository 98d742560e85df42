//! Crucial pair detection and accuracy scoring.
//!
//! Given the configured chain `X` and several decoded attack paths, each path
//! is reduced to its longest common subsequence with `X`; every adjacent pair
//! of that subsequence scores one point. The highest-scoring pairs are the
//! transitions an attacker keeps traversing.

use indexmap::IndexMap;
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{Error, Result};

/// A longest common subsequence of `a` and `b`.
///
/// When several exist, the traceback walks from the end and, whenever
/// skipping an element of either side keeps the length, skips the element
/// of `b`. So `lcs([d,l,c,f,w], [d,l,c,w,f])` is `[d,l,c,w]`, not `[d,l,c,f]`.
pub fn lcs<T: PartialEq + Clone>(a: &[T], b: &[T]) -> Vec<T> {
    let (m, n) = (a.len(), b.len());
    let width = n + 1;
    let mut dp = vec![0usize; (m + 1) * width];
    for i in 1..=m {
        for j in 1..=n {
            dp[i * width + j] = if a[i - 1] == b[j - 1] {
                dp[(i - 1) * width + j - 1] + 1
            } else {
                dp[(i - 1) * width + j].max(dp[i * width + j - 1])
            };
        }
    }

    let mut out = Vec::with_capacity(dp[m * width + n]);
    let (mut i, mut j) = (m, n);
    while i > 0 && j > 0 {
        if a[i - 1] == b[j - 1] {
            out.push(a[i - 1].clone());
            i -= 1;
            j -= 1;
        } else if dp[i * width + j - 1] >= dp[(i - 1) * width + j] {
            j -= 1;
        } else {
            i -= 1;
        }
    }
    out.reverse();
    out
}

/// Occurrence counts of adjacent `(from, to)` pairs across LCS subsequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreTable {
    original: Vec<String>,
    counts: IndexMap<(String, String), usize>,
}

impl ScoreTable {
    pub fn original(&self) -> &[String] {
        &self.original
    }

    pub fn count(&self, from: &str, to: &str) -> usize {
        self.counts
            .get(&(from.to_string(), to.to_string()))
            .copied()
            .unwrap_or(0)
    }

    /// Pairs in the order they were first scored.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, usize)> {
        self.counts
            .iter()
            .map(|((a, b), &c)| (a.as_str(), b.as_str(), c))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Scores every extracted sequence against `original`.
///
/// A pair repeated inside one subsequence counts once per occurrence.
pub fn score_pairs<S: AsRef<str>>(original: &[S], extracted: &[Vec<S>]) -> Result<ScoreTable> {
    if original.is_empty() {
        return Err(Error::Argument("original chain is empty".into()));
    }
    let original: Vec<String> = original.iter().map(|s| s.as_ref().to_string()).collect();
    let mut counts = IndexMap::new();
    for path in extracted {
        let path: Vec<String> = path.iter().map(|s| s.as_ref().to_string()).collect();
        let common = lcs(&original, &path);
        for w in common.windows(2) {
            *counts.entry((w[0].clone(), w[1].clone())).or_insert(0) += 1;
        }
    }
    Ok(ScoreTable { original, counts })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrucialResult {
    pub pairs: Vec<(String, String)>,
    pub max_count: usize,
}

/// All pairs tied at the top score, ordered by where they first appear in
/// the original chain.
pub fn crucial_pairs(table: &ScoreTable) -> Result<CrucialResult> {
    let max_count = table
        .counts
        .values()
        .copied()
        .max()
        .ok_or(Error::Empty("score table"))?;
    let position = |label: &str| {
        table
            .original
            .iter()
            .position(|o| o == label)
            .unwrap_or(usize::MAX)
    };
    let mut pairs: Vec<(String, String)> = table
        .counts
        .iter()
        .filter(|(_, &c)| c == max_count)
        .map(|(pair, _)| pair.clone())
        .collect();
    pairs.sort_by_key(|(a, b)| (position(a), position(b)));
    Ok(CrucialResult { pairs, max_count })
}

/// Micro-averaged F1 of a decoded state sequence against the truth, position
/// by position.
///
/// For each label, a position counts as a true positive when both sequences
/// hold it, a false positive when only `decoded` does and a false negative
/// when only `truth` does. With equal lengths this equals plain accuracy.
pub fn f_score(truth: &[usize], decoded: &[usize]) -> Result<f64> {
    if truth.len() != decoded.len() {
        return Err(Error::Dimension(format!(
            "truth has {} entries but decoded has {}",
            truth.len(),
            decoded.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Empty("state sequence"));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (t, d) in truth.iter().zip(decoded) {
        if t == d {
            tp += 1;
        } else {
            fp += 1;
            fn_ += 1;
        }
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
}

/// One-to-one assignment of hidden states to event labels that maximises
/// positional agreement between `decoded` and `truth`.
///
/// Baum-Welch learns hidden states in no particular order; this names each
/// learned state after the logged event it coincides with most. Returns
/// `mapping` with `mapping[state] = label index`. Both sequences index into
/// `0..n_states`.
pub fn align_states(truth: &[usize], decoded: &[usize], n_states: usize) -> Result<Vec<usize>> {
    if truth.len() != decoded.len() {
        return Err(Error::Dimension(format!(
            "truth has {} entries but decoded has {}",
            truth.len(),
            decoded.len()
        )));
    }
    if n_states == 0 {
        return Err(Error::Dimension("no states to align".into()));
    }
    if let Some(&bad) = truth.iter().chain(decoded).find(|&&s| s >= n_states) {
        return Err(Error::Dimension(format!(
            "state {bad} out of range for {n_states} states"
        )));
    }
    let mut agreement = Matrix::new(n_states, n_states, 0i64);
    for (&t, &d) in truth.iter().zip(decoded) {
        agreement[(d, t)] += 1;
    }
    let (_, mapping) = kuhn_munkres(&agreement);
    Ok(mapping)
}

/// Applies a mapping produced by [`align_states`].
pub fn relabel(decoded: &[usize], mapping: &[usize]) -> Vec<usize> {
    decoded.iter().map(|&s| mapping[s]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn lcs_basics() {
        assert_eq!(lcs(&v(&["p", "q", "r"]), &v(&["p", "q", "r"])), v(&["p", "q", "r"]));
        assert!(lcs(&v(&["p", "q"]), &v(&["r", "s"])).is_empty());
        assert!(lcs::<String>(&[], &v(&["a"])).is_empty());
    }

    #[test]
    fn lcs_tie_drops_from_the_second_argument() {
        let x = v(&["d", "l", "c", "f", "w"]);
        assert_eq!(lcs(&x, &v(&["d", "l", "c", "w", "f"])), v(&["d", "l", "c", "w"]));
    }

    #[test]
    fn identical_extraction_scores_each_pair_once() {
        let x = v(&["a", "b", "c", "d"]);
        let table = score_pairs(&x, std::slice::from_ref(&x)).unwrap();
        assert_eq!(table.len(), 3);
        assert!(table.iter().all(|(_, _, c)| c == 1));
        let result = crucial_pairs(&table).unwrap();
        assert_eq!(result.max_count, 1);
        assert_eq!(result.pairs.len(), 3);
        assert_eq!(result.pairs[0], ("a".to_string(), "b".to_string()));
    }

    #[test]
    fn no_extractions_give_an_empty_table() {
        let table = score_pairs(&v(&["a", "b"]), &[]).unwrap();
        assert!(table.is_empty());
        assert!(matches!(crucial_pairs(&table), Err(Error::Empty(_))));
    }

    #[test]
    fn short_subsequences_contribute_nothing() {
        let table = score_pairs(&v(&["a", "b"]), &[v(&["b"]), v(&["z", "q"])]).unwrap();
        assert!(table.is_empty());
    }

    #[test]
    fn empty_original_is_an_error() {
        assert!(matches!(
            score_pairs::<String>(&[], &[]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn unique_and_tied_maxima() {
        let x = v(&["a", "b", "c"]);
        let table = score_pairs(&x, &[v(&["a", "b"]), v(&["a", "b"]), v(&["a", "b", "c"])]).unwrap();
        assert_eq!(table.count("a", "b"), 3);
        assert_eq!(table.count("b", "c"), 1);
        let result = crucial_pairs(&table).unwrap();
        assert_eq!(result.pairs, vec![("a".into(), "b".into())]);
        assert_eq!(result.max_count, 3);

        let table = score_pairs(&x, &[v(&["a", "b", "c"]), v(&["a", "b", "c"])]).unwrap();
        let result = crucial_pairs(&table).unwrap();
        assert_eq!(result.max_count, 2);
        assert_eq!(
            result.pairs,
            vec![("a".into(), "b".into()), ("b".into(), "c".into())]
        );
    }

    #[test]
    fn tied_pairs_follow_chain_order() {
        let x = v(&["a", "b", "c", "d"]);
        // (c,d) is scored first but (a,b) comes first in the chain.
        let table = score_pairs(&x, &[v(&["c", "d"]), v(&["a", "b"])]).unwrap();
        let result = crucial_pairs(&table).unwrap();
        assert_eq!(result.pairs[0].0, "a");
    }

    #[test]
    fn f_score_cases() {
        assert_eq!(f_score(&[0, 1, 2], &[0, 1, 2]).unwrap(), 1.0);
        assert_eq!(f_score(&[0, 1, 0], &[1, 0, 1]).unwrap(), 0.0);
        assert_eq!(f_score(&[0, 1, 0, 1], &[0, 1, 1, 1]).unwrap(), 0.75);
        assert!(matches!(f_score(&[0], &[0, 1]), Err(Error::Dimension(_))));
        assert!(matches!(f_score(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn alignment_recovers_a_permutation() {
        let truth = [0, 1, 2, 0, 1, 2];
        let decoded = [2, 0, 1, 2, 0, 1];
        let mapping = align_states(&truth, &decoded, 3).unwrap();
        assert_eq!(mapping, vec![1, 2, 0]);
        assert_eq!(relabel(&decoded, &mapping), truth);
    }

    #[test]
    fn alignment_is_one_to_one() {
        // Decoded collapses everything into state 0; only one label may claim it.
        let truth = [0, 1, 1, 1];
        let decoded = [0, 0, 0, 0];
        let mapping = align_states(&truth, &decoded, 2).unwrap();
        assert_eq!(mapping, vec![1, 0]);
        assert_eq!(f_score(&truth, &relabel(&decoded, &mapping)).unwrap(), 0.75);
    }

    #[test]
    fn alignment_rejects_bad_input() {
        assert!(align_states(&[0, 1], &[0], 2).is_err());
        assert!(align_states(&[0, 2], &[0, 1], 2).is_err());
    }
}
