//! State space, observation alphabet and observation sequences.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

fn check_identifier(kind: &'static str, value: &str) -> Result<()> {
    if value.is_empty() {
        return Err(Error::Argument(format!("{kind} must not be empty")));
    }
    if value.chars().any(char::is_whitespace) {
        return Err(Error::Argument(format!(
            "{kind} `{value}` must not contain whitespace"
        )));
    }
    Ok(())
}

/// Ordered, unique event labels. Index `i` is hidden state `i` of the model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl StateSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Dimension("state space needs at least one state".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            check_identifier("state label", label)?;
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    kind: "state label",
                    value: label.clone(),
                });
            }
        }
        Ok(Self { labels, index })
    }

    /// States named `x0 .. x{n-1}`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("x{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }
}

/// A canonical (sorted, deduplicated, non-empty) set of evidence identifiers.
///
/// This is one observation symbol: the physical evidence seen around an event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EvidenceSet(Vec<String>);

impl EvidenceSet {
    pub fn new<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = ids.into_iter().map(Into::into).collect();
        if set.is_empty() {
            return Err(Error::Empty("evidence set"));
        }
        for id in &set {
            check_identifier("evidence identifier", id)?;
        }
        Ok(Self(set.into_iter().collect()))
    }

    pub fn ids(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.binary_search_by(|probe| probe.as_str().cmp(id)).is_ok()
    }
}

impl fmt::Display for EvidenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(","))
    }
}

/// The K distinct observation symbols, plus the evidence universe of size M
/// they are drawn from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationAlphabet {
    symbols: Vec<EvidenceSet>,
    universe: Vec<String>,
    index: HashMap<EvidenceSet, usize>,
}

impl ObservationAlphabet {
    /// Builds an alphabet whose evidence universe is the union of its symbols.
    pub fn new(symbols: Vec<EvidenceSet>) -> Result<Self> {
        let universe: BTreeSet<String> = symbols
            .iter()
            .flat_map(|s| s.ids().iter().cloned())
            .collect();
        Self::with_universe(symbols, universe)
    }

    /// Builds an alphabet over an explicitly declared evidence universe.
    pub fn with_universe<I, S>(symbols: Vec<EvidenceSet>, universe: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if symbols.is_empty() {
            return Err(Error::Dimension("alphabet needs at least one symbol".into()));
        }
        let universe: BTreeSet<String> = universe.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(symbols.len());
        for (k, symbol) in symbols.iter().enumerate() {
            if let Some(id) = symbol.ids().iter().find(|id| !universe.contains(*id)) {
                return Err(Error::Argument(format!(
                    "evidence `{id}` in symbol {symbol} is not in the declared evidence universe"
                )));
            }
            if index.insert(symbol.clone(), k).is_some() {
                return Err(Error::Duplicate {
                    kind: "observation symbol",
                    value: symbol.to_string(),
                });
            }
        }
        Ok(Self {
            symbols,
            universe: universe.into_iter().collect(),
            index,
        })
    }

    /// Singleton symbols `{y0} .. {y(k-1)}`.
    pub fn numbered(k: usize) -> Result<Self> {
        let symbols = (0..k)
            .map(|i| EvidenceSet::new([format!("y{i}")]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }

    /// Number of symbols (K).
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[EvidenceSet] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> Option<&EvidenceSet> {
        self.symbols.get(index)
    }

    pub fn index_of(&self, symbol: &EvidenceSet) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    /// Sorted evidence identifiers; its length is M.
    pub fn evidence_universe(&self) -> &[String] {
        &self.universe
    }
}

/// A non-empty, time-ordered list of alphabet indices `Y_1 .. Y_T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservationSequence(Vec<usize>);

impl ObservationSequence {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("observation sequence"));
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// Sequence length T.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Fails on the first index that is not below `alphabet_size`.
    pub fn check_alphabet(&self, alphabet_size: usize) -> Result<()> {
        match self.0.iter().position(|&y| y >= alphabet_size) {
            Some(position) => Err(Error::Alphabet {
                index: self.0[position],
                position,
                size: alphabet_size,
            }),
            None => Ok(()),
        }
    }
}
