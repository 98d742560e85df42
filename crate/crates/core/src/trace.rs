//! Event/evidence traces and sliding-window verification.
//!
//! A trace file holds one record per line:
//!
//! ```text
//! # comment
//! E 1000 door-opened
//! S 1100 door-vibration
//! ```
//!
//! `E` lines are device events (the hidden truth), `S` lines are sensor
//! evidence. An event at `t` is *verified* when evidence arrives in the closed
//! window `[t, t + w]`; the set of evidence ids seen there becomes its
//! observation symbol. Unverified events are dropped and counted.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::hmm::{EvidenceSet, ObservationAlphabet, ObservationSequence, StateSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRecord {
    pub timestamp_ms: u64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceRecord {
    pub timestamp_ms: u64,
    pub evidence_id: String,
}

/// Parsed trace; both lists are sorted by timestamp, ties kept in file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<EventRecord>,
    pub evidence: Vec<EvidenceRecord>,
}

pub fn parse_trace<R: BufRead>(input: R) -> Result<Trace> {
    let mut trace = Trace::default();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                line_no,
                format!("expected `<kind> <timestamp_ms> <id>`, found `{line}`"),
            ));
        }
        let timestamp_ms: u64 = fields[1].parse().map_err(|_| {
            Error::parse(line_no, format!("non-numeric timestamp `{}`", fields[1]))
        })?;
        let id = fields[2];
        if id.is_empty() {
            return Err(Error::parse(line_no, "empty identifier"));
        }
        match fields[0] {
            "E" => trace.events.push(EventRecord {
                timestamp_ms,
                label: id.to_string(),
            }),
            "S" => trace.evidence.push(EvidenceRecord {
                timestamp_ms,
                evidence_id: id.to_string(),
            }),
            other => {
                return Err(Error::parse(line_no, format!("unknown record kind `{other}`")));
            }
        }
    }
    trace.events.sort_by_key(|e| e.timestamp_ms);
    trace.evidence.sort_by_key(|e| e.timestamp_ms);
    Ok(trace)
}

pub fn parse_trace_str(text: &str) -> Result<Trace> {
    parse_trace(text.as_bytes())
}

/// Writes records merged by timestamp; at equal timestamps events precede
/// evidence and each kind keeps its input order.
pub fn write_trace<W: Write>(
    events: &[EventRecord],
    evidence: &[EvidenceRecord],
    mut out: W,
) -> Result<()> {
    let mut e = events.iter().peekable();
    let mut s = evidence.iter().peekable();
    loop {
        let take_event = match (e.peek(), s.peek()) {
            (Some(ev), Some(sv)) => ev.timestamp_ms <= sv.timestamp_ms,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        if take_event {
            let ev = e.next().expect("peeked");
            writeln!(out, "E {} {}", ev.timestamp_ms, ev.label)?;
        } else {
            let sv = s.next().expect("peeked");
            writeln!(out, "S {} {}", sv.timestamp_ms, sv.evidence_id)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowConfig {
    window_ms: u64,
}

impl WindowConfig {
    pub fn new(window_ms: u64) -> Result<Self> {
        if window_ms == 0 {
            return Err(Error::Argument("window must be positive".into()));
        }
        Ok(Self { window_ms })
    }

    pub fn window_ms(&self) -> u64 {
        self.window_ms
    }
}

/// Per-label evidence that must all be present for an event to verify.
///
/// File format: one `<event-label>: <evidence-id> [<evidence-id> ...]` per
/// line. Labels not listed fall back to "any evidence in the window".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerificationMap {
    required: HashMap<String, BTreeSet<String>>,
}

impl VerificationMap {
    pub fn parse<R: BufRead>(input: R) -> Result<Self> {
        let mut required = HashMap::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, ids) = line
                .split_once(':')
                .ok_or_else(|| Error::parse(i + 1, "expected `<event-label>: <evidence-id> ...`"))?;
            let label = label.trim();
            let ids: BTreeSet<String> = ids.split_whitespace().map(str::to_string).collect();
            if label.is_empty() || label.contains(char::is_whitespace) {
                return Err(Error::parse(i + 1, format!("invalid event label `{label}`")));
            }
            if ids.is_empty() {
                return Err(Error::parse(i + 1, format!("no evidence listed for `{label}`")));
            }
            if required.insert(label.to_string(), ids).is_some() {
                return Err(Error::parse(i + 1, format!("`{label}` listed twice")));
            }
        }
        Ok(Self { required })
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::parse(text.as_bytes())
    }

    pub fn required(&self, label: &str) -> Option<&BTreeSet<String>> {
        self.required.get(label)
    }

    fn accepts(&self, label: &str, seen: &BTreeSet<&str>) -> bool {
        match self.required.get(label) {
            Some(ids) => ids.iter().all(|id| seen.contains(id.as_str())),
            None => !seen.is_empty(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiedEntry {
    pub timestamp_ms: u64,
    pub label: String,
    pub symbol: EvidenceSet,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifiedSequence {
    pub entries: Vec<VerifiedEntry>,
    pub discarded_count: usize,
}

impl VerifiedSequence {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// First `len` entries (all of them if there are fewer).
    pub fn truncated(&self, len: usize) -> VerifiedSequence {
        VerifiedSequence {
            entries: self.entries.iter().take(len).cloned().collect(),
            discarded_count: self.discarded_count,
        }
    }

    pub fn labels(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.label.as_str()).collect()
    }
}

pub fn extract_verified(
    events: &[EventRecord],
    evidence: &[EvidenceRecord],
    cfg: WindowConfig,
) -> VerifiedSequence {
    extract_verified_with(events, evidence, cfg, None)
}

/// Sliding-window verification, optionally tightened by a [`VerificationMap`].
///
/// Evidence is not consumed: one record may verify several overlapping events.
pub fn extract_verified_with(
    events: &[EventRecord],
    evidence: &[EvidenceRecord],
    cfg: WindowConfig,
    map: Option<&VerificationMap>,
) -> VerifiedSequence {
    debug_assert!(evidence.windows(2).all(|w| w[0].timestamp_ms <= w[1].timestamp_ms));
    let mut out = VerifiedSequence::default();
    for event in events {
        let start = event.timestamp_ms;
        let end = start.saturating_add(cfg.window_ms);
        let first = evidence.partition_point(|s| s.timestamp_ms < start);
        let seen: BTreeSet<&str> = evidence[first..]
            .iter()
            .take_while(|s| s.timestamp_ms <= end)
            .map(|s| s.evidence_id.as_str())
            .collect();
        let verified = match map {
            Some(map) => map.accepts(&event.label, &seen),
            None => !seen.is_empty(),
        };
        if !verified {
            out.discarded_count += 1;
            continue;
        }
        let symbol = EvidenceSet::new(seen).expect("non-empty set of parsed identifiers");
        out.entries.push(VerifiedEntry {
            timestamp_ms: event.timestamp_ms,
            label: event.label.clone(),
            symbol,
        });
    }
    out
}

/// A verified sequence encoded for the HMM.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSequence {
    pub alphabet: ObservationAlphabet,
    pub observations: ObservationSequence,
    pub states: StateSpace,
    /// Ground-truth state index per observation.
    pub truth: Vec<usize>,
}

impl EncodedSequence {
    /// Unique observation symbols per unique state (K / N).
    pub fn obs_state_ratio(&self) -> f64 {
        self.alphabet.len() as f64 / self.states.len() as f64
    }
}

/// Assigns symbol and state indices in order of first appearance.
pub fn build_alphabet(seq: &VerifiedSequence) -> Result<EncodedSequence> {
    if seq.is_empty() {
        return Err(Error::Empty("verified sequence"));
    }
    let mut symbols: Vec<EvidenceSet> = Vec::new();
    let mut symbol_index: HashMap<&EvidenceSet, usize> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut label_index: HashMap<&str, usize> = HashMap::new();
    let mut observations = Vec::with_capacity(seq.len());
    let mut truth = Vec::with_capacity(seq.len());
    for entry in &seq.entries {
        let y = *symbol_index.entry(&entry.symbol).or_insert_with(|| {
            symbols.push(entry.symbol.clone());
            symbols.len() - 1
        });
        let x = *label_index.entry(entry.label.as_str()).or_insert_with(|| {
            labels.push(entry.label.clone());
            labels.len() - 1
        });
        observations.push(y);
        truth.push(x);
    }
    Ok(EncodedSequence {
        alphabet: ObservationAlphabet::new(symbols)?,
        observations: ObservationSequence::new(observations)?,
        states: StateSpace::new(labels)?,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: u64, label: &str) -> EventRecord {
        EventRecord {
            timestamp_ms: t,
            label: label.into(),
        }
    }

    fn sv(t: u64, id: &str) -> EvidenceRecord {
        EvidenceRecord {
            timestamp_ms: t,
            evidence_id: id.into(),
        }
    }

    fn w(ms: u64) -> WindowConfig {
        WindowConfig::new(ms).unwrap()
    }

    fn entry(label: &str, ids: &[&str]) -> VerifiedEntry {
        VerifiedEntry {
            timestamp_ms: 0,
            label: label.into(),
            symbol: EvidenceSet::new(ids.iter().copied()).unwrap(),
        }
    }

    #[test]
    fn parses_single_event() {
        let trace = parse_trace_str("E 1000 door-opened\n").unwrap();
        assert_eq!(trace.events, vec![ev(1000, "door-opened")]);
        assert!(trace.evidence.is_empty());
    }

    #[test]
    fn empty_input_gives_empty_lists() {
        assert_eq!(parse_trace_str("").unwrap(), Trace::default());
        assert_eq!(parse_trace_str("# only a comment\n\n").unwrap(), Trace::default());
    }

    #[test]
    fn records_are_sorted_stably() {
        let trace = parse_trace_str("E 30 c\nS 5 x\nE 10 a\nE 10 b\r\nS 1 y\n").unwrap();
        assert_eq!(trace.events, vec![ev(10, "a"), ev(10, "b"), ev(30, "c")]);
        assert_eq!(trace.evidence, vec![sv(1, "y"), sv(5, "x")]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let cases = [
            ("E 1 a\nX 2 b\n", 2, "unknown record kind"),
            ("# c\nE abc a\n", 2, "non-numeric timestamp"),
            ("E -5 a\n", 1, "non-numeric timestamp"),
            ("S 10 \n", 1, "empty identifier"),
            ("E 10  a\n", 1, "expected"),
            ("E 10\n", 1, "expected"),
        ];
        for (input, line, needle) in cases {
            match parse_trace_str(input) {
                Err(Error::Parse { line: l, message }) => {
                    assert_eq!(l, line, "{input:?}");
                    assert!(message.contains(needle), "{message}");
                }
                other => panic!("{input:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn write_then_parse_round_trips() {
        let events = vec![ev(0, "a"), ev(100, "b")];
        let evidence = vec![sv(0, "x"), sv(50, "y"), sv(100, "z")];
        let mut buf = Vec::new();
        write_trace(&events, &evidence, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "E 0 a\nS 0 x\nS 50 y\nE 100 b\nS 100 z\n");
        let trace = parse_trace_str(&text).unwrap();
        assert_eq!(trace.events, events);
        assert_eq!(trace.evidence, evidence);
    }

    #[test]
    fn window_end_is_inclusive() {
        let seq = extract_verified(&[ev(1000, "event")], &[sv(1100, "vib")], w(105));
        assert_eq!(seq.entries, vec![VerifiedEntry { timestamp_ms: 1000, ..entry("event", &["vib"]) }]);
        let seq = extract_verified(&[ev(1000, "event")], &[sv(1105, "vib")], w(105));
        assert_eq!(seq.len(), 1);
    }

    #[test]
    fn late_evidence_discards_the_event() {
        let seq = extract_verified(&[ev(1000, "event")], &[sv(1200, "vib")], w(105));
        assert!(seq.is_empty());
        assert_eq!(seq.discarded_count, 1);
    }

    #[test]
    fn evidence_before_the_event_does_not_count() {
        let seq = extract_verified(&[ev(1000, "event")], &[sv(999, "vib")], w(105));
        assert_eq!(seq.discarded_count, 1);
    }

    #[test]
    fn symbol_is_a_canonical_set() {
        let seq = extract_verified(
            &[ev(1000, "event")],
            &[sv(1010, "b"), sv(1020, "a"), sv(1030, "b")],
            w(105),
        );
        assert_eq!(seq.entries[0].symbol.ids(), ["a", "b"]);
    }

    #[test]
    fn evidence_is_shared_between_overlapping_events() {
        let seq = extract_verified(&[ev(0, "a"), ev(50, "b")], &[sv(60, "x")], w(105));
        assert_eq!(seq.labels(), ["a", "b"]);
    }

    #[test]
    fn verification_map_requires_all_listed_ids() {
        let map = VerificationMap::parse_str("# map\ndoor: vib click\n").unwrap();
        let events = [ev(0, "door"), ev(1000, "door"), ev(2000, "light")];
        let evidence = [sv(10, "vib"), sv(1010, "vib"), sv(1020, "click"), sv(2010, "lux")];
        let seq = extract_verified_with(&events, &evidence, w(105), Some(&map));
        assert_eq!(seq.labels(), ["door", "light"]);
        assert_eq!(seq.entries[0].timestamp_ms, 1000);
        assert_eq!(seq.discarded_count, 1);
    }

    #[test]
    fn verification_map_rejects_bad_lines() {
        assert!(VerificationMap::parse_str("door vib\n").is_err());
        assert!(VerificationMap::parse_str("door:\n").is_err());
        assert!(VerificationMap::parse_str("a: x\na: y\n").is_err());
    }

    #[test]
    fn alphabet_uses_first_appearance_order() {
        let seq = VerifiedSequence {
            entries: vec![entry("A", &["p"]), entry("B", &["q"]), entry("A", &["p"])],
            discarded_count: 0,
        };
        let enc = build_alphabet(&seq).unwrap();
        assert_eq!(enc.alphabet.symbols(), [EvidenceSet::new(["p"]).unwrap(), EvidenceSet::new(["q"]).unwrap()]);
        assert_eq!(enc.observations.indices(), [0, 1, 0]);
        assert_eq!(enc.states.labels(), ["A", "B"]);
        assert_eq!(enc.truth, [0, 1, 0]);
    }

    #[test]
    fn single_entry_alphabet() {
        let seq = VerifiedSequence {
            entries: vec![entry("A", &["p"])],
            discarded_count: 3,
        };
        let enc = build_alphabet(&seq).unwrap();
        assert_eq!((enc.alphabet.len(), enc.states.len()), (1, 1));
        assert_eq!(enc.observations.indices(), [0]);
    }

    #[test]
    fn reordered_sets_merge() {
        let seq = VerifiedSequence {
            entries: vec![entry("A", &["p", "q"]), entry("B", &["q", "p"])],
            discarded_count: 0,
        };
        let enc = build_alphabet(&seq).unwrap();
        assert_eq!(enc.alphabet.len(), 1);
        assert_eq!(enc.obs_state_ratio(), 0.5);
    }

    #[test]
    fn empty_sequence_is_rejected() {
        assert!(matches!(
            build_alphabet(&VerifiedSequence::default()),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn zero_window_is_rejected() {
        assert!(WindowConfig::new(0).is_err());
    }
}
