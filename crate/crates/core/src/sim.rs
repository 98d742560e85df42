//! Seeded generator of synthetic trigger-action traces.
//!
//! A [`ChainSpec`] describes a configured chain of device events, the physical
//! evidence each event leaves behind, optional ghost (injected) events, and a
//! background rate of spurious evidence. Specs are TOML documents:
//!
//! ```toml
//! seed = 7
//! inter_event_gap_ms = 1000
//! repetitions = 20
//! spurious_evidence_rate = 0.0
//! device_events = ["door-unlocked", "light-on"]
//!
//! [evidence]
//! door-unlocked = [{ id = "lock-actuator", delay_ms = 20, probability = 1.0 }]
//! light-on = [{ id = "lux-rise", delay_ms = 30, probability = 0.9 }]
//!
//! [[injections]]
//! before = 1
//! label = "ghost-thermostat"
//! probability = 0.5
//! ```

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{EventRecord, EvidenceRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceEmission {
    pub id: String,
    pub delay_ms: u64,
    pub probability: f64,
}

/// A ghost event inserted before chain position `before` (0 = before the
/// first event, `len` = after the last) with the given per-repetition
/// probability. Ghost events look exactly like real ones in the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub before: usize,
    pub label: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub device_events: Vec<String>,
    #[serde(default, rename = "evidence")]
    pub evidence_map: BTreeMap<String, Vec<EvidenceEmission>>,
    #[serde(default = "default_gap")]
    pub inter_event_gap_ms: u64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Probability that a given evidence id fires spuriously in a given
    /// millisecond.
    #[serde(default)]
    pub spurious_evidence_rate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub injections: Vec<Injection>,
}

fn default_gap() -> u64 {
    1000
}

fn default_repetitions() -> usize {
    1
}

/// The bundled smart-home scenario: unlocking the front door sets off motion
/// detection, home mode, the light, then coffee grinding and the window, and
/// finally the bedroom door.
pub const SMART_HOME_SPEC: &str = r#"# Smart-home trigger-action chain.
seed = 7
inter_event_gap_ms = 1000
repetitions = 20
spurious_evidence_rate = 0.0
device_events = [
    "front-door-unlocked",
    "motion-detected",
    "home-mode-activated",
    "light-on",
    "coffee-grinding",
    "window-opened",
    "bedroom-door-vibration",
]

[evidence]
front-door-unlocked = [{ id = "lock-actuator", delay_ms = 20, probability = 1.0 }]
motion-detected = [{ id = "pir-living-room", delay_ms = 40, probability = 1.0 }]
home-mode-activated = [{ id = "hub-chime", delay_ms = 60, probability = 1.0 }]
light-on = [{ id = "lux-rise", delay_ms = 30, probability = 1.0 }]
coffee-grinding = [{ id = "grinder-vibration", delay_ms = 80, probability = 1.0 }]
window-opened = [{ id = "window-contact", delay_ms = 50, probability = 1.0 }]
bedroom-door-vibration = [{ id = "door-accelerometer", delay_ms = 100, probability = 1.0 }]
"#;

impl ChainSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ChainSpec = toml::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("chain specs always serialise")
    }

    pub fn smart_home() -> Self {
        Self::from_toml(SMART_HOME_SPEC).expect("bundled spec is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.device_events.is_empty() {
            return Err(Error::Spec("device_events is empty".into()));
        }
        let labels = self
            .device_events
            .iter()
            .chain(self.injections.iter().map(|i| &i.label))
            .chain(self.evidence_map.keys());
        for label in labels {
            check_id("event label", label)?;
        }
        if self.inter_event_gap_ms == 0 {
            return Err(Error::Spec("inter_event_gap_ms must be positive".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Spec("repetitions must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.spurious_evidence_rate) {
            return Err(Error::Spec(format!(
                "spurious_evidence_rate {} is outside [0, 1)",
                self.spurious_evidence_rate
            )));
        }
        for (label, emissions) in &self.evidence_map {
            for e in emissions {
                check_id("evidence id", &e.id)?;
                check_probability(&format!("evidence `{}` of `{label}`", e.id), e.probability)?;
            }
        }
        for inj in &self.injections {
            if inj.before > self.device_events.len() {
                return Err(Error::Spec(format!(
                    "injection `{}` at position {} is past the end of a {}-event chain",
                    inj.label,
                    inj.before,
                    self.device_events.len()
                )));
            }
            check_probability(&format!("injection `{}`", inj.label), inj.probability)?;
        }
        Ok(())
    }

    /// Every evidence id that any event can emit.
    pub fn evidence_universe(&self) -> BTreeSet<&str> {
        self.evidence_map
            .values()
            .flatten()
            .map(|e| e.id.as_str())
            .collect()
    }
}

fn check_id(kind: &str, id: &str) -> Result<()> {
    if id.is_empty() || id.chars().any(char::is_whitespace) {
        return Err(Error::Spec(format!("invalid {kind} `{id}`")));
    }
    Ok(())
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Spec(format!("{what} has probability {p} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulatedTrace {
    pub events: Vec<EventRecord>,
    pub evidence: Vec<EvidenceRecord>,
    /// Label of every emitted event, in order.
    pub truth: Vec<String>,
}

impl SimulatedTrace {
    pub fn to_trace_text(&self) -> String {
        let mut buf = Vec::new();
        crate::trace::write_trace(&self.events, &self.evidence, &mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace text is UTF-8")
    }
}

/// Emits the chain `repetitions` times, one event every
/// `inter_event_gap_ms` starting at 0.
pub fn generate(spec: &ChainSpec) -> Result<SimulatedTrace> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = SimulatedTrace {
        events: Vec::new(),
        evidence: Vec::new(),
        truth: Vec::new(),
    };
    let mut clock = 0u64;
    let mut emit = |label: &str, rng: &mut ChaCha8Rng, out: &mut SimulatedTrace| {
        out.events.push(EventRecord {
            timestamp_ms: clock,
            label: label.to_string(),
        });
        out.truth.push(label.to_string());
        for e in spec.evidence_map.get(label).into_iter().flatten() {
            if rng.random::<f64>() < e.probability {
                out.evidence.push(EvidenceRecord {
                    timestamp_ms: clock + e.delay_ms,
                    evidence_id: e.id.clone(),
                });
            }
        }
        clock += spec.inter_event_gap_ms;
    };

    let chain_len = spec.device_events.len();
    for _ in 0..spec.repetitions {
        for pos in 0..=chain_len {
            for inj in spec.injections.iter().filter(|i| i.before == pos) {
                if rng.random::<f64>() < inj.probability {
                    emit(&inj.label, &mut rng, &mut out);
                }
            }
            if let Some(label) = spec.device_events.get(pos) {
                emit(label, &mut rng, &mut out);
            }
        }
    }

    if spec.spurious_evidence_rate > 0.0 {
        let horizon = out
            .evidence
            .iter()
            .map(|e| e.timestamp_ms)
            .chain(out.events.last().map(|e| e.timestamp_ms))
            .max()
            .unwrap_or(0);
        // Failures before the next success of a per-millisecond Bernoulli draw.
        let gaps = Geometric::new(spec.spurious_evidence_rate)
            .map_err(|e| Error::Spec(e.to_string()))?;
        for id in spec.evidence_universe() {
            let mut t = gaps.sample(&mut rng);
            while t <= horizon {
                out.evidence.push(EvidenceRecord {
                    timestamp_ms: t,
                    evidence_id: id.to_string(),
                });
                t = t.saturating_add(1).saturating_add(gaps.sample(&mut rng));
            }
        }
    }
    out.evidence.sort_by_key(|e| e.timestamp_ms);
    Ok(out)
}
