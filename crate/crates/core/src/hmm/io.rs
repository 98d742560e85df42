//! Plain-text model files.
//!
//! ```text
//! hmm-model v1
//! evidence lux vib
//! states 2
//! state door-opened
//! state light-on
//! symbols 2
//! symbol vib
//! symbol lux vib
//! initial 5.0000000000000000e-1 5.0000000000000000e-1
//! transition
//! 9.0000000000000000e-1 1.0000000000000000e-1
//! 2.0000000000000000e-1 8.0000000000000000e-1
//! emission
//! 7.0000000000000000e-1 3.0000000000000000e-1
//! 4.0000000000000000e-1 6.0000000000000000e-1
//! ```
//!
//! Numbers carry 17 significant digits, which round-trips every `f64` exactly.
//! Blank lines and lines starting with `#` are ignored on load.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};

use super::alphabet::{EvidenceSet, ObservationAlphabet, StateSpace};
use super::model::HmmModel;
use crate::error::{Error, Result};

const MAGIC: &str = "hmm-model v1";

pub fn write_model<W: Write>(model: &HmmModel, mut out: W) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    let universe = model.alphabet().evidence_universe();
    if universe.is_empty() {
        writeln!(out, "evidence")?;
    } else {
        writeln!(out, "evidence {}", universe.join(" "))?;
    }
    writeln!(out, "states {}", model.n_states())?;
    for label in model.states().labels() {
        writeln!(out, "state {label}")?;
    }
    writeln!(out, "symbols {}", model.n_symbols())?;
    for symbol in model.alphabet().symbols() {
        writeln!(out, "symbol {}", symbol.ids().join(" "))?;
    }
    writeln!(out, "initial {}", format_row(model.initial().iter()))?;
    writeln!(out, "transition")?;
    for row in model.transition().rows() {
        writeln!(out, "{}", format_row(row.iter()))?;
    }
    writeln!(out, "emission")?;
    for row in model.emission().rows() {
        writeln!(out, "{}", format_row(row.iter()))?;
    }
    Ok(())
}

pub fn model_to_string(model: &HmmModel) -> String {
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("model text is UTF-8")
}

fn format_row<'a>(values: impl Iterator<Item = &'a f64>) -> String {
    values
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_content(&mut self) -> Result<(usize, String)> {
        for line in self.inner.by_ref() {
            self.line_no += 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok((self.line_no, trimmed.to_string()));
        }
        Err(Error::parse(self.line_no + 1, "unexpected end of model file"))
    }

    /// Next line, which must start with `keyword`; returns the remainder.
    fn keyed(&mut self, keyword: &str) -> Result<(usize, String)> {
        let (no, line) = self.next_content()?;
        let mut parts = line.splitn(2, ' ');
        if parts.next() != Some(keyword) {
            return Err(Error::parse(no, format!("expected `{keyword}`, found `{line}`")));
        }
        Ok((no, parts.next().unwrap_or("").trim().to_string()))
    }

    fn count(&mut self, keyword: &str) -> Result<usize> {
        let (no, rest) = self.keyed(keyword)?;
        rest.parse()
            .map_err(|_| Error::parse(no, format!("`{keyword}` needs a count, found `{rest}`")))
    }
}

fn parse_row(line_no: usize, text: &str, expected: usize) -> Result<Vec<f64>> {
    let values = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::parse(line_no, format!("invalid number `{tok}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::parse(
            line_no,
            format!("expected {expected} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

pub fn read_model<R: BufRead>(input: R) -> Result<HmmModel> {
    let mut lines = Lines {
        inner: input.lines(),
        line_no: 0,
    };
    let (no, header) = lines.next_content()?;
    if header != MAGIC {
        return Err(Error::parse(no, format!("expected `{MAGIC}` header")));
    }
    let (_, universe) = lines.keyed("evidence")?;
    let universe: Vec<String> = universe.split_whitespace().map(str::to_string).collect();

    let n = lines.count("states")?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(lines.keyed("state")?.1);
    }
    let k = lines.count("symbols")?;
    let mut symbols = Vec::with_capacity(k);
    for _ in 0..k {
        let (no, ids) = lines.keyed("symbol")?;
        let set = EvidenceSet::new(ids.split_whitespace())
            .map_err(|e| Error::parse(no, e.to_string()))?;
        symbols.push(set);
    }
    let states = StateSpace::new(labels)?;
    let alphabet = ObservationAlphabet::with_universe(symbols, universe)?;

    let (no, initial) = lines.keyed("initial")?;
    let initial = Array1::from(parse_row(no, &initial, n)?);
    lines.keyed("transition")?;
    let mut transition = Vec::with_capacity(n * n);
    for _ in 0..n {
        let (no, row) = lines.next_content()?;
        transition.extend(parse_row(no, &row, n)?);
    }
    lines.keyed("emission")?;
    let mut emission = Vec::with_capacity(n * k);
    for _ in 0..n {
        let (no, row) = lines.next_content()?;
        emission.extend(parse_row(no, &row, k)?);
    }
    let transition = Array2::from_shape_vec((n, n), transition).expect("n*n values");
    let emission = Array2::from_shape_vec((n, k), emission).expect("n*k values");
    HmmModel::new(states, alphabet, initial, transition, emission)
}

pub fn model_from_str(text: &str) -> Result<HmmModel> {
    read_model(text.as_bytes())
}
