//! Labeled signal collections and the UCR-style text format.
//!
//! Each row is a label followed by the series values, separated by tabs or
//! commas. Rows may have different lengths. Trailing `NaN` padding, as used
//! by variable-length UCR archives, is stripped.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::signal::DiscreteSignal;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    signals: Vec<DiscreteSignal>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    /// Interns `labels` in order of first appearance.
    pub fn new(
        name: impl Into<String>,
        signals: Vec<DiscreteSignal>,
        labels: Vec<String>,
    ) -> Result<Self> {
        let mut ids = HashMap::new();
        let mut class_names = Vec::new();
        let labels = labels
            .into_iter()
            .map(|l| {
                *ids.entry(l.clone()).or_insert_with(|| {
                    class_names.push(l);
                    class_names.len() - 1
                })
            })
            .collect();
        Self::from_ids(name, signals, labels, class_names)
    }

    pub fn from_ids(
        name: impl Into<String>,
        signals: Vec<DiscreteSignal>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if signals.len() != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} signals but {} labels",
                signals.len(),
                labels.len()
            )));
        }
        if signals.is_empty() {
            return Err(Error::InvalidDataset("dataset is empty".into()));
        }
        if labels.iter().any(|&l| l >= class_names.len()) {
            return Err(Error::InvalidDataset(
                "label id without a class name".into(),
            ));
        }
        let (d, k) = (signals[0].pos_dim(), signals[0].val_dim());
        if signals.iter().any(|s| s.pos_dim() != d || s.val_dim() != k) {
            return Err(Error::InvalidDataset(
                "signals disagree on position or value dimension".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            signals,
            labels,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn signals(&self) -> &[DiscreteSignal] {
        &self.signals
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_name(&self, id: usize) -> &str {
        &self.class_names[id]
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn lifted_dim(&self) -> usize {
        self.signals[0].lifted_dim()
    }

    /// True when every signal has the same number of samples.
    pub fn is_equal_length(&self) -> bool {
        self.signals
            .iter()
            .all(|s| s.len() == self.signals[0].len())
    }

    /// Subset with the given indices, keeping the class table so label ids
    /// stay comparable with the parent.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::from_ids(
            self.name.clone(),
            indices.iter().map(|&i| self.signals[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.class_names.clone(),
        )
    }

    /// Hex SHA-256 over labels and the exact bits of every sample.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for (s, &l) in self.signals.iter().zip(&self.labels) {
            h.update(self.class_names[l].as_bytes());
            h.update([0u8]);
            h.update((s.len() as u64).to_le_bytes());
            h.update((s.pos_dim() as u64).to_le_bytes());
            h.update((s.val_dim() as u64).to_le_bytes());
            for v in s.positions_flat().iter().chain(s.values_flat()) {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

fn normalize_label(token: &str) -> String {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 => format!("{}", v as i64),
        _ => token.to_string(),
    }
}

/// Parses UCR-style text into one-channel signals on the grid
/// `i / (L - 1)`.
pub fn parse_ucr(text: &str, name: &str, path: &Path) -> Result<LabeledDataset> {
    let mut signals = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            msg,
        };
        let mut tokens: Vec<&str> = line.split(['\t', ',']).map(str::trim).collect();
        while tokens
            .last()
            .is_some_and(|t| t.is_empty() || t.eq_ignore_ascii_case("nan"))
        {
            tokens.pop();
        }
        if tokens.len() < 2 {
            return Err(err("row needs a label and at least one value".into()));
        }
        let values = tokens[1..]
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("bad value {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if tokens[0].is_empty() {
            return Err(err("empty label".into()));
        }
        labels.push(normalize_label(tokens[0]));
        signals.push(DiscreteSignal::from_series(&values).map_err(|e| err(e.to_string()))?);
    }
    if signals.is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: "file has no rows".into(),
        });
    }
    LabeledDataset::new(name, signals, labels)
}

/// Reads a UCR-style TSV/CSV file. The dataset is named after the file stem.
pub fn load_ucr_tsv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_ucr(&text, &name, path)
}

/// Serializes one-channel datasets as tab-separated rows. Values use the
/// shortest round-trip representation, so reloading is lossless.
pub fn to_ucr_tsv(dataset: &LabeledDataset) -> Result<String> {
    let mut out = String::new();
    for (s, &l) in dataset.signals.iter().zip(&dataset.labels) {
        if s.val_dim() != 1 || s.pos_dim() != 1 {
            return Err(Error::InvalidDataset(
                "the text format holds one-channel series only".into(),
            ));
        }
        out.push_str(&dataset.class_names[l]);
        for v in s.values_flat() {
            write!(out, "\t{v}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_ucr_tsv(dataset: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_ucr_tsv(dataset)?).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
