//! Observation sequences, class labels and labeled datasets, plus the
//! plain-text sequence file (`label,s1 s2 ... sT`, symbols 1-based).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonempty string of symbols, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservationSequence {
    symbols: Vec<usize>,
}

impl ObservationSequence {
    pub fn new(symbols: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { symbols })
    }

    /// Builds a sequence from 1-based symbol numbers as they appear in files.
    pub fn from_one_based(symbols: &[usize]) -> Result<Self> {
        let zero_based = symbols
            .iter()
            .enumerate()
            .map(|(t, &s)| {
                s.checked_sub(1).ok_or(Error::SymbolOutOfRange {
                    position: t + 1,
                    symbol: s,
                    n_symbols: 0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero_based)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn max_symbol(&self) -> usize {
        self.symbols.iter().copied().max().unwrap_or(0)
    }

    pub fn check_alphabet(&self, n_symbols: usize) -> Result<()> {
        match self.symbols.iter().position(|&s| s >= n_symbols) {
            Some(t) => Err(Error::SymbolOutOfRange {
                position: t + 1,
                symbol: self.symbols[t] + 1,
                n_symbols,
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for ObservationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, s) in self.symbols.iter().enumerate() {
            if t > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", s + 1)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClassLabel(String);

impl ClassLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() || name.contains([',', '\n', '\r']) || name != name.trim() {
            return Err(Error::InvalidLabel(format!("{name:?}")));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ClassLabel {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Self::new(s)
    }
}

impl From<ClassLabel> for String {
    fn from(l: ClassLabel) -> String {
        l.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    items: Vec<(ObservationSequence, ClassLabel)>,
    n_symbols: usize,
}

impl LabeledDataset {
    pub fn new(items: Vec<(ObservationSequence, ClassLabel)>, n_symbols: usize) -> Result<Self> {
        for (seq, _) in &items {
            seq.check_alphabet(n_symbols)?;
        }
        Ok(Self { items, n_symbols })
    }

    pub fn items(&self) -> &[(ObservationSequence, ClassLabel)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    /// Distinct labels in lexicographic order.
    pub fn labels(&self) -> Vec<ClassLabel> {
        let mut labels: Vec<_> = self.items.iter().map(|(_, l)| l.clone()).collect();
        labels.sort();
        labels.dedup();
        labels
    }

    /// Item indices grouped by label, in input order within each label.
    pub fn indices_by_label(&self) -> BTreeMap<ClassLabel, Vec<usize>> {
        let mut groups: BTreeMap<ClassLabel, Vec<usize>> = BTreeMap::new();
        for (idx, (_, label)) in self.items.iter().enumerate() {
            groups.entry(label.clone()).or_default().push(idx);
        }
        groups
    }

    /// The items at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            items: indices.iter().map(|&i| self.items[i].clone()).collect(),
            n_symbols: self.n_symbols,
        }
    }

    /// Parses a sequence file. Without `n_symbols` the alphabet size is the
    /// largest symbol present.
    pub fn parse(text: &str, n_symbols: Option<usize>) -> Result<Self> {
        let mut items = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                context: format!("line {}", lineno + 1),
                message,
            };
            let (label, body) = line
                .split_once(',')
                .ok_or_else(|| err("expected `label,s1 s2 ... sT`".into()))?;
            let label = ClassLabel::new(label.trim()).map_err(|e| err(e.to_string()))?;
            let symbols = body
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| err(format!("symbol {tok:?} is not a positive integer")))
                })
                .collect::<Result<Vec<_>>>()?;
            let seq =
                ObservationSequence::from_one_based(&symbols).map_err(|e| err(e.to_string()))?;
            items.push((seq, label));
        }
        let m = n_symbols.unwrap_or_else(|| {
            items
                .iter()
                .map(|(s, _)| s.max_symbol() + 1)
                .max()
                .unwrap_or(0)
        });
        Self::new(items, m)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (seq, label) in &self.items {
            out.push_str(label.as_str());
            out.push(',');
            out.push_str(&seq.to_string());
            out.push('\n');
        }
        out
    }
}
