//! Maximum-likelihood classification with one model per class.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::log_likelihood;
use crate::learning::{em_train, TrainConfig, TrainReport};
use crate::model::{EffHmmModel, Variant};
use crate::scalar::Real;
use crate::sequence::{ClassLabel, LabeledDataset, ObservationSequence};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// Raw log-likelihood.
    #[default]
    Raw,
    /// Log-likelihood divided by sequence length.
    LengthNormalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classifier<T> {
    models: BTreeMap<ClassLabel, EffHmmModel<T>>,
    config: TrainConfig,
    reports: BTreeMap<ClassLabel, TrainReport>,
}

impl<T: Real> Classifier<T> {
    /// Checks that there are at least two classes sharing alphabet and variant.
    pub fn new(
        models: BTreeMap<ClassLabel, EffHmmModel<T>>,
        config: TrainConfig,
        reports: BTreeMap<ClassLabel, TrainReport>,
    ) -> Result<Self> {
        if models.len() < 2 {
            return Err(Error::TooFewClasses(models.len()));
        }
        let first = models.values().next().expect("nonempty");
        let (m, variant) = (first.n_symbols(), first.variant());
        for (label, model) in &models {
            if model.n_symbols() != m || model.variant() != variant {
                return Err(Error::DimensionMismatch(format!(
                    "class {label} has M={} ({}), expected M={m} ({variant})",
                    model.n_symbols(),
                    model.variant()
                )));
            }
        }
        Ok(Self {
            models,
            config,
            reports,
        })
    }

    pub fn labels(&self) -> Vec<ClassLabel> {
        self.models.keys().cloned().collect()
    }

    pub fn models(&self) -> &BTreeMap<ClassLabel, EffHmmModel<T>> {
        &self.models
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn reports(&self) -> &BTreeMap<ClassLabel, TrainReport> {
        &self.reports
    }

    pub fn n_symbols(&self) -> usize {
        self.models.values().next().expect("nonempty").n_symbols()
    }

    pub fn variant(&self) -> Variant {
        self.models.values().next().expect("nonempty").variant()
    }
}

/// Trains one model per label present in `dataset`.
pub fn train_classifier<T: Real>(
    dataset: &LabeledDataset,
    config: &TrainConfig,
) -> Result<Classifier<T>> {
    train_classifier_for(dataset, &dataset.labels(), config)
}

/// Trains one model per entry of `labels`; class `k` (in lexicographic order)
/// uses seed `config.seed + k`.
pub fn train_classifier_for<T: Real>(
    dataset: &LabeledDataset,
    labels: &[ClassLabel],
    config: &TrainConfig,
) -> Result<Classifier<T>> {
    config.validate()?;
    let mut labels = labels.to_vec();
    labels.sort();
    labels.dedup();
    if labels.len() < 2 {
        return Err(Error::TooFewClasses(labels.len()));
    }
    let groups = dataset.indices_by_label();
    let mut models = BTreeMap::new();
    let mut reports = BTreeMap::new();
    for (ordinal, label) in labels.iter().enumerate() {
        let sequences: Vec<ObservationSequence> = groups
            .get(label)
            .map(|idx| idx.iter().map(|&i| dataset.items()[i].0.clone()).collect())
            .unwrap_or_default();
        if sequences.is_empty() {
            return Err(Error::EmptyClass(label.to_string()));
        }
        let class_config = TrainConfig {
            seed: config.seed.wrapping_add(ordinal as u64),
            ..config.clone()
        };
        let (model, report) = em_train(&sequences, dataset.n_symbols(), &class_config)?;
        models.insert(label.clone(), model);
        reports.insert(label.clone(), report);
    }
    Classifier::new(models, config.clone(), reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: ClassLabel,
    /// Per-class score in the requested mode.
    pub scores: BTreeMap<ClassLabel, f64>,
    /// Every class scored `-∞`; the label is then the first class.
    pub all_impossible: bool,
}

/// Argmax over per-class scores; ties go to the lexicographically first class.
pub fn classify_sequence<T: Real>(
    classifier: &Classifier<T>,
    obs: &ObservationSequence,
    mode: ScoreMode,
) -> Result<Classification> {
    let len = obs.len() as f64;
    let mut scores = BTreeMap::new();
    let mut best: Option<(&ClassLabel, f64)> = None;
    for (label, model) in &classifier.models {
        let mut score = log_likelihood(model, obs)?.as_f64();
        if mode == ScoreMode::LengthNormalized {
            score /= len;
        }
        scores.insert(label.clone(), score);
        match best {
            Some((_, b)) if !(score > b) => {}
            _ => best = Some((label, score)),
        }
    }
    let (label, top) = best.expect("classifier has classes");
    Ok(Classification {
        label: label.clone(),
        all_impossible: top == f64::NEG_INFINITY,
        scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemScore {
    /// 1-based position in the evaluated set.
    pub item: usize,
    pub true_label: ClassLabel,
    pub predicted: ClassLabel,
    /// In `labels` order; `null` in JSON stands for `-∞`.
    pub scores: Vec<f64>,
    pub all_impossible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: Variant,
    pub score_mode: ScoreMode,
    pub labels: Vec<ClassLabel>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
    /// Percentages rounded to 2 decimals; `None` for classes without test items.
    pub per_class_accuracy: Vec<Option<f64>>,
    pub overall_accuracy: f64,
    pub scores: Vec<ItemScore>,
}

fn percent(hits: usize, total: usize) -> f64 {
    (10_000.0 * hits as f64 / total as f64).round() / 100.0
}

pub fn evaluate<T: Real>(
    classifier: &Classifier<T>,
    test_set: &LabeledDataset,
    mode: ScoreMode,
) -> Result<EvalReport> {
    if test_set.is_empty() {
        return Err(Error::InvalidConfig("empty test set".into()));
    }
    let labels = classifier.labels();
    let position = |l: &ClassLabel| {
        labels
            .binary_search(l)
            .map_err(|_| Error::InvalidLabel(format!("{l} is not a class of the classifier")))
    };
    let k = labels.len();
    let mut confusion = vec![vec![0usize; k]; k];
    let mut scores = Vec::with_capacity(test_set.len());
    for (idx, (obs, truth)) in test_set.items().iter().enumerate() {
        let row = position(truth)?;
        let c = classify_sequence(classifier, obs, mode)?;
        let col = position(&c.label)?;
        confusion[row][col] += 1;
        scores.push(ItemScore {
            item: idx + 1,
            true_label: truth.clone(),
            predicted: c.label,
            scores: labels.iter().map(|l| c.scores[l]).collect(),
            all_impossible: c.all_impossible,
        });
    }
    let per_class_accuracy = confusion
        .iter()
        .enumerate()
        .map(|(r, row)| {
            let total: usize = row.iter().sum();
            (total > 0).then(|| percent(row[r], total))
        })
        .collect();
    let trace: usize = (0..k).map(|r| confusion[r][r]).sum();
    Ok(EvalReport {
        variant: classifier.variant(),
        score_mode: mode,
        labels,
        overall_accuracy: percent(trace, test_set.len()),
        per_class_accuracy,
        confusion,
        scores,
    })
}

fn fmt_pct(p: Option<f64>) -> String {
    p.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.confusion.iter().flatten().sum()
    }

    /// Accuracy per class plus the confusion matrix, as aligned text.
    pub fn to_table(&self) -> String {
        let width = self
            .labels
            .iter()
            .map(|l| l.as_str().len())
            .chain(["overall".len()])
            .max()
            .unwrap_or(7);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  {:>10}", "class", self.variant.as_str());
        for (label, acc) in self.labels.iter().zip(&self.per_class_accuracy) {
            let _ = writeln!(out, "{:<width$}  {:>10}", label.as_str(), fmt_pct(*acc));
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>10.2}",
            "overall", self.overall_accuracy
        );
        let _ = writeln!(out);
        let _ = write!(out, "{:<width$}", "true\\pred");
        for label in &self.labels {
            let _ = write!(
                out,
                "  {:>w$}",
                label.as_str(),
                w = label.as_str().len().max(4)
            );
        }
        let _ = writeln!(out);
        for (label, row) in self.labels.iter().zip(&self.confusion) {
            let _ = write!(out, "{:<width$}", label.as_str());
            for (col, n) in self.labels.iter().zip(row) {
                let _ = write!(out, "  {:>w$}", n, w = col.as_str().len().max(4));
            }
            let _ = writeln!(out);
        }
        out
    }
}

/// Side-by-side accuracy of several reports over the same classes.
pub fn comparison_table(columns: &[(&str, &EvalReport)]) -> String {
    let Some((_, first)) = columns.first() else {
        return String::new();
    };
    let width = first
        .labels
        .iter()
        .map(|l| l.as_str().len())
        .chain(["overall".len()])
        .max()
        .unwrap_or(7);
    let mut out = String::new();
    let _ = write!(out, "{:<width$}", "class");
    for (name, _) in columns {
        let _ = write!(out, "  {:>10}", name);
    }
    let _ = writeln!(out);
    for (r, label) in first.labels.iter().enumerate() {
        let _ = write!(out, "{:<width$}", label.as_str());
        for (_, report) in columns {
            let _ = write!(
                out,
                "  {:>10}",
                fmt_pct(report.per_class_accuracy.get(r).copied().flatten())
            );
        }
        let _ = writeln!(out);
    }
    let _ = write!(out, "{:<width$}", "overall");
    for (_, report) in columns {
        let _ = write!(out, "  {:>10.2}", report.overall_accuracy);
    }
    let _ = writeln!(out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    /// 0-based item indices, ascending.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Classes with fewer than the requested training items: (label, available).
    pub shortfalls: Vec<(ClassLabel, usize)>,
}

/// Seeded per-class split: each class's items are shuffled with seed
/// `seed + k` (k = lexicographic class ordinal) and the first
/// `train_per_class` go to training. A class with too few items trains on
/// all of them and is listed in `shortfalls`.
pub fn split_per_class(labels: &[ClassLabel], train_per_class: usize, seed: u64) -> Split {
    let mut groups: BTreeMap<&ClassLabel, Vec<usize>> = BTreeMap::new();
    for (idx, label) in labels.iter().enumerate() {
        groups.entry(label).or_default().push(idx);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut shortfalls = Vec::new();
    for (ordinal, (label, mut idx)) in groups.into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(ordinal as u64));
        idx.shuffle(&mut rng);
        if idx.len() < train_per_class {
            shortfalls.push((label.clone(), idx.len()));
        }
        let cut = train_per_class.min(idx.len());
        train.extend_from_slice(&idx[..cut]);
        test.extend_from_slice(&idx[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Split {
        train,
        test,
        shortfalls,
    }
}
