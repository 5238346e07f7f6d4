//! Iris measurements to three-symbol trend sequences.
//!
//! Each attribute's observed range is cut into ten equal-width bins. A
//! flower becomes the trends between the bin numbers of sepal length, sepal
//! width, petal length and petal width, in that order.

use crate::error::{Error, Result};
use crate::pipelines::{trend_sequence, trends};
use crate::scalar::Real;
use crate::sequence::{ClassLabel, ObservationSequence};

pub const ATTRIBUTES: [&str; 4] = ["sepal_length", "sepal_width", "petal_length", "petal_width"];
pub const SPECIES: [&str; 3] = ["setosa", "versicolour", "virginica"];
pub const BIN_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct IrisRecord<T> {
    /// Centimeters, in [`ATTRIBUTES`] order.
    pub measurements: [T; 4],
    pub species: ClassLabel,
}

/// Maps the class strings found in the common Iris files to the canonical
/// names: case-insensitive, `Iris-` prefix removed, `versicolor` accepted.
pub fn canonical_species(raw: &str) -> Option<&'static str> {
    let lower = raw.trim().to_ascii_lowercase();
    let name = lower.strip_prefix("iris-").unwrap_or(&lower);
    match name {
        "setosa" => Some("setosa"),
        "versicolour" | "versicolor" => Some("versicolour"),
        "virginica" => Some("virginica"),
        _ => None,
    }
}

/// Parses an Iris CSV. A header line is optional.
pub fn parse_iris_csv<T: Real>(text: &str) -> Result<Vec<IrisRecord<T>>> {
    let mut records = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with("sepal_length")) {
            continue;
        }
        let err = |message: String| Error::Parse {
            context: format!("line {}", lineno + 1),
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(err(format!("expected 5 fields, found {}", fields.len())));
        }
        let mut measurements = [T::zero(); 4];
        for (slot, (field, name)) in measurements.iter_mut().zip(fields.iter().zip(ATTRIBUTES)) {
            let v: f64 = field
                .parse()
                .map_err(|_| err(format!("{name} {field:?} is not a number")))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err(err(format!("{name} must be positive, got {v}")));
            }
            *slot = T::lit(v);
        }
        let species = canonical_species(fields[4])
            .ok_or_else(|| err(format!("unknown species {:?}", fields[4])))?;
        records.push(IrisRecord {
            measurements,
            species: ClassLabel::new(species).expect("canonical names are valid labels"),
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeBins<T> {
    pub min: T,
    pub max: T,
    pub bin_count: usize,
    pub bin_width: T,
}

impl<T: Real> AttributeBins<T> {
    pub fn new(min: T, max: T, bin_count: usize) -> Self {
        Self {
            min,
            max,
            bin_count,
            bin_width: (max - min) / T::from_usize_lossy(bin_count),
        }
    }

    /// Bin 1 is `[min, min + w]`, bin `k ≥ 2` is `(min + (k-1)w, min + kw]`.
    /// Values outside the range clamp to the end bins. Quotients within
    /// rounding noise of an integer count as landing on that edge.
    pub fn bin_index(&self, value: T) -> usize {
        let mut x = (value - self.min) / self.bin_width;
        let nearest = x.round();
        if (x - nearest).abs() <= T::epsilon().sqrt() * nearest.abs().max(T::one()) {
            x = nearest;
        }
        let k = x.ceil().to_f64().unwrap_or(1.0);
        (k.max(1.0) as usize).min(self.bin_count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinSpec<T> {
    /// In [`ATTRIBUTES`] order.
    pub attributes: [AttributeBins<T>; 4],
}

impl<T: Real> BinSpec<T> {
    pub fn bin_index(&self, value: T, attribute: usize) -> usize {
        self.attributes[attribute].bin_index(value)
    }

    pub fn bins_of(&self, record: &IrisRecord<T>) -> [usize; 4] {
        std::array::from_fn(|a| self.bin_index(record.measurements[a], a))
    }
}

impl<T: Real> std::fmt::Display for BinSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, bins) in ATTRIBUTES.iter().zip(&self.attributes) {
            writeln!(
                f,
                "{name}: min {} max {} bins {} width {}",
                bins.min, bins.max, bins.bin_count, bins.bin_width
            )?;
        }
        Ok(())
    }
}

/// Per-attribute range over all records, ten equal-width bins.
pub fn fit_bins<T: Real>(records: &[IrisRecord<T>]) -> Result<BinSpec<T>> {
    if records.is_empty() {
        return Err(Error::InvalidConfig(
            "no Iris records to fit bins on".into(),
        ));
    }
    let mut attributes = [AttributeBins::new(T::zero(), T::one(), BIN_COUNT); 4];
    for (a, slot) in attributes.iter_mut().enumerate() {
        let values = records.iter().map(|r| r.measurements[a]);
        let min = values.clone().fold(T::infinity(), T::min);
        let max = values.fold(T::neg_infinity(), T::max);
        if !(max > min) {
            return Err(Error::DegenerateRange {
                attribute: ATTRIBUTES[a].into(),
                value: min.as_f64(),
            });
        }
        *slot = AttributeBins::new(min, max, BIN_COUNT);
    }
    Ok(BinSpec { attributes })
}

/// Three trend symbols: SL→SW, SW→PL, PL→PW.
pub fn iris_trend_sequence<T: Real>(
    record: &IrisRecord<T>,
    spec: &BinSpec<T>,
) -> ObservationSequence {
    trend_sequence(&trends(&spec.bins_of(record))).expect("four attributes give three trends")
}
