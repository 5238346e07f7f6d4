//! Model parameters `(π, A, B, C)` and their validation.
//!
//! `C` is the evidence-link tensor: `c[i][h][k]` is the probability that the
//! next observation is symbol `k` given the current state `i` and the current
//! observation `h`. The baseline HMM is the same structure with `C ≡ 1`, so a
//! single code path serves both variants.
//!
//! The Rust API indexes states and symbols from 0. Everything user-facing
//! (files, error messages, validation reports) is 1-based.

use std::fmt;

use ndarray::{Array1, Array2, Array3, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "eff")]
    EvidenceFeedForward,
    #[serde(rename = "standard")]
    Standard,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::EvidenceFeedForward => "eff",
            Variant::Standard => "standard",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eff" => Ok(Variant::EvidenceFeedForward),
            "standard" => Ok(Variant::Standard),
            other => Err(Error::InvalidConfig(format!(
                "unknown variant {other:?} (expected \"eff\" or \"standard\")"
            ))),
        }
    }
}

/// The parameter bundle `λ = (π, A, B, C)` plus the variant flag.
///
/// Construction only checks shapes; use [`EffHmmModel::validate`] for the
/// probabilistic invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct EffHmmModel<T> {
    initial: Array1<T>,
    transition: Array2<T>,
    emission: Array2<T>,
    evidence: Array3<T>,
    variant: Variant,
}

impl<T: Real> EffHmmModel<T> {
    pub fn new(
        initial: Array1<T>,
        transition: Array2<T>,
        emission: Array2<T>,
        evidence: Array3<T>,
        variant: Variant,
    ) -> Result<Self> {
        let n = initial.len();
        if n == 0 {
            return Err(Error::DimensionMismatch(
                "model needs at least one state".into(),
            ));
        }
        if transition.dim() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "A is {:?}, expected ({n}, {n})",
                transition.dim()
            )));
        }
        let m = emission.ncols();
        if emission.nrows() != n || m == 0 {
            return Err(Error::DimensionMismatch(format!(
                "B is {:?}, expected ({n}, M) with M >= 1",
                emission.dim()
            )));
        }
        if evidence.dim() != (n, m, m) {
            return Err(Error::DimensionMismatch(format!(
                "C is {:?}, expected ({n}, {m}, {m})",
                evidence.dim()
            )));
        }
        Ok(Self {
            initial,
            transition,
            emission,
            evidence,
            variant,
        })
    }

    /// Baseline HMM: `C ≡ 1`.
    pub fn standard(
        initial: Array1<T>,
        transition: Array2<T>,
        emission: Array2<T>,
    ) -> Result<Self> {
        let n = emission.nrows();
        let m = emission.ncols();
        Self::new(
            initial,
            transition,
            emission,
            Array3::from_elem((n, m, m), T::one()),
            Variant::Standard,
        )
    }

    /// Builds a model from nested rows. `evidence = None` means `C ≡ 1`.
    pub fn from_rows(
        variant: Variant,
        initial: Vec<T>,
        transition: Vec<Vec<T>>,
        emission: Vec<Vec<T>>,
        evidence: Option<Vec<Vec<Vec<T>>>>,
    ) -> Result<Self> {
        let n = initial.len();
        let transition = matrix_from_rows("a", transition, n, n)?;
        let m = emission.first().map_or(0, Vec::len);
        let emission = matrix_from_rows("b", emission, n, m)?;
        let evidence = match evidence {
            Some(c) => tensor_from_rows(c, n, m)?,
            None => Array3::from_elem((n, m, m), T::one()),
        };
        Self::new(
            Array1::from(initial),
            transition,
            emission,
            evidence,
            variant,
        )
    }

    pub fn n_states(&self) -> usize {
        self.initial.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.emission.ncols()
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn initial(&self) -> &Array1<T> {
        &self.initial
    }

    pub fn transition(&self) -> &Array2<T> {
        &self.transition
    }

    pub fn emission(&self) -> &Array2<T> {
        &self.emission
    }

    pub fn evidence(&self) -> &Array3<T> {
        &self.evidence
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> T {
        self.transition[[i, j]]
    }

    #[inline]
    pub fn b(&self, j: usize, k: usize) -> T {
        self.emission[[j, k]]
    }

    #[inline]
    pub fn c(&self, i: usize, h: usize, k: usize) -> T {
        self.evidence[[i, h, k]]
    }

    /// Same `(π, A, B)` with `C` replaced by ones.
    pub fn to_standard(&self) -> Self {
        let (n, m) = self.emission.dim();
        Self {
            evidence: Array3::from_elem((n, m, m), T::one()),
            variant: Variant::Standard,
            ..self.clone()
        }
    }

    /// Checks every invariant and reports each violation with 1-based coordinates.
    pub fn validate(&self) -> ValidationReport {
        let tol = T::STOCHASTIC_TOL;
        let mut violations = Vec::new();

        check_distribution(self.initial.view(), tol, Location::Initial, &mut violations);
        for (i, row) in self.transition.rows().into_iter().enumerate() {
            check_distribution(row, tol, Location::TransitionRow(i + 1), &mut violations);
        }
        for (j, row) in self.emission.rows().into_iter().enumerate() {
            check_distribution(row, tol, Location::EmissionRow(j + 1), &mut violations);
        }

        let (n, m, _) = self.evidence.dim();
        match self.variant {
            Variant::EvidenceFeedForward => {
                for i in 0..n {
                    for h in 0..m {
                        let row = self.evidence.slice(ndarray::s![i, h, ..]);
                        check_distribution(
                            row,
                            tol,
                            Location::EvidenceRow(i + 1, h + 1),
                            &mut violations,
                        );
                    }
                }
            }
            Variant::Standard => {
                for ((i, h, k), &v) in self.evidence.indexed_iter() {
                    if v != T::one() {
                        violations.push(Violation::StandardEvidenceNotOne {
                            state: i + 1,
                            from: h + 1,
                            to: k + 1,
                            value: v.as_f64(),
                        });
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(self) -> Result<Self> {
        let report = self.validate();
        if report.is_ok() {
            Ok(self)
        } else {
            Err(Error::InvalidModel(report))
        }
    }

    /// Converts every parameter to another scalar type.
    pub fn cast<U: Real>(&self) -> EffHmmModel<U> {
        let f = |x: &T| U::lit(x.as_f64());
        EffHmmModel {
            initial: self.initial.map(f),
            transition: self.transition.map(f),
            emission: self.emission.map(f),
            evidence: self.evidence.map(f),
            variant: self.variant,
        }
    }
}

fn matrix_from_rows<T: Real>(
    name: &str,
    rows: Vec<Vec<T>>,
    nrows: usize,
    ncols: usize,
) -> Result<Array2<T>> {
    if rows.len() != nrows {
        return Err(Error::DimensionMismatch(format!(
            "{name} has {} rows, expected {nrows}",
            rows.len()
        )));
    }
    let mut flat = Vec::with_capacity(nrows * ncols);
    for (r, row) in rows.into_iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::DimensionMismatch(format!(
                "{name} row {} has {} entries, expected {ncols}",
                r + 1,
                row.len()
            )));
        }
        flat.extend(row);
    }
    Ok(Array2::from_shape_vec((nrows, ncols), flat).expect("shape checked"))
}

fn tensor_from_rows<T: Real>(c: Vec<Vec<Vec<T>>>, n: usize, m: usize) -> Result<Array3<T>> {
    if c.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "c has {} state blocks, expected {n}",
            c.len()
        )));
    }
    let mut flat = Vec::with_capacity(n * m * m);
    for (i, block) in c.into_iter().enumerate() {
        if block.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "c state {} has {} rows, expected {m}",
                i + 1,
                block.len()
            )));
        }
        for (h, row) in block.into_iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "c state {} row {} has {} entries, expected {m}",
                    i + 1,
                    h + 1,
                    row.len()
                )));
            }
            flat.extend(row);
        }
    }
    Ok(Array3::from_shape_vec((n, m, m), flat).expect("shape checked"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Initial,
    TransitionRow(usize),
    EmissionRow(usize),
    /// (state, current symbol)
    EvidenceRow(usize, usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Initial => write!(f, "initial"),
            Location::TransitionRow(i) => write!(f, "A row {i}"),
            Location::EmissionRow(j) => write!(f, "B row {j}"),
            Location::EvidenceRow(i, h) => write!(f, "C state {i} row {h}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum {
        at: Location,
        sum: f64,
    },
    EntryOutOfRange {
        at: Location,
        index: usize,
        value: f64,
    },
    StandardEvidenceNotOne {
        state: usize,
        from: usize,
        to: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RowSum { at, sum } => write!(f, "{at} sums to {sum}"),
            Violation::EntryOutOfRange { at, index, value } => {
                write!(f, "{at} entry {index} is {value}, outside [0, 1]")
            }
            Violation::StandardEvidenceNotOne {
                state,
                from,
                to,
                value,
            } => write!(
                f,
                "C state {state} entry ({from},{to}) is {value}; standard variant requires 1"
            ),
        }
    }
}

/// Outcome of [`EffHmmModel::validate`]. Empty means the model is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_distribution<T: Real>(
    row: ArrayView1<'_, T>,
    tol: T,
    at: Location,
    out: &mut Vec<Violation>,
) {
    for (k, &v) in row.iter().enumerate() {
        if !(v >= T::zero() && v <= T::one()) {
            out.push(Violation::EntryOutOfRange {
                at,
                index: k + 1,
                value: v.as_f64(),
            });
        }
    }
    let sum: T = row.iter().copied().sum();
    if !((sum - T::one()).abs() <= tol) {
        out.push(Violation::RowSum {
            at,
            sum: sum.as_f64(),
        });
    }
}
