#![allow(dead_code)]

//! Fixtures shared by the integration tests. Nothing here calls into the
//! inference or learning modules of the crate under test.

pub mod textbook;

use effhmm::{EffHmmModel, ObservationSequence, Variant};
use rand::Rng;

/// A random stochastic row. With `sparse`, some entries are zeroed while
/// keeping at least one positive.
pub fn random_row<R: Rng>(rng: &mut R, len: usize, sparse: bool) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    if sparse && len > 1 {
        for x in row.iter_mut() {
            if rng.gen_bool(0.2) {
                *x = 0.0;
            }
        }
        if row.iter().all(|&x| x == 0.0) {
            row[rng.gen_range(0..len)] = 1.0;
        }
    }
    let sum: f64 = row.iter().sum();
    let mut row: Vec<f64> = row.iter().map(|x| x / sum).collect();
    // absorb rounding so the row sums to one as closely as possible
    let drift: f64 = 1.0 - row.iter().sum::<f64>();
    let big = row
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    row[big] += drift;
    row
}

pub fn random_model<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    variant: Variant,
    sparse: bool,
) -> EffHmmModel {
    let pi = random_row(rng, n, sparse);
    let a = (0..n).map(|_| random_row(rng, n, sparse)).collect();
    let b = (0..n).map(|_| random_row(rng, m, sparse)).collect();
    let c = match variant {
        Variant::EvidenceFeedForward => Some(
            (0..n)
                .map(|_| (0..m).map(|_| random_row(rng, m, sparse)).collect())
                .collect(),
        ),
        Variant::Standard => None,
    };
    EffHmmModel::from_rows(variant, pi, a, b, c).unwrap()
}

pub fn random_sequence<R: Rng>(rng: &mut R, m: usize, len: usize) -> ObservationSequence {
    ObservationSequence::new((0..len).map(|_| rng.gen_range(0..m)).collect()).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
