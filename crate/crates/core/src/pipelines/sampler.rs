//! Synthetic sequences from a model.
//!
//! The factor product `a·b·c` is not a normalized generative law, so the
//! next symbol is drawn from `b_{q'}(k) · c_q(O_t, k)` renormalized over `k`.
//! With `C ≡ 1` this is plain ancestral sampling.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::inference::StatePath;
use crate::model::EffHmmModel;
use crate::scalar::Real;
use crate::sequence::ObservationSequence;

fn draw<R: Rng>(weights: impl IntoIterator<Item = f64>, rng: &mut R) -> Option<usize> {
    WeightedIndex::new(weights).ok().map(|d| d.sample(rng))
}

/// Samples `len` steps with the given generator. The returned path's log
/// probability is the joint factor product along the sampled path.
pub fn sample_sequence_with<T: Real, R: Rng>(
    model: &EffHmmModel<T>,
    len: usize,
    rng: &mut R,
) -> Result<(ObservationSequence, StatePath<T>)> {
    if len == 0 {
        return Err(Error::EmptySequence);
    }
    let (n, m) = (model.n_states(), model.n_symbols());
    let unsamplable = Error::Unsamplable {
        state: 0,
        symbol: 0,
    };

    let mut q = draw(model.initial().iter().map(|p| p.as_f64()), rng).ok_or(unsamplable)?;
    let mut o = draw((0..m).map(|k| model.b(q, k).as_f64()), rng).ok_or(Error::Unsamplable {
        state: q + 1,
        symbol: 0,
    })?;
    let mut states = vec![q];
    let mut symbols = vec![o];
    let mut log_p = model.initial()[q].ln() + model.b(q, o).ln();

    for _ in 1..len {
        let next_q =
            draw((0..n).map(|j| model.a(q, j).as_f64()), rng).ok_or(Error::Unsamplable {
                state: q + 1,
                symbol: o + 1,
            })?;
        let next_o = draw(
            (0..m).map(|k| (model.b(next_q, k) * model.c(q, o, k)).as_f64()),
            rng,
        )
        .ok_or(Error::Unsamplable {
            state: q + 1,
            symbol: o + 1,
        })?;
        log_p = log_p
            + model.a(q, next_q).ln()
            + model.b(next_q, next_o).ln()
            + model.c(q, o, next_o).ln();
        q = next_q;
        o = next_o;
        states.push(q);
        symbols.push(o);
    }

    Ok((
        ObservationSequence::new(symbols)?,
        StatePath {
            states,
            log_probability: log_p,
        },
    ))
}

/// Samples one sequence, reproducible from `seed`.
pub fn sample_sequence<T: Real>(
    model: &EffHmmModel<T>,
    len: usize,
    seed: u64,
) -> Result<(ObservationSequence, StatePath<T>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_sequence_with(model, len, &mut rng)
}

/// `count` sequences of length `len` drawn from one generator seeded once.
pub fn sample_many<T: Real>(
    model: &EffHmmModel<T>,
    len: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<ObservationSequence>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| sample_sequence_with(model, len, &mut rng).map(|(s, _)| s))
        .collect()
}
