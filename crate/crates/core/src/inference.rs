//! Forward and backward passes, posterior state statistics and Viterbi
//! decoding.
//!
//! The unscaled recursions are
//!
//! ```text
//! α_i(1)   = π_i b_i(O_1)
//! α_j(t+1) = [Σ_i α_i(t) a_ij c_i(O_t, O_t+1)] b_j(O_t+1)
//! β_i(T)   = 1
//! β_i(t)   = [Σ_j a_ij b_j(O_t+1) β_j(t+1)] c_i(O_t, O_t+1)
//! ```
//!
//! Each forward row is divided by its sum; the factor `s_t = 1 / sum` is
//! kept and `log P(O|λ) = -Σ_t log s_t`. Backward rows reuse the factors:
//! `β̂(t) = β(t) Π_{u>t} s_u`, which makes `Σ_i α̂_i(t) β̂_i(t) = 1` for every
//! `t`. With `C ≡ 1` all of this is the textbook HMM.

use ndarray::{s, Array1, Array2, Array3};

use crate::error::{Error, Result};
use crate::model::EffHmmModel;
use crate::scalar::Real;
use crate::sequence::ObservationSequence;

/// Scaled forward variables.
#[derive(Debug, Clone, PartialEq)]
pub struct TrellisResult<T> {
    /// `T × N`; each row sums to 1 while the sequence is still possible.
    pub alpha_hat: Array2<T>,
    /// `s_t = 1 / Σ_i α̃_i(t)`. Infinite from the first step at which no
    /// state can explain the prefix.
    pub scaling: Array1<T>,
    /// `-Σ_t log s_t`; `-∞` for sequences the model cannot produce.
    pub log_likelihood: T,
}

impl<T: Real> TrellisResult<T> {
    pub fn is_possible(&self) -> bool {
        self.log_likelihood > T::neg_infinity()
    }

    /// Unscaled `α(t)` row. Underflows for long sequences; meant for checks.
    pub fn unscaled_alpha(&self, t: usize) -> Array1<T> {
        let log_scale: T = self.scaling.slice(s![..=t]).iter().map(|s| s.ln()).sum();
        let factor = (-log_scale).exp();
        self.alpha_hat.row(t).mapv(|a| a * factor)
    }
}

/// Scaled backward variables, using the forward pass's factors.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardResult<T> {
    /// `T × N`, finite and nonnegative.
    pub beta_hat: Array2<T>,
    /// `log Σ_i π_i b_i(O_1) β_i(1)`, the likelihood recomputed from the
    /// backward side.
    pub log_likelihood: T,
}

/// Posterior state occupancy `γ` (`T × N`) and transition posteriors `ξ`
/// (`(T-1) × N × N`).
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorStats<T> {
    pub gamma: Array2<T>,
    pub xi: Array3<T>,
}

/// A decoded state path (0-based states) with its joint log probability.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePath<T> {
    pub states: Vec<usize>,
    pub log_probability: T,
}

impl<T> StatePath<T> {
    /// States as 1-based numbers.
    pub fn one_based(&self) -> Vec<usize> {
        self.states.iter().map(|s| s + 1).collect()
    }
}

fn check<T: Real>(model: &EffHmmModel<T>, obs: &ObservationSequence) -> Result<()> {
    obs.check_alphabet(model.n_symbols())
}

pub fn forward<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
) -> Result<TrellisResult<T>> {
    check(model, obs)?;
    let o = obs.symbols();
    let (n, len) = (model.n_states(), o.len());
    let mut alpha_hat = Array2::zeros((len, n));
    let mut scaling = Array1::from_elem(len, T::infinity());
    let mut log_likelihood = T::zero();

    for j in 0..n {
        alpha_hat[[0, j]] = model.initial()[j] * model.b(j, o[0]);
    }
    for t in 0..len {
        if t > 0 {
            let (h, k) = (o[t - 1], o[t]);
            for j in 0..n {
                let mut acc = T::zero();
                for i in 0..n {
                    acc += alpha_hat[[t - 1, i]] * model.a(i, j) * model.c(i, h, k);
                }
                alpha_hat[[t, j]] = acc * model.b(j, k);
            }
        }
        let sum: T = alpha_hat.row(t).sum();
        if !(sum > T::zero()) {
            alpha_hat.slice_mut(s![t.., ..]).fill(T::zero());
            log_likelihood = T::neg_infinity();
            break;
        }
        alpha_hat.row_mut(t).mapv_inplace(|a| a / sum);
        scaling[t] = sum.recip();
        log_likelihood += sum.ln();
    }

    Ok(TrellisResult {
        alpha_hat,
        scaling,
        log_likelihood,
    })
}

/// Convenience: `log P(O | λ)`.
pub fn log_likelihood<T: Real>(model: &EffHmmModel<T>, obs: &ObservationSequence) -> Result<T> {
    Ok(forward(model, obs)?.log_likelihood)
}

pub fn backward<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
) -> Result<BackwardResult<T>> {
    let trellis = forward(model, obs)?;
    backward_with(model, obs, &trellis)
}

/// Backward pass scaled by an existing forward pass. If the sequence is
/// impossible, rows are normalized to sum 1 instead so values stay finite.
pub fn backward_with<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
    trellis: &TrellisResult<T>,
) -> Result<BackwardResult<T>> {
    check(model, obs)?;
    let o = obs.symbols();
    let (n, len) = (model.n_states(), o.len());
    let possible = trellis.is_possible();
    let mut beta_hat = Array2::zeros((len, n));
    beta_hat.row_mut(len - 1).fill(T::one());
    // Σ_{u>t} log(1/s_u), accumulated while walking back
    let mut log_tail = T::zero();

    for t in (0..len - 1).rev() {
        let (h, k) = (o[t], o[t + 1]);
        for i in 0..n {
            let mut acc = T::zero();
            for j in 0..n {
                acc += model.a(i, j) * model.b(j, k) * beta_hat[[t + 1, j]];
            }
            beta_hat[[t, i]] = acc * model.c(i, h, k);
        }
        let factor = if possible {
            trellis.scaling[t + 1]
        } else {
            let sum: T = beta_hat.row(t).sum();
            if sum > T::zero() {
                sum.recip()
            } else {
                T::one()
            }
        };
        beta_hat.row_mut(t).mapv_inplace(|b| b * factor);
        log_tail -= factor.ln();
    }

    let head: T = (0..n)
        .map(|i| model.initial()[i] * model.b(i, o[0]) * beta_hat[[0, i]])
        .sum();
    let log_likelihood = if head > T::zero() {
        head.ln() + log_tail
    } else {
        T::neg_infinity()
    };
    Ok(BackwardResult {
        beta_hat,
        log_likelihood,
    })
}

pub fn posteriors<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
) -> Result<PosteriorStats<T>> {
    let trellis = forward(model, obs)?;
    let backward = backward_with(model, obs, &trellis)?;
    posteriors_from(model, obs, &trellis, &backward)
}

/// `γ` and `ξ` from already computed passes. Both are self-normalizing
/// ratios, so the scaling factors cancel.
pub fn posteriors_from<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
    trellis: &TrellisResult<T>,
    backward: &BackwardResult<T>,
) -> Result<PosteriorStats<T>> {
    if !trellis.is_possible() {
        return Err(Error::DegeneratePosterior);
    }
    let o = obs.symbols();
    let (n, len) = (model.n_states(), o.len());
    let alpha = &trellis.alpha_hat;
    let beta = &backward.beta_hat;

    let mut gamma = alpha * beta;
    for mut row in gamma.rows_mut() {
        let sum: T = row.sum();
        if !(sum > T::zero()) {
            return Err(Error::DegeneratePosterior);
        }
        row.mapv_inplace(|g| g / sum);
    }

    let mut xi = Array3::zeros((len - 1, n, n));
    for t in 0..len - 1 {
        let (h, k) = (o[t], o[t + 1]);
        let mut total = T::zero();
        for i in 0..n {
            let lead = alpha[[t, i]] * model.c(i, h, k);
            for j in 0..n {
                let v = lead * model.a(i, j) * model.b(j, k) * beta[[t + 1, j]];
                xi[[t, i, j]] = v;
                total += v;
            }
        }
        if !(total > T::zero()) {
            return Err(Error::DegeneratePosterior);
        }
        xi.slice_mut(s![t, .., ..]).mapv_inplace(|v| v / total);
    }

    Ok(PosteriorStats { gamma, xi })
}

/// Most probable state path, computed in log space. Ties go to the lowest
/// state index at every maximization. If every path has zero probability
/// the result is the all-first-state path with `log_probability = -∞`.
pub fn viterbi<T: Real>(model: &EffHmmModel<T>, obs: &ObservationSequence) -> Result<StatePath<T>> {
    check(model, obs)?;
    let o = obs.symbols();
    let (n, len) = (model.n_states(), o.len());
    let log_a = model.transition().mapv(|x| x.ln());
    let log_b = model.emission().mapv(|x| x.ln());
    let log_c = model.evidence().mapv(|x| x.ln());

    let mut delta: Vec<T> = (0..n)
        .map(|i| model.initial()[i].ln() + log_b[[i, o[0]]])
        .collect();
    let mut next = vec![T::zero(); n];
    let mut back = Array2::<usize>::zeros((len, n));

    for t in 1..len {
        let (h, k) = (o[t - 1], o[t]);
        for j in 0..n {
            let mut best_i = 0;
            let mut best = delta[0] + log_a[[0, j]] + log_c[[0, h, k]];
            for i in 1..n {
                let v = delta[i] + log_a[[i, j]] + log_c[[i, h, k]];
                if v > best {
                    best = v;
                    best_i = i;
                }
            }
            back[[t, j]] = best_i;
            next[j] = best + log_b[[j, k]];
        }
        std::mem::swap(&mut delta, &mut next);
    }

    let mut last = 0;
    for i in 1..n {
        if delta[i] > delta[last] {
            last = i;
        }
    }
    let log_probability = delta[last];
    let mut states = vec![0; len];
    states[len - 1] = last;
    for t in (1..len).rev() {
        states[t - 1] = back[[t, states[t]]];
    }
    Ok(StatePath {
        states,
        log_probability,
    })
}
