//! Baum-Welch style EM for `(π, A, B, C)`.
//!
//! Each iteration accumulates expected counts from the posteriors of every
//! training sequence, merges them in input order and re-estimates
//!
//! ```text
//! π̄_i     = E[q_1 = i] / #sequences
//! ā_ij    = E[i -> j] / E[i -> ·]
//! b̄_jk    = E[in j, observing k] / E[in j]
//! c̄_i(h,k) = E[in i, observing h then k] / E[in i, observing h, t < T]
//! ```
//!
//! Rows are then smoothed by `ε` and divided by their sum. Rows with no
//! expected mass become uniform. The standard variant keeps `C ≡ 1`.

use ndarray::{s, Array1, Array2, Array3, ArrayViewMut1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{backward_with, forward, posteriors_from};
use crate::model::{EffHmmModel, Variant};
use crate::scalar::Real;
use crate::sequence::ObservationSequence;

/// Expected counts accumulated over one or more sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats<T> {
    /// `Σ_seq γ_i(1)`
    pub expected_initial: Array1<T>,
    /// `Σ_seq Σ_{t<T} ξ_ij(t)`
    pub expected_transitions: Array2<T>,
    /// `Σ_seq Σ_{t<T} γ_i(t)`
    pub expected_departures: Array1<T>,
    /// `Σ_seq Σ_t γ_i(t)`
    pub expected_state_visits: Array1<T>,
    /// `Σ_seq Σ_t γ_j(t) [O_t = k]`
    pub expected_emissions: Array2<T>,
    /// `Σ_seq Σ_{t<T} γ_i(t) [O_t = h, O_{t+1} = k]`
    pub expected_obs_pairs: Array3<T>,
    /// `Σ_seq Σ_{t<T} γ_i(t) [O_t = h]`
    pub expected_obs_visits: Array2<T>,
    pub sequence_count: usize,
    /// `Σ_seq log P(O | λ)` under the model the counts were taken from.
    pub log_likelihood: T,
}

impl<T: Real> SufficientStats<T> {
    pub fn zeros(n_states: usize, n_symbols: usize) -> Self {
        let (n, m) = (n_states, n_symbols);
        Self {
            expected_initial: Array1::zeros(n),
            expected_transitions: Array2::zeros((n, n)),
            expected_departures: Array1::zeros(n),
            expected_state_visits: Array1::zeros(n),
            expected_emissions: Array2::zeros((n, m)),
            expected_obs_pairs: Array3::zeros((n, m, m)),
            expected_obs_visits: Array2::zeros((n, m)),
            sequence_count: 0,
            log_likelihood: T::zero(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.expected_initial.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.expected_emissions.ncols()
    }

    /// Mean per-sequence log-likelihood.
    pub fn mean_log_likelihood(&self) -> T {
        self.log_likelihood / T::from_usize_lossy(self.sequence_count.max(1))
    }

    /// Adds `other` into `self`.
    pub fn merge_from(&mut self, other: &Self) -> Result<()> {
        if (self.n_states(), self.n_symbols()) != (other.n_states(), other.n_symbols()) {
            return Err(Error::DimensionMismatch(format!(
                "stats for N={}, M={} cannot merge with N={}, M={}",
                self.n_states(),
                self.n_symbols(),
                other.n_states(),
                other.n_symbols()
            )));
        }
        self.expected_initial += &other.expected_initial;
        self.expected_transitions += &other.expected_transitions;
        self.expected_departures += &other.expected_departures;
        self.expected_state_visits += &other.expected_state_visits;
        self.expected_emissions += &other.expected_emissions;
        self.expected_obs_pairs += &other.expected_obs_pairs;
        self.expected_obs_visits += &other.expected_obs_visits;
        self.sequence_count += other.sequence_count;
        self.log_likelihood += other.log_likelihood;
        Ok(())
    }
}

/// Componentwise sum.
pub fn merge_stats<T: Real>(
    a: &SufficientStats<T>,
    b: &SufficientStats<T>,
) -> Result<SufficientStats<T>> {
    let mut out = a.clone();
    out.merge_from(b)?;
    Ok(out)
}

/// Expected counts for a single sequence.
pub fn accumulate_stats<T: Real>(
    model: &EffHmmModel<T>,
    obs: &ObservationSequence,
) -> Result<SufficientStats<T>> {
    let trellis = forward(model, obs)?;
    let backward = backward_with(model, obs, &trellis)?;
    let post = posteriors_from(model, obs, &trellis, &backward)?;
    let o = obs.symbols();
    let len = o.len();
    let mut stats = SufficientStats::zeros(model.n_states(), model.n_symbols());

    stats.expected_initial.assign(&post.gamma.row(0));
    for t in 0..len {
        let g = post.gamma.row(t);
        stats.expected_state_visits += &g;
        let mut col = stats.expected_emissions.column_mut(o[t]);
        col += &g;
        if t + 1 < len {
            stats.expected_departures += &g;
            stats.expected_transitions += &post.xi.slice(s![t, .., ..]);
            let mut visits = stats.expected_obs_visits.column_mut(o[t]);
            visits += &g;
            let mut pairs = stats.expected_obs_pairs.slice_mut(s![.., o[t], o[t + 1]]);
            pairs += &g;
        }
    }
    stats.sequence_count = 1;
    stats.log_likelihood = trellis.log_likelihood;
    Ok(stats)
}

/// Stats over a batch, merged in input order.
pub fn batch_stats<T: Real>(
    model: &EffHmmModel<T>,
    sequences: &[ObservationSequence],
) -> Result<SufficientStats<T>> {
    let mut total = SufficientStats::zeros(model.n_states(), model.n_symbols());
    for obs in sequences {
        total.merge_from(&accumulate_stats(model, obs)?)?;
    }
    Ok(total)
}

/// Turns a row of ratios into a distribution: uniform if the denominator is
/// zero, otherwise `ε`-smoothed and divided by its sum.
fn finish_row<T: Real>(mut row: ArrayViewMut1<'_, T>, denominator: T, epsilon: T) {
    let len = T::from_usize_lossy(row.len());
    if !(denominator > T::zero()) {
        row.fill(len.recip());
        return;
    }
    row.mapv_inplace(|x| x / denominator + epsilon);
    let sum: T = row.sum();
    if sum != T::one() {
        row.mapv_inplace(|x| x / sum);
    }
}

pub fn reestimate<T: Real>(
    stats: &SufficientStats<T>,
    variant: Variant,
    epsilon: T,
) -> EffHmmModel<T> {
    let (n, m) = (stats.n_states(), stats.n_symbols());

    let mut initial = stats.expected_initial.clone();
    finish_row(
        initial.view_mut(),
        T::from_usize_lossy(stats.sequence_count),
        epsilon,
    );

    let mut transition = stats.expected_transitions.clone();
    for row in transition.rows_mut() {
        let den: T = row.sum();
        finish_row(row, den, epsilon);
    }

    let mut emission = stats.expected_emissions.clone();
    for (j, row) in emission.rows_mut().into_iter().enumerate() {
        finish_row(row, stats.expected_state_visits[j], epsilon);
    }

    let evidence = match variant {
        Variant::Standard => Array3::from_elem((n, m, m), T::one()),
        Variant::EvidenceFeedForward => {
            let mut c = stats.expected_obs_pairs.clone();
            for i in 0..n {
                for h in 0..m {
                    let den = stats.expected_obs_visits[[i, h]];
                    finish_row(c.slice_mut(s![i, h, ..]), den, epsilon);
                }
            }
            c
        }
    };

    EffHmmModel::new(initial, transition, emission, evidence, variant)
        .expect("shapes follow the stats")
}

/// Random starting point: every row an independent positive point of the
/// simplex, reproducible from `seed`.
pub fn init_model<T: Real>(
    n_states: usize,
    n_symbols: usize,
    variant: Variant,
    seed: u64,
) -> EffHmmModel<T> {
    assert!(
        n_states >= 1 && n_symbols >= 1,
        "model needs at least one state and one symbol"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_row = |len: usize| -> Vec<T> {
        // (0, 1]: strictly positive entries
        let raw: Vec<f64> = (0..len).map(|_| 1.0 - rng.gen::<f64>()).collect();
        let sum: f64 = raw.iter().sum();
        let mut row: Vec<T> = raw.iter().map(|&x| T::lit(x / sum)).collect();
        let s: T = row.iter().copied().sum();
        if s != T::one() {
            row.iter_mut().for_each(|x| *x /= s);
        }
        row
    };
    let (n, m) = (n_states, n_symbols);
    let initial = random_row(n);
    let transition: Vec<Vec<T>> = (0..n).map(|_| random_row(n)).collect();
    let emission: Vec<Vec<T>> = (0..n).map(|_| random_row(m)).collect();
    let evidence = match variant {
        Variant::EvidenceFeedForward => Some(
            (0..n)
                .map(|_| (0..m).map(|_| random_row(m)).collect())
                .collect(),
        ),
        Variant::Standard => None,
    };
    EffHmmModel::from_rows(variant, initial, transition, emission, evidence)
        .expect("consistent shapes")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_states: usize,
    /// Training stops once the mean per-sequence log-likelihood improves by
    /// less than this.
    pub convergence_threshold: f64,
    pub max_iterations: usize,
    /// Added to every re-estimated entry before renormalizing; at most 1e-3.
    pub epsilon: f64,
    pub seed: u64,
    pub variant: Variant,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_states: 3,
            convergence_threshold: 0.01,
            max_iterations: 500,
            epsilon: 1e-6,
            seed: 0,
            variant: Variant::EvidenceFeedForward,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_states == 0 {
            return Err(Error::InvalidConfig("n_states must be at least 1".into()));
        }
        if !(self.convergence_threshold > 0.0) {
            return Err(Error::InvalidConfig(
                "convergence threshold must be positive".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(0.0..=1e-3).contains(&self.epsilon) {
            return Err(Error::InvalidConfig(format!(
                "epsilon {} outside [0, 1e-3]",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Mean per-sequence log-likelihood of the model after each number of
    /// re-estimation steps, starting with the initial model.
    pub log_likelihood_history: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub likelihood_measure: String,
}

/// EM from [`init_model`] with the configured seed.
pub fn em_train<T: Real>(
    sequences: &[ObservationSequence],
    n_symbols: usize,
    config: &TrainConfig,
) -> Result<(EffHmmModel<T>, TrainReport)> {
    config.validate()?;
    let init = init_model(config.n_states, n_symbols, config.variant, config.seed);
    em_train_from(init, sequences, config)
}

/// EM from a given starting model. `config.n_states` and `config.seed` are
/// ignored; the start model's variant must match `config.variant`.
pub fn em_train_from<T: Real>(
    init: EffHmmModel<T>,
    sequences: &[ObservationSequence],
    config: &TrainConfig,
) -> Result<(EffHmmModel<T>, TrainReport)> {
    config.validate()?;
    if sequences.is_empty() {
        return Err(Error::NoSequences);
    }
    if init.variant() != config.variant {
        return Err(Error::InvalidConfig(format!(
            "start model is {} but training variant is {}",
            init.variant(),
            config.variant
        )));
    }
    for obs in sequences {
        obs.check_alphabet(init.n_symbols())?;
    }
    let epsilon = T::lit(config.epsilon);
    let mut model = init;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let stats = batch_stats(&model, sequences)?;
        let mean = stats.mean_log_likelihood().as_f64();
        if let Some(&prev) = history.last() {
            if mean - prev < config.convergence_threshold {
                history.push(mean);
                converged = true;
                break;
            }
        }
        history.push(mean);
        if iterations == config.max_iterations {
            break;
        }
        model = reestimate(&stats, config.variant, epsilon);
        iterations += 1;
    }
    Ok((
        model,
        TrainReport {
            log_likelihood_history: history,
            iterations_run: iterations,
            converged,
            likelihood_measure: "mean per-sequence log-likelihood".into(),
        },
    ))
}
