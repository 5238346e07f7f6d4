//! Evidence feed-forward hidden Markov models.
//!
//! An evidence feed-forward HMM adds to the usual `(π, A, B)` a tensor `C`
//! with `c_i(h, k)`, the probability that the next observation is `V_k`
//! given the current state `S_i` and the current observation `V_h`. The
//! forward recursion becomes
//!
//! ```text
//! α_j(t+1) = [Σ_i α_i(t) a_ij c_i(O_t, O_t+1)] b_j(O_t+1)
//! ```
//!
//! and the baseline HMM is the special case `C ≡ 1`.
//!
//! The crate covers likelihood evaluation, posterior statistics, Viterbi
//! decoding, EM training, per-class maximum-likelihood classification, and
//! the preprocessing that turns Iris measurements or tracked body points into
//! three-symbol trend sequences.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.
//!
//! ```
//! use effhmm::{inference, learning, ObservationSequence, Variant};
//!
//! let data = vec![
//!     ObservationSequence::from_one_based(&[1, 1, 2, 1, 1, 2]).unwrap(),
//!     ObservationSequence::from_one_based(&[1, 2, 1, 1, 2]).unwrap(),
//! ];
//! let config = learning::TrainConfig { n_states: 2, ..Default::default() };
//! let (model, report) = learning::em_train::<f64>(&data, 2, &config).unwrap();
//! assert!(model.validate().is_ok());
//! assert!(report.log_likelihood_history.windows(2).all(|w| w[1] >= w[0] - 1e-6));
//! let ll = inference::log_likelihood(&model, &data[0]).unwrap();
//! assert!(ll < 0.0);
//! ```

// `!(x > 0)` also catches NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod error;
pub mod inference;
pub mod io;
pub mod learning;
pub mod model;
pub mod oracle;
pub mod pipelines;
pub mod scalar;
pub mod sequence;

pub use error::{Error, Result};
pub use model::{ValidationReport, Variant, Violation};
pub use scalar::Real;
pub use sequence::{ClassLabel, LabeledDataset, ObservationSequence};

pub type EffHmmModel = model::EffHmmModel<f64>;
pub type EffHmmModel32 = model::EffHmmModel<f32>;
pub type TrellisResult = inference::TrellisResult<f64>;
pub type BackwardResult = inference::BackwardResult<f64>;
pub type PosteriorStats = inference::PosteriorStats<f64>;
pub type StatePath = inference::StatePath<f64>;
pub type SufficientStats = learning::SufficientStats<f64>;
pub type Classifier = classify::Classifier<f64>;
pub type IrisRecord = pipelines::iris::IrisRecord<f64>;
pub type BinSpec = pipelines::iris::BinSpec<f64>;
pub type PointFrame = pipelines::ratio::PointFrame<f64>;
