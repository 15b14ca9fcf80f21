//! Evaluation toolkit for spoofing countermeasures in speaker verification.
//!
//! The crate covers the whole path from audio to report:
//!
//! * [`trialdata`] parses protocol and score files and joins them.
//! * [`metrics`] computes EER and the ASV-constrained min t-DCF.
//! * [`frontends`] extracts CQCC and LFCC features.
//! * [`gmm`] trains diagonal mixtures and scores log-likelihood ratios.
//! * [`fusion`] averages, normalizes and fuses scores by logistic regression.
//! * [`analysis`] decomposes results by condition and summarizes them.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common double precision instantiations.

// `!(x > 0)` is used deliberately: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod frontends;
pub mod fusion;
pub mod gmm;
pub mod metrics;
pub mod scalar;
pub mod trialdata;

pub use error::{Error, Result};
pub use scalar::Real;

pub use analysis::{
    box_stats, eid_category, format_keys, group_report, max_min_tdcf, per_condition_min_tdcf, pooled_min_tdcf,
    BoxStats, Category, EidAxis, Evaluation, Grouping, WorstCase,
};
pub use frontends::{AudioBuffer, CqccConfig, FeatureMatrix, Frontend, LfccConfig};
pub use fusion::{
    average_fuse, normalize_by_bonafide_std, oracle_sweep, train_lr, FusionModel, LrOptions, ScoreMatrix,
};
pub use gmm::{llr_score, train_em, EmConfig, Gmm};
pub use metrics::{eer_of, error_curve, min_tdcf, tdcf_coefficients, AsvErrorRates, CostModel, TdcfCoeffs, TdcfResult};
pub use trialdata::{join, parse_protocol, parse_scores, AsvKey, CmKey, ScoreSet, TrialId, TrialRecord};

pub type CmScoreSet = ScoreSet<f64, CmKey>;
pub type AsvScoreSet = ScoreSet<f64, AsvKey>;
pub type FeatureMatrix64 = FeatureMatrix<f64>;
pub type FeatureMatrix32 = FeatureMatrix<f32>;
pub type Audio64 = AudioBuffer<f64>;
pub type Audio32 = AudioBuffer<f32>;
pub type Gmm64 = Gmm<f64>;
pub type Gmm32 = Gmm<f32>;
pub type ScoreMatrix64 = ScoreMatrix<f64>;
pub type FusionModel64 = FusionModel<f64>;
pub type CostModel64 = CostModel<f64>;
pub type TdcfCoeffs64 = TdcfCoeffs<f64>;
