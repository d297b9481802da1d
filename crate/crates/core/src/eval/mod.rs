//! Evaluation protocols: bias-variance decomposition, strength and
//! correlation, nested cross-validation, and experiment sweeps.

mod bias_variance;
mod cv;
mod experiments;
mod strength;

pub use bias_variance::{kw_decompose, BvResult, NEGATIVE_BIAS_TOLERANCE};
pub use cv::{
    cv_protocol, stratified_folds, ChosenParams, CvConfig, CvReport, FoldResult, TuningGrid,
};
pub use experiments::{
    bias_variance_experiment, holdout_split, strength_correlation_experiment, subsample_study,
    BvConfig, BvRow, ScConfig, ScRow, SubsampleRow, SubsampleStudyConfig,
};
pub use strength::{strength_correlation, ScResult};
