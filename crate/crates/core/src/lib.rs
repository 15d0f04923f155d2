//! Label-error detection for classification datasets.
//!
//! Detectors combine confident learning (per-class thresholds, a calibrated
//! joint of given and true labels, pruning by noise rate) with Monte Carlo
//! dropout: the mean over stochastic forward passes, predictive entropy as a
//! gate, and majority votes across passes or across algorithms. Supporting
//! modules inject class-dependent label noise, score detections against a
//! corruption mask, test correlations and run a synthetic benchmark.

pub mod confident;
pub mod ensemble;
pub mod error;
pub mod noise;
pub mod stats;
pub mod synth;
pub mod tensor;
pub mod uncertainty;

pub use confident::{
    cl_pbnr, class_thresholds, confident_joint, estimate_joint, prune_by_noise_rate,
    ConfidentJoint, JointDist, ThresholdVector,
};
pub use ensemble::{
    default_registry, detect, detect_mcd_ensemble, majority_vote, AlgorithmId, DetectionInput,
    Detector, DetectorRegistry, EnsembleConfig,
};
pub use error::{Error, Result};
pub use noise::{
    build_transition, check_asymmetric, empirical_transition, flip_profile, inject_noise,
    similarity_scores, FlipProfile, NoiseModel, SimilarityMatrix, TransitionMatrix,
};
pub use stats::{
    correlation_report, detection_metrics, p_two_sided, pearson_r, t_statistic, CorrelationReport,
    DetectionMetrics,
};
pub use tensor::{CorruptionMask, FlagSet, LabelVector, McdStack, ProbMatrix};
pub use uncertainty::{
    cl_mcd, cl_mcd_entropy, mcd_mean, row_entropy, EntropyThresholds, EntropyVector,
};
