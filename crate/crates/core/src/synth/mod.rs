//! Desk-scale end-to-end benchmark: synthetic blobs, a dropout softmax
//! classifier as probability provider, stratified k-fold out-of-sample
//! predictions, noise injection, detection, cleaning and retraining.
//!
//! Per seed and noise rate the pipeline runs seven phases:
//!
//! 1. fit a model on clean training data, score class similarity on the
//!    held-out split and inject asymmetric noise from the resulting profile;
//! 2. collect out-of-sample softmax and MCD probabilities;
//! 3. run every configured detector;
//! 4. score detections against the corruption mask;
//! 5. train on the noisy set and measure held-out accuracy;
//! 6. drop each detector's flags, retrain and measure again;
//! 7. assemble the report.
//!
//! Every random stream is derived from the master seed and the branch
//! indices, so results do not depend on thread scheduling.

mod cv;
mod data;
mod model;

pub use cv::{oos_probabilities, stratified_folds, OosConfig};
pub use data::{make_blobs, SynthDataset};
pub use model::{
    train_dropout_softmax, DropoutSoftmaxModel, PredictMode, Prediction, TrainingConfig,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{default_registry, DetectionInput, DetectorRegistry, EnsembleConfig};
use crate::error::{Error, Result};
use crate::noise::{flip_profile, inject_noise, similarity_scores};
use crate::stats::{correlation_report, detection_metrics, CorrelationReport, DetectionMetrics};
use crate::AlgorithmId;

/// SplitMix64 over the master seed and a branch path.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    path.iter().fold(mix(master), |acc, &p| mix(acc ^ mix(p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Training samples.
    pub n: usize,
    pub c: usize,
    pub d: usize,
    pub separation: f64,
    /// Held-out samples for similarity scores and accuracy.
    pub n_test: usize,
    pub tau_list: Vec<f64>,
    pub algorithms: Vec<String>,
    #[serde(rename = "F")]
    pub passes: usize,
    /// Agreement for the forward-pass ensemble; strict majority when unset.
    pub m: Option<usize>,
    pub k_folds: usize,
    pub seeds: Vec<u64>,
    pub alpha: f64,
    pub training: TrainingConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            c: 5,
            d: 10,
            separation: 4.0,
            n_test: 1000,
            tau_list: vec![0.05, 0.1, 0.2],
            algorithms: AlgorithmId::ALL
                .iter()
                .map(|a| a.name().to_string())
                .collect(),
            passes: 5,
            m: None,
            k_folds: 4,
            seeds: vec![1],
            alpha: 0.05,
            training: TrainingConfig::default(),
        }
    }
}

impl ExperimentConfig {
    fn ensemble(&self) -> Result<EnsembleConfig> {
        match self.m {
            Some(m) => EnsembleConfig::new(m, self.passes),
            None => Ok(EnsembleConfig::strict_majority(self.passes)),
        }
    }

    fn validate(&self, registry: &DetectorRegistry) -> Result<()> {
        if let Some(&tau) = self.tau_list.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidTau(tau));
        }
        if let Some(unknown) = self.algorithms.iter().find(|a| !registry.contains(a)) {
            return Err(Error::UnknownAlgorithm(unknown.clone()));
        }
        if self.seeds.is_empty() || self.passes == 0 || self.n_test < self.c {
            return Err(Error::InfeasibleParameters(
                "need at least one seed, one forward pass and n_test >= c".into(),
            ));
        }
        self.ensemble().map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmResult {
    pub algorithm: String,
    pub metrics: DetectionMetrics,
    pub removed_count: usize,
    pub clean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauRun {
    pub tau: f64,
    pub num_flipped: usize,
    pub noisy_accuracy: f64,
    pub results: Vec<AlgorithmResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    /// Held-out accuracy of the model trained on clean labels.
    pub initial_accuracy: f64,
    pub taus: Vec<TauRun>,
}

/// Means over seeds for one (algorithm, noise rate) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub tau: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub removed_count: f64,
    pub noisy_accuracy: f64,
    pub clean_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub runs: Vec<SeedRun>,
    pub summary: Vec<SummaryRow>,
    pub initial_accuracy: f64,
    /// Mean F1 against mean clean accuracy across algorithms, when at least
    /// three algorithms ran and both sides vary.
    pub sensitivity: Option<CorrelationReport>,
}

impl ExperimentReport {
    pub fn row(&self, algorithm: &str, tau: f64) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.algorithm == algorithm && r.tau == tau)
    }
}

pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_pipeline_with(cfg, default_registry())
}

/// Runs the benchmark resolving algorithm names in `registry`.
pub fn run_pipeline_with(
    cfg: &ExperimentConfig,
    registry: &DetectorRegistry,
) -> Result<ExperimentReport> {
    cfg.validate(registry)?;
    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, registry, seed))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(cfg, &runs);
    let initial_accuracy = runs.iter().map(|r| r.initial_accuracy).sum::<f64>() / runs.len() as f64;

    let per_algorithm: Vec<(f64, f64)> = cfg
        .algorithms
        .iter()
        .map(|a| {
            let rows: Vec<&SummaryRow> = summary.iter().filter(|r| &r.algorithm == a).collect();
            let k = rows.len().max(1) as f64;
            (
                rows.iter().map(|r| r.f1).sum::<f64>() / k,
                rows.iter().map(|r| r.clean_accuracy).sum::<f64>() / k,
            )
        })
        .collect();
    let (f1s, accs): (Vec<f64>, Vec<f64>) = per_algorithm.into_iter().unzip();
    let sensitivity = correlation_report(&f1s, &accs, cfg.alpha).ok();

    Ok(ExperimentReport {
        config: cfg.clone(),
        runs,
        summary,
        initial_accuracy,
        sensitivity,
    })
}

fn run_seed(cfg: &ExperimentConfig, registry: &DetectorRegistry, seed: u64) -> Result<SeedRun> {
    let all = make_blobs(
        cfg.n + cfg.n_test,
        cfg.c,
        cfg.d,
        cfg.separation,
        derive_seed(seed, &[0]),
    )?;
    let (train, test) = all.split_at(cfg.n)?;

    let clean_model =
        train_dropout_softmax(&train, &cfg.training.with_seed(derive_seed(seed, &[1])))?;
    let initial_accuracy = clean_model.accuracy(&test)?;
    let similarity = similarity_scores(
        &clean_model.predict_softmax(test.features())?,
        test.labels(),
    )?;
    let profile = flip_profile(&similarity)?;
    let ensemble = cfg.ensemble()?;

    let taus = cfg
        .tau_list
        .iter()
        .enumerate()
        .map(|(ti, &tau)| {
            let branch = |tag: u64| derive_seed(seed, &[2, ti as u64, tag]);
            let (noisy, mask) = inject_noise(train.labels(), &profile, tau, branch(0))?;
            let noisy_train = train.relabeled(noisy.clone())?;

            let oos = OosConfig {
                training: cfg.training.with_seed(branch(1)),
                passes: cfg.passes,
                seed: branch(2),
            };
            let (softmax, stack) = oos_probabilities(&train, &noisy, cfg.k_folds, &oos)?;

            let retrain = cfg.training.with_seed(branch(3));
            let noisy_accuracy = train_dropout_softmax(&noisy_train, &retrain)?.accuracy(&test)?;

            let input = DetectionInput::new(Some(&softmax), Some(&stack), &noisy);
            let results = cfg
                .algorithms
                .par_iter()
                .map(|name| {
                    let flags = registry.run(name, &input, &ensemble)?;
                    let metrics = detection_metrics(&flags, &mask)?;
                    let kept: Vec<usize> = (0..noisy_train.n())
                        .filter(|&z| !flags.contains(z))
                        .collect();
                    let cleaned = noisy_train.subset(&kept)?;
                    let clean_accuracy =
                        train_dropout_softmax(&cleaned, &retrain)?.accuracy(&test)?;
                    Ok(AlgorithmResult {
                        algorithm: name.clone(),
                        metrics,
                        removed_count: flags.len(),
                        clean_accuracy,
                    })
                })
                .collect::<Result<Vec<_>>>()?;

            Ok(TauRun {
                tau,
                num_flipped: mask.num_flipped(),
                noisy_accuracy,
                results,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SeedRun {
        seed,
        initial_accuracy,
        taus,
    })
}

fn summarize(cfg: &ExperimentConfig, runs: &[SeedRun]) -> Vec<SummaryRow> {
    let seeds = runs.len() as f64;
    let mut rows = Vec::new();
    for (ti, &tau) in cfg.tau_list.iter().enumerate() {
        for (ai, algorithm) in cfg.algorithms.iter().enumerate() {
            let mean = |f: &dyn Fn(&TauRun, &AlgorithmResult) -> f64| {
                runs.iter()
                    .map(|r| f(&r.taus[ti], &r.taus[ti].results[ai]))
                    .sum::<f64>()
                    / seeds
            };
            rows.push(SummaryRow {
                algorithm: algorithm.clone(),
                tau,
                precision: mean(&|_, a| a.metrics.precision),
                recall: mean(&|_, a| a.metrics.recall),
                f1: mean(&|_, a| a.metrics.f1),
                removed_count: mean(&|_, a| a.removed_count as f64),
                noisy_accuracy: mean(&|t, _| t.noisy_accuracy),
                clean_accuracy: mean(&|_, a| a.clean_accuracy),
            });
        }
    }
    rows
}
