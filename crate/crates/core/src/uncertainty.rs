//! Monte Carlo dropout aggregation and entropy-gated confident learning.

use serde::Serialize;

use crate::confident::{
    class_thresholds, confident_joint_gated, prune_from_joint, ConfidentJoint, ThresholdVector,
};
use crate::error::{Error, Result};
use crate::tensor::{FlagSet, LabelVector, McdStack, ProbMatrix};

/// Natural-log predictive entropy per sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyVector(pub Vec<f64>);

/// Per-class mean entropy `te_j` over samples with given label `j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyThresholds(pub Vec<f64>);

/// Elementwise mean over forward passes.
pub fn mcd_mean(stack: &McdStack) -> ProbMatrix {
    let passes = stack.passes();
    let mut acc = vec![0.0; stack.n() * stack.c()];
    for pass in passes {
        for (a, v) in acc.iter_mut().zip(pass.values()) {
            *a += v;
        }
    }
    let f = passes.len() as f64;
    acc.iter_mut().for_each(|a| *a /= f);
    ProbMatrix::new(stack.n(), stack.c(), acc).expect("mean of finite passes keeps shape")
}

/// Row-wise argmax; ties go to the lowest class index.
pub fn mcd_classify(p: &ProbMatrix) -> Vec<usize> {
    p.rows()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold(0, |best, (k, &v)| if v > row[best] { k } else { best })
        })
        .collect()
}

/// Like [`mcd_classify`] but wrapped as labels over the matrix's classes.
pub fn mcd_classify_labels(p: &ProbMatrix) -> Result<LabelVector> {
    LabelVector::new(mcd_classify(p), p.c().max(2))
}

pub(crate) fn entropy(row: &[f64]) -> f64 {
    -row.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// `H = -sum p ln p` with `0 ln 0 = 0`.
pub fn row_entropy(p: &ProbMatrix) -> EntropyVector {
    EntropyVector(p.rows().map(entropy).collect())
}

pub fn entropy_thresholds(h: &EntropyVector, labels: &LabelVector) -> Result<EntropyThresholds> {
    if h.0.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} entropies for {} labels",
            h.0.len(),
            labels.len()
        )));
    }
    labels.require_all_classes()?;
    let c = labels.num_classes();
    let mut sums = vec![0.0; c];
    let mut counts = vec![0usize; c];
    for (hz, label) in h.0.iter().zip(labels.iter()) {
        sums[label] += hz;
        counts[label] += 1;
    }
    Ok(EntropyThresholds(
        sums.iter()
            .zip(&counts)
            .map(|(s, &n)| s / n as f64)
            .collect(),
    ))
}

/// Confident joint where a sample is only counted when its entropy does not
/// exceed the threshold of its given label.
pub fn confident_joint_entropy(
    p_mcd: &ProbMatrix,
    labels: &LabelVector,
    thresholds: &ThresholdVector,
    entropy_thresholds: &EntropyThresholds,
) -> Result<ConfidentJoint> {
    if entropy_thresholds.0.len() != p_mcd.c() {
        return Err(Error::ShapeMismatch(format!(
            "{} entropy thresholds for {} classes",
            entropy_thresholds.0.len(),
            p_mcd.c()
        )));
    }
    p_mcd.ensure_matches(labels)?;
    let h = row_entropy(p_mcd);
    confident_joint_gated(p_mcd, labels, thresholds, |z| {
        h.0[z] <= entropy_thresholds.0[labels.get(z)]
    })
}

/// Confident learning on the averaged dropout probabilities.
pub fn cl_mcd(stack: &McdStack, labels: &LabelVector) -> Result<FlagSet> {
    crate::confident::cl_pbnr(&mcd_mean(stack), labels)
}

/// Confident learning on averaged dropout probabilities with the per-class
/// entropy gate applied while counting the confident joint.
pub fn cl_mcd_entropy(stack: &McdStack, labels: &LabelVector) -> Result<FlagSet> {
    let p = mcd_mean(stack);
    let t = class_thresholds(&p, labels)?;
    let te = entropy_thresholds(&row_entropy(&p), labels)?;
    let joint = confident_joint_entropy(&p, labels, &t, &te)?;
    prune_from_joint(&p, labels, &joint)
}
