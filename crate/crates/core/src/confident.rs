//! Baseline confident learning: per-class self-confidence thresholds, the
//! confident joint, its calibration into a joint distribution, and
//! prune-by-noise-rate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{FlagSet, LabelVector, ProbMatrix};

/// Per-class mean self-confidence `t_j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdVector(pub Vec<f64>);

impl ThresholdVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `c x c` counts; row = given label, column = confidently predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfidentJoint {
    c: usize,
    counts: Vec<u64>,
}

impl ConfidentJoint {
    pub fn zeros(c: usize) -> Self {
        Self {
            c,
            counts: vec![0; c * c],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let c = rows.len();
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::DimensionMismatch(
                "confident joint must be square".into(),
            ));
        }
        Ok(Self {
            c,
            counts: rows.concat(),
        })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn get(&self, given: usize, predicted: usize) -> u64 {
        self.counts[given * self.c + predicted]
    }

    fn bump(&mut self, given: usize, predicted: usize) {
        self.counts[given * self.c + predicted] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row(&self, given: usize) -> &[u64] {
        &self.counts[given * self.c..(given + 1) * self.c]
    }
}

/// Calibrated joint distribution `Q[given][true]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDist {
    c: usize,
    q: Vec<f64>,
}

impl JointDist {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let c = rows.len();
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::DimensionMismatch(
                "joint distribution must be square".into(),
            ));
        }
        Ok(Self {
            c,
            q: rows.concat(),
        })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn get(&self, given: usize, truth: usize) -> f64 {
        self.q[given * self.c + truth]
    }

    pub fn sum(&self) -> f64 {
        self.q.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.q
            .chunks_exact(self.c)
            .map(|r| r.iter().sum())
            .collect()
    }
}

/// `t_j`: mean predicted probability of class `j` over samples labeled `j`.
pub fn class_thresholds(p: &ProbMatrix, labels: &LabelVector) -> Result<ThresholdVector> {
    p.ensure_matches(labels)?;
    labels.require_all_classes()?;
    let mut sums = vec![0.0; p.c()];
    let mut counts = vec![0usize; p.c()];
    for (z, label) in labels.iter().enumerate() {
        sums[label] += p.get(z, label);
        counts[label] += 1;
    }
    Ok(ThresholdVector(
        sums.iter()
            .zip(&counts)
            .map(|(s, &n)| s / n as f64)
            .collect(),
    ))
}

/// Among the classes whose probability reaches their threshold, the one with
/// the highest probability (lowest index on ties).
pub(crate) fn confident_class(row: &[f64], thresholds: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, (&p, &t)) in row.iter().zip(thresholds).enumerate() {
        if p >= t && best.is_none_or(|b| p > row[b]) {
            best = Some(j);
        }
    }
    best
}

/// Confident joint with a per-sample admission gate.
pub(crate) fn confident_joint_gated(
    p: &ProbMatrix,
    labels: &LabelVector,
    thresholds: &ThresholdVector,
    admit: impl Fn(usize) -> bool,
) -> Result<ConfidentJoint> {
    p.ensure_matches(labels)?;
    if thresholds.0.len() != p.c() {
        return Err(Error::ShapeMismatch(format!(
            "{} thresholds for {} classes",
            thresholds.0.len(),
            p.c()
        )));
    }
    let mut joint = ConfidentJoint::zeros(p.c());
    for (z, given) in labels.iter().enumerate() {
        if !admit(z) {
            continue;
        }
        if let Some(j) = confident_class(p.row(z), &thresholds.0) {
            joint.bump(given, j);
        }
    }
    Ok(joint)
}

pub fn confident_joint(
    p: &ProbMatrix,
    labels: &LabelVector,
    thresholds: &ThresholdVector,
) -> Result<ConfidentJoint> {
    confident_joint_gated(p, labels, thresholds, |_| true)
}

/// Rescales each row of the confident joint to the empirical count of its
/// label, then normalizes the whole matrix to sum to one.
pub fn estimate_joint(joint: &ConfidentJoint, labels: &LabelVector) -> Result<JointDist> {
    let c = joint.c();
    if labels.num_classes() != c {
        return Err(Error::ShapeMismatch(format!(
            "joint is {c}x{c}, labels have {} classes",
            labels.num_classes()
        )));
    }
    if joint.total() == 0 {
        return Err(Error::AllZeroJoint);
    }
    let label_counts = labels.class_counts();
    let mut calibrated = vec![0.0; c * c];
    for i in 0..c {
        let row_sum: u64 = joint.row(i).iter().sum();
        if row_sum == 0 {
            continue;
        }
        let scale = label_counts[i] as f64 / row_sum as f64;
        for j in 0..c {
            calibrated[i * c + j] = joint.get(i, j) as f64 * scale;
        }
    }
    let total: f64 = calibrated.iter().sum();
    Ok(JointDist {
        c,
        q: calibrated.into_iter().map(|v| v / total).collect(),
    })
}

/// Round half away from zero, clamped at zero.
pub(crate) fn round_count(x: f64) -> usize {
    x.round().max(0.0) as usize
}

/// For every off-diagonal cell `(i, j)`, flags the `round(n * Q[i][j])`
/// samples labeled `i` with the largest margin `p_j - p_i`. Ties in margin
/// go to the lower sample index.
pub fn prune_by_noise_rate(
    p: &ProbMatrix,
    labels: &LabelVector,
    joint: &JointDist,
) -> Result<FlagSet> {
    p.ensure_matches(labels)?;
    if joint.c() != p.c() {
        return Err(Error::ShapeMismatch(format!(
            "joint is {0}x{0}, probabilities have {1} classes",
            joint.c(),
            p.c()
        )));
    }
    let n = p.n() as f64;
    let members = labels.class_members();
    let mut flagged = Vec::new();
    let mut scored: Vec<(f64, usize)> = Vec::new();
    for (i, samples) in members.iter().enumerate() {
        for j in (0..p.c()).filter(|&j| j != i) {
            let take = round_count(n * joint.get(i, j)).min(samples.len());
            if take == 0 {
                continue;
            }
            scored.clear();
            scored.extend(samples.iter().map(|&z| (p.get(z, j) - p.get(z, i), z)));
            let by_margin =
                |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
            if take < scored.len() {
                scored.select_nth_unstable_by(take - 1, by_margin);
            }
            flagged.extend(scored[..take].iter().map(|&(_, z)| z));
        }
    }
    Ok(flagged.into_iter().collect())
}

/// Thresholds, confident joint, calibration and pruning in one call. A
/// confident joint with no counts yields an empty flag set.
pub fn cl_pbnr(p: &ProbMatrix, labels: &LabelVector) -> Result<FlagSet> {
    let thresholds = class_thresholds(p, labels)?;
    let joint = confident_joint(p, labels, &thresholds)?;
    prune_from_joint(p, labels, &joint)
}

pub(crate) fn prune_from_joint(
    p: &ProbMatrix,
    labels: &LabelVector,
    joint: &ConfidentJoint,
) -> Result<FlagSet> {
    match estimate_joint(joint, labels) {
        Ok(q) => prune_by_noise_rate(p, labels, &q),
        Err(Error::AllZeroJoint) => Ok(FlagSet::empty()),
        Err(e) => Err(e),
    }
}
