//! Synthetic class-dependent label noise.
//!
//! Class similarity scores from a model's held-out predictions decide which
//! classes a label may be flipped into: scores at or above mean + std of a
//! class's off-diagonal scores form its similarity group, and a softmax over
//! the group's scores gives the flipping probabilities.
//!
//! Randomness comes from `ChaCha8Rng` seeded with `seed_from_u64`, which
//! produces the same stream on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::confident::round_count;
use crate::error::{Error, Result};
use crate::tensor::{CorruptionMask, LabelVector, ProbMatrix};

/// Slack when comparing a score against its group threshold, so that equal
/// scores land in the group despite rounding in the mean.
pub const GROUP_TOL: f64 = 1e-12;

/// Mean predicted probability of class `l` over samples labeled `k`.
/// Diagonal entries are unused and stored as zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    c: usize,
    s: Vec<f64>,
}

impl SimilarityMatrix {
    /// Diagonal values in `rows` are ignored.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let c = rows.len();
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::DimensionMismatch(
                "similarity matrix must be square".into(),
            ));
        }
        let mut s = rows.concat();
        for k in 0..c {
            s[k * c + k] = 0.0;
        }
        Ok(Self { c, s })
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.s[k * self.c + l]
    }

    /// `(l, S[k][l])` for every `l != k`.
    pub fn off_diagonal(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.c)
            .filter(move |&l| l != k)
            .map(move |l| (l, self.get(k, l)))
    }
}

/// Threshold, similarity group and flipping probabilities of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub ts: f64,
    pub group: Vec<usize>,
    pub fp: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlipProfile {
    profiles: Vec<ClassProfile>,
}

/// On-disk form: `{"tau": ..., "classes": c, "profiles": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileDocument {
    #[serde(default)]
    pub tau: Option<f64>,
    pub classes: usize,
    pub profiles: Vec<ClassProfile>,
}

impl FlipProfile {
    /// Checks the simplex and group invariants of every class.
    pub fn new(profiles: Vec<ClassProfile>) -> Result<Self> {
        let c = profiles.len();
        if c < 2 {
            return Err(Error::InvalidTensor(
                "flip profile needs >= 2 classes".into(),
            ));
        }
        for (k, p) in profiles.iter().enumerate() {
            if p.fp.len() != c {
                return Err(Error::DimensionMismatch(format!(
                    "class {k}: {} flipping probabilities for {c} classes",
                    p.fp.len()
                )));
            }
            if p.group.is_empty() || p.group.iter().any(|&l| l == k || l >= c) {
                return Err(Error::InvalidTensor(format!(
                    "class {k}: group {:?} must be non-empty and exclude {k}",
                    p.group
                )));
            }
            let sum: f64 = p.fp.iter().sum();
            let outside =
                p.fp.iter()
                    .enumerate()
                    .any(|(l, &v)| v < 0.0 || (v > 0.0 && !p.group.contains(&l)));
            if (sum - 1.0).abs() > 1e-9 || outside {
                return Err(Error::InvalidTensor(format!(
                    "class {k}: flipping probabilities must be a distribution over the group"
                )));
            }
        }
        Ok(Self { profiles })
    }

    pub fn num_classes(&self) -> usize {
        self.profiles.len()
    }

    pub fn class(&self, k: usize) -> &ClassProfile {
        &self.profiles[k]
    }

    pub fn classes(&self) -> &[ClassProfile] {
        &self.profiles
    }

    pub fn to_document(&self, tau: Option<f64>) -> ProfileDocument {
        ProfileDocument {
            tau,
            classes: self.num_classes(),
            profiles: self.profiles.clone(),
        }
    }

    pub fn from_document(doc: ProfileDocument) -> Result<Self> {
        if doc.classes != doc.profiles.len() {
            return Err(Error::DimensionMismatch(format!(
                "document declares {} classes but holds {} profiles",
                doc.classes,
                doc.profiles.len()
            )));
        }
        Self::new(doc.profiles)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub tau: f64,
    pub classes: usize,
    pub t: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    /// Wraps an arbitrary square matrix, e.g. a measured one.
    pub fn from_rows(t: Vec<Vec<f64>>, tau: f64) -> Result<Self> {
        let classes = t.len();
        if t.iter().any(|r| r.len() != classes) {
            return Err(Error::DimensionMismatch(
                "transition matrix must be square".into(),
            ));
        }
        if t.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { position: 0 });
        }
        Ok(Self { tau, classes, t })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.t[i][j]
    }
}

/// Noise model for [`build_transition`].
#[derive(Debug, Clone, Copy)]
pub enum NoiseModel<'a> {
    Symmetric,
    Asymmetric(&'a FlipProfile),
}

pub fn similarity_scores(p_test: &ProbMatrix, y_test: &LabelVector) -> Result<SimilarityMatrix> {
    p_test.ensure_matches(y_test)?;
    y_test.require_all_classes()?;
    let c = p_test.c();
    let mut s = vec![0.0; c * c];
    let counts = y_test.class_counts();
    for (z, k) in y_test.iter().enumerate() {
        for (l, &v) in p_test.row(z).iter().enumerate() {
            s[k * c + l] += v;
        }
    }
    for k in 0..c {
        for l in 0..c {
            s[k * c + l] = if k == l {
                0.0
            } else {
                s[k * c + l] / counts[k] as f64
            };
        }
    }
    Ok(SimilarityMatrix { c, s })
}

/// Threshold `ts_k = mean + population std` of the off-diagonal scores,
/// group of scores reaching it (falling back to the single highest score
/// when none do) and softmax of the raw group scores.
pub fn flip_profile(s: &SimilarityMatrix) -> Result<FlipProfile> {
    let c = s.c();
    if c < 2 {
        return Err(Error::InvalidTensor(
            "flip profile needs >= 2 classes".into(),
        ));
    }
    let profiles = (0..c)
        .map(|k| {
            let scores: Vec<(usize, f64)> = s.off_diagonal(k).collect();
            let m = scores.len() as f64;
            let mean = scores.iter().map(|(_, v)| v).sum::<f64>() / m;
            let var = scores.iter().map(|(_, v)| (v - mean).powi(2)).sum::<f64>() / m;
            let ts = mean + var.sqrt();

            let mut group: Vec<usize> = scores
                .iter()
                .filter(|(_, v)| *v >= ts - GROUP_TOL)
                .map(|&(l, _)| l)
                .collect();
            if group.is_empty() {
                let (best, _) = scores
                    .iter()
                    .fold(scores[0], |b, &(l, v)| if v > b.1 { (l, v) } else { b });
                group.push(best);
            }

            let peak = group.iter().map(|&l| s.get(k, l)).fold(f64::MIN, f64::max);
            let weights: Vec<f64> = group.iter().map(|&l| (s.get(k, l) - peak).exp()).collect();
            let total: f64 = weights.iter().sum();
            let mut fp = vec![0.0; c];
            for (&l, w) in group.iter().zip(&weights) {
                fp[l] = w / total;
            }
            ClassProfile { ts, group, fp }
        })
        .collect();
    Ok(FlipProfile { profiles })
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::InvalidTau(tau))
    }
}

/// Symmetric: `1 - tau` on the diagonal, `tau / (c - 1)` elsewhere.
/// Asymmetric: `1 - tau` on the diagonal, `tau * FP_k[j]` elsewhere.
pub fn build_transition(model: NoiseModel<'_>, tau: f64, c: usize) -> Result<TransitionMatrix> {
    check_tau(tau)?;
    if c < 2 {
        return Err(Error::InvalidTensor(
            "transition matrix needs >= 2 classes".into(),
        ));
    }
    let t = match model {
        NoiseModel::Symmetric => (0..c)
            .map(|i| {
                (0..c)
                    .map(|j| {
                        if i == j {
                            1.0 - tau
                        } else {
                            tau / (c - 1) as f64
                        }
                    })
                    .collect()
            })
            .collect(),
        NoiseModel::Asymmetric(profile) => {
            if profile.num_classes() != c {
                return Err(Error::ShapeMismatch(format!(
                    "profile has {} classes, expected {c}",
                    profile.num_classes()
                )));
            }
            (0..c)
                .map(|i| {
                    let fp = &profile.class(i).fp;
                    (0..c)
                        .map(|j| if i == j { 1.0 - tau } else { tau * fp[j] })
                        .collect()
                })
                .collect()
        }
    };
    Ok(TransitionMatrix { tau, classes: c, t })
}

pub fn check_asymmetric(t: &TransitionMatrix, tau: f64) -> bool {
    check_asymmetric_within(t, tau, 1e-9)
}

/// Every diagonal equals `1 - tau` within `diag_tol`, and some row holds
/// two off-diagonal entries that differ.
pub fn check_asymmetric_within(t: &TransitionMatrix, tau: f64, diag_tol: f64) -> bool {
    let c = t.classes;
    let diagonal_ok = (0..c).all(|i| (t.get(i, i) - (1.0 - tau)).abs() <= diag_tol);
    diagonal_ok
        && (0..c).any(|i| {
            (0..c).filter(|&j| j != i).any(|j| {
                (0..c)
                    .filter(|&k| k != i && k != j)
                    .any(|k| t.get(i, j) > t.get(i, k))
            })
        })
}

/// Draws `round(tau * n)` distinct samples uniformly (Fisher-Yates prefix)
/// and reassigns each to a class drawn from its label's flipping
/// probabilities by inverse CDF.
pub fn inject_noise(
    labels: &LabelVector,
    profile: &FlipProfile,
    tau: f64,
    seed: u64,
) -> Result<(LabelVector, CorruptionMask)> {
    check_tau(tau)?;
    if profile.num_classes() != labels.num_classes() {
        return Err(Error::ShapeMismatch(format!(
            "profile has {} classes, labels have {}",
            profile.num_classes(),
            labels.num_classes()
        )));
    }
    let n = labels.len();
    let count = round_count(tau * n as f64).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut order: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        order.swap(i, j);
    }

    let mut noisy = labels.as_slice().to_vec();
    for &z in &order[..count] {
        let fp = &profile.class(labels.get(z)).fp;
        let u: f64 = rng.random();
        noisy[z] = sample_inverse_cdf(fp, u);
    }
    let noisy = LabelVector::new(noisy, labels.num_classes())?;
    let mask = CorruptionMask::from_labels(labels, &noisy)?;
    Ok((noisy, mask))
}

/// First index whose cumulative probability exceeds `u`; rounding shortfall
/// falls back to the last index with non-zero mass.
fn sample_inverse_cdf(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        acc += p;
        if p > 0.0 && u < acc {
            return k;
        }
    }
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .expect("non-empty distribution")
}

/// Row-normalized frequencies of `original -> noisy` label pairs.
pub fn empirical_transition(
    original: &LabelVector,
    noisy: &LabelVector,
    tau: f64,
) -> Result<TransitionMatrix> {
    let c = original.num_classes();
    if noisy.len() != original.len() || noisy.num_classes() != c {
        return Err(Error::ShapeMismatch("label vectors differ in shape".into()));
    }
    let mut counts = vec![vec![0.0; c]; c];
    for (a, b) in original.iter().zip(noisy.iter()) {
        counts[a][b] += 1.0;
    }
    for row in &mut counts {
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
    TransitionMatrix::from_rows(counts, tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_rows_give_that_row() {
        let y = LabelVector::new(vec![0, 0, 1, 1], 2).unwrap();
        let p = ProbMatrix::from_rows(&[
            vec![0.7, 0.3],
            vec![0.7, 0.3],
            vec![0.4, 0.6],
            vec![0.4, 0.6],
        ])
        .unwrap();
        let s = similarity_scores(&p, &y).unwrap();
        assert!((s.get(0, 1) - 0.3).abs() < 1e-15);
        assert!((s.get(1, 0) - 0.4).abs() < 1e-15);
        assert_eq!(s.get(0, 0), 0.0);
    }

    #[test]
    fn perfect_predictions_have_no_similarity() {
        let y = LabelVector::new(vec![0, 1, 2], 3).unwrap();
        let p = ProbMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let s = similarity_scores(&p, &y).unwrap();
        assert!((0..3).all(|k| s.off_diagonal(k).all(|(_, v)| v == 0.0)));
    }

    #[test]
    fn similarity_needs_every_class() {
        let y = LabelVector::new(vec![0, 0], 2).unwrap();
        let p = ProbMatrix::new(2, 2, vec![0.5; 4]).unwrap();
        assert!(matches!(
            similarity_scores(&p, &y),
            Err(Error::EmptyClass { class: 1 })
        ));
    }

    #[test]
    fn equal_scores_form_a_uniform_group() {
        let c = 10;
        let rows: Vec<Vec<f64>> = (0..c).map(|_| vec![0.1; c]).collect();
        let profile = flip_profile(&SimilarityMatrix::from_rows(&rows).unwrap()).unwrap();
        for k in 0..c {
            let p = profile.class(k);
            assert_eq!(p.group.len(), c - 1);
            assert!(!p.group.contains(&k));
            for l in 0..c {
                let want = if l == k { 0.0 } else { 1.0 / 9.0 };
                assert!((p.fp[l] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn left_skewed_scores_fall_back_to_argmax() {
        // Off-diagonal scores for class 0: 0, 1, 1, 1 -> mean .75, std .433,
        // ts 1.183 leaves no score in the group.
        let rows = vec![
            vec![0.0, 0.0, 1.0, 1.0, 1.0],
            vec![0.2; 5],
            vec![0.2; 5],
            vec![0.2; 5],
            vec![0.2; 5],
        ];
        let profile = flip_profile(&SimilarityMatrix::from_rows(&rows).unwrap()).unwrap();
        assert_eq!(profile.class(0).group, vec![2]);
        assert_eq!(profile.class(0).fp[2], 1.0);
    }

    #[test]
    fn symmetric_transition() {
        let t = build_transition(NoiseModel::Symmetric, 0.2, 10).unwrap();
        for i in 0..10 {
            assert!((t.get(i, i) - 0.8).abs() < 1e-15);
            for j in (0..10).filter(|&j| j != i) {
                assert!((t.get(i, j) - 0.2 / 9.0).abs() < 1e-15);
            }
        }
        assert!(!check_asymmetric(&t, 0.2));
    }

    #[test]
    fn zero_tau_is_identity_and_not_asymmetric() {
        let profile = flip_profile(
            &SimilarityMatrix::from_rows(&[
                vec![0.0, 0.3, 0.1],
                vec![0.2, 0.0, 0.1],
                vec![0.1, 0.2, 0.0],
            ])
            .unwrap(),
        )
        .unwrap();
        let t = build_transition(NoiseModel::Asymmetric(&profile), 0.0, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        assert!(!check_asymmetric(&t, 0.0));
    }

    #[test]
    fn invalid_tau_rejected() {
        assert!(matches!(
            build_transition(NoiseModel::Symmetric, 1.5, 3),
            Err(Error::InvalidTau(_))
        ));
        assert!(build_transition(NoiseModel::Symmetric, -0.1, 3).is_err());
    }

    #[test]
    fn two_classes_can_never_be_asymmetric() {
        let t = TransitionMatrix::from_rows(vec![vec![0.8, 0.2], vec![0.2, 0.8]], 0.2).unwrap();
        assert!(!check_asymmetric(&t, 0.2));
    }

    fn onehot_profile(c: usize, target: impl Fn(usize) -> usize) -> FlipProfile {
        FlipProfile::new(
            (0..c)
                .map(|k| {
                    let mut fp = vec![0.0; c];
                    fp[target(k)] = 1.0;
                    ClassProfile {
                        ts: 0.0,
                        group: vec![target(k)],
                        fp,
                    }
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_tau_injects_nothing() {
        let y = LabelVector::new(vec![0, 1, 2, 0, 1], 3).unwrap();
        let (noisy, mask) = inject_noise(&y, &onehot_profile(3, |k| (k + 1) % 3), 0.0, 3).unwrap();
        assert_eq!(noisy, y);
        assert_eq!(mask.num_flipped(), 0);
    }

    #[test]
    fn full_tau_with_one_hot_targets() {
        let y = LabelVector::new(vec![0, 1, 2, 0, 1, 2, 2], 3).unwrap();
        let (noisy, mask) = inject_noise(&y, &onehot_profile(3, |k| (k + 1) % 3), 1.0, 9).unwrap();
        for (a, b) in y.iter().zip(noisy.iter()) {
            assert_eq!(b, (a + 1) % 3);
        }
        assert_eq!(mask.num_flipped(), 7);
    }

    #[test]
    fn inverse_cdf_never_picks_zero_mass() {
        let fp = [0.0, 0.3, 0.0, 0.7];
        assert_eq!(sample_inverse_cdf(&fp, 0.0), 1);
        assert_eq!(sample_inverse_cdf(&fp, 0.29), 1);
        assert_eq!(sample_inverse_cdf(&fp, 0.31), 3);
        assert_eq!(sample_inverse_cdf(&fp, 0.9999999999999999), 3);
    }

    #[test]
    fn profile_document_round_trip() {
        let profile = onehot_profile(3, |k| (k + 2) % 3);
        let json = serde_json::to_string(&profile.to_document(Some(0.1))).unwrap();
        let doc: ProfileDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(doc.tau, Some(0.1));
        assert_eq!(FlipProfile::from_document(doc).unwrap(), profile);
    }

    #[test]
    fn profile_validation() {
        let bad = ClassProfile {
            ts: 0.0,
            group: vec![0],
            fp: vec![1.0, 0.0],
        };
        let ok = ClassProfile {
            ts: 0.0,
            group: vec![0],
            fp: vec![1.0, 0.0],
        };
        assert!(FlipProfile::new(vec![bad, ok]).is_err());
    }
}
