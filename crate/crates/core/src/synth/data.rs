use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::LabelVector;

/// Dense `n x d` features with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    features: Vec<f64>,
    d: usize,
    labels: LabelVector,
    centers: Vec<Vec<f64>>,
    seed: u64,
}

impl SynthDataset {
    pub fn new(features: Vec<f64>, d: usize, labels: LabelVector) -> Result<Self> {
        if d == 0 || features.len() != labels.len() * d {
            return Err(Error::DimensionMismatch(format!(
                "{} feature values for {} samples of dimension {d}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(position) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { position });
        }
        Ok(Self {
            features,
            d,
            labels,
            centers: Vec::new(),
            seed: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn num_classes(&self) -> usize {
        self.labels.num_classes()
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, z: usize) -> &[f64] {
        &self.features[z * self.d..(z + 1) * self.d]
    }

    pub fn labels(&self) -> &LabelVector {
        &self.labels
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same features with different labels.
    pub fn relabeled(&self, labels: LabelVector) -> Result<Self> {
        if labels.len() != self.n() || labels.num_classes() != self.num_classes() {
            return Err(Error::ShapeMismatch("relabeling must keep n and c".into()));
        }
        Ok(Self {
            labels,
            ..self.clone()
        })
    }

    /// Samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        for &z in indices {
            features.extend_from_slice(self.row(z));
        }
        let labels = LabelVector::new(
            indices.iter().map(|&z| self.labels.get(z)).collect(),
            self.num_classes(),
        )?;
        Ok(Self {
            features,
            d: self.d,
            labels,
            centers: self.centers.clone(),
            seed: self.seed,
        })
    }

    /// First `at` samples and the rest.
    pub fn split_at(&self, at: usize) -> Result<(Self, Self)> {
        let head: Vec<usize> = (0..at).collect();
        let tail: Vec<usize> = (at..self.n()).collect();
        Ok((self.subset(&head)?, self.subset(&tail)?))
    }
}

/// Isotropic unit-variance Gaussian clusters around random centers at
/// distance `separation` from the origin. Sample `z` belongs to class
/// `z mod c`, so class sizes differ by at most one.
pub fn make_blobs(
    n: usize,
    c: usize,
    d: usize,
    separation: f64,
    seed: u64,
) -> Result<SynthDataset> {
    if c < 2 || d < 2 || n < c || !separation.is_finite() || separation < 0.0 {
        return Err(Error::InfeasibleParameters(format!(
            "make_blobs needs c >= 2, d >= 2, n >= c and finite separation >= 0 \
             (got n = {n}, c = {c}, d = {d}, separation = {separation})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..c)
        .map(|_| {
            let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE);
            dir.into_iter().map(|v| v / norm * separation).collect()
        })
        .collect();
    let mut features = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for z in 0..n {
        let k = z % c;
        labels.push(k);
        for center in &centers[k] {
            let noise: f64 = rng.sample(StandardNormal);
            features.push(center + noise);
        }
    }
    Ok(SynthDataset {
        features,
        d,
        labels: LabelVector::new(labels, c)?,
        centers,
        seed,
    })
}
