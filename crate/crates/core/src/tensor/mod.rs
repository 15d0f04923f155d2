//! Numeric containers shared by every detector: given labels, predicted
//! probability matrices, Monte Carlo dropout stacks, corruption masks and
//! flag sets.
//!
//! Class indices are 0-based. All probabilities are `f64`.

mod io;

pub use io::{
    decode_binary, encode_binary, read_labels_csv, read_tensor, write_tensor, Tensor, TensorFormat,
    TensorRef, MAGIC,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for row normalization checks.
pub const ROW_SUM_TOL: f64 = 1e-6;

/// Given (possibly noisy) labels together with the number of classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    num_classes: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidTensor(format!(
                "num_classes must be >= 2, got {num_classes}"
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidTensor("label vector is empty".into()));
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(Error::InvalidLabel {
                index,
                label,
                num_classes,
            });
        }
        Ok(Self {
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn get(&self, index: usize) -> usize {
        self.labels[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().copied()
    }

    /// Number of samples carrying each label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Sample indices grouped by label, ascending within each class.
    pub fn class_members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.num_classes];
        for (z, &l) in self.labels.iter().enumerate() {
            members[l].push(z);
        }
        members
    }

    /// Errors with the first class that has no samples.
    pub fn require_all_classes(&self) -> Result<()> {
        match self.class_counts().iter().position(|&n| n == 0) {
            Some(class) => Err(Error::EmptyClass { class }),
            None => Ok(()),
        }
    }

    /// Keeps only the samples whose index is not in `removed`.
    pub fn without(&self, removed: &FlagSet) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(z, _)| !removed.contains(*z))
            .map(|(_, &l)| l)
            .collect()
    }
}

/// A row violation reported by [`validate_prob_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RowViolation {
    pub row: usize,
    pub sum: f64,
}

/// Row-major `n x c` matrix of predicted class probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    n: usize,
    c: usize,
    values: Vec<f64>,
}

impl ProbMatrix {
    /// Checks shape and finiteness only; use [`validate_prob_matrix`] for
    /// the normalization invariant.
    pub fn new(n: usize, c: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || c == 0 {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimensions must be positive, got {n}x{c}"
            )));
        }
        if values.len() != n * c {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for {n}x{c}, got {}",
                n * c,
                values.len()
            )));
        }
        if let Some(position) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { position });
        }
        Ok(Self { n, c, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != c) {
            return Err(Error::DimensionMismatch(format!(
                "row {bad} has {} columns, expected {c}",
                rows[bad].len()
            )));
        }
        Self::new(n, c, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.c + col]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.c..(row + 1) * self.c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.c)
    }

    pub(crate) fn ensure_matches(&self, labels: &LabelVector) -> Result<()> {
        if self.n != labels.len() || self.c != labels.num_classes() {
            return Err(Error::ShapeMismatch(format!(
                "probabilities are {}x{}, labels have n = {} and c = {}",
                self.n,
                self.c,
                labels.len(),
                labels.num_classes()
            )));
        }
        Ok(())
    }
}

/// Reports every row whose sum deviates from 1 by more than `tol` or that
/// holds an entry outside `[-tol, 1 + tol]`.
pub fn validate_prob_matrix(p: &ProbMatrix, tol: f64) -> Vec<RowViolation> {
    p.rows()
        .enumerate()
        .filter_map(|(row, values)| {
            let sum: f64 = values.iter().sum();
            let out_of_range = values.iter().any(|&v| v < -tol || v > 1.0 + tol);
            ((sum - 1.0).abs() > tol || out_of_range).then_some(RowViolation { row, sum })
        })
        .collect()
}

/// `F` forward-pass probability matrices of identical shape.
#[derive(Debug, Clone, PartialEq)]
pub struct McdStack {
    passes: Vec<ProbMatrix>,
}

impl McdStack {
    pub fn new(passes: Vec<ProbMatrix>) -> Result<Self> {
        let first = passes
            .first()
            .ok_or_else(|| Error::InvalidTensor("stack needs at least one pass".into()))?;
        let (n, c) = (first.n(), first.c());
        if let Some(f) = passes.iter().position(|p| p.n() != n || p.c() != c) {
            return Err(Error::DimensionMismatch(format!(
                "pass {f} is {}x{}, expected {n}x{c}",
                passes[f].n(),
                passes[f].c()
            )));
        }
        Ok(Self { passes })
    }

    pub fn passes(&self) -> &[ProbMatrix] {
        &self.passes
    }

    pub fn num_passes(&self) -> usize {
        self.passes.len()
    }

    pub fn n(&self) -> usize {
        self.passes[0].n()
    }

    pub fn c(&self) -> usize {
        self.passes[0].c()
    }
}

/// Which samples had their label flipped, plus the labels before flipping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptionMask {
    flipped: Vec<bool>,
    original_labels: LabelVector,
}

impl CorruptionMask {
    /// Derives the mask by comparing original against noisy labels.
    pub fn from_labels(original: &LabelVector, noisy: &LabelVector) -> Result<Self> {
        if original.len() != noisy.len() || original.num_classes() != noisy.num_classes() {
            return Err(Error::ShapeMismatch(format!(
                "original labels (n = {}, c = {}) vs noisy labels (n = {}, c = {})",
                original.len(),
                original.num_classes(),
                noisy.len(),
                noisy.num_classes()
            )));
        }
        let flipped = original
            .iter()
            .zip(noisy.iter())
            .map(|(a, b)| a != b)
            .collect();
        Ok(Self {
            flipped,
            original_labels: original.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.flipped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flipped.is_empty()
    }

    pub fn is_flipped(&self, index: usize) -> bool {
        self.flipped[index]
    }

    pub fn flipped(&self) -> &[bool] {
        &self.flipped
    }

    pub fn num_flipped(&self) -> usize {
        self.flipped.iter().filter(|&&f| f).count()
    }

    pub fn flipped_indices(&self) -> FlagSet {
        self.flipped
            .iter()
            .enumerate()
            .filter_map(|(z, &f)| f.then_some(z))
            .collect()
    }

    pub fn original_labels(&self) -> &LabelVector {
        &self.original_labels
    }
}

#[derive(Serialize, Deserialize)]
struct MaskRecord {
    num_classes: usize,
    original_labels: Vec<usize>,
    flipped: Vec<usize>,
}

impl Serialize for CorruptionMask {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MaskRecord {
            num_classes: self.original_labels.num_classes(),
            original_labels: self.original_labels.as_slice().to_vec(),
            flipped: self.flipped_indices().into_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CorruptionMask {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let record = MaskRecord::deserialize(deserializer)?;
        let original_labels = LabelVector::new(record.original_labels, record.num_classes)
            .map_err(D::Error::custom)?;
        let mut flipped = vec![false; original_labels.len()];
        for z in record.flipped {
            *flipped
                .get_mut(z)
                .ok_or_else(|| D::Error::custom(format!("flipped index {z} out of range")))? = true;
        }
        Ok(Self {
            flipped,
            original_labels,
        })
    }
}

/// Sorted, de-duplicated sample indices flagged as potential label errors.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "FlagRecord")]
pub struct FlagSet {
    flagged: Vec<usize>,
}

#[derive(Deserialize)]
struct FlagRecord {
    flagged: Vec<usize>,
}

impl From<FlagRecord> for FlagSet {
    fn from(record: FlagRecord) -> Self {
        record.flagged.into_iter().collect()
    }
}

impl FlagSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.flagged.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flagged.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.flagged.binary_search(&index).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.flagged
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.flagged
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.flagged.iter().copied()
    }

    pub fn is_subset(&self, other: &FlagSet) -> bool {
        self.iter().all(|z| other.contains(z))
    }

    /// Largest index, if any; used to check against a sample count.
    pub fn max_index(&self) -> Option<usize> {
        self.flagged.last().copied()
    }
}

impl FromIterator<usize> for FlagSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut flagged: Vec<usize> = iter.into_iter().collect();
        flagged.sort_unstable();
        flagged.dedup();
        Self { flagged }
    }
}
