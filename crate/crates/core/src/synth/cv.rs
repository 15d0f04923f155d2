use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::data::SynthDataset;
use super::derive_seed;
use super::model::{train_dropout_softmax, TrainingConfig};
use crate::error::{Error, Result};
use crate::tensor::{LabelVector, McdStack, ProbMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OosConfig {
    pub training: TrainingConfig,
    /// Forward passes `F` for the MCD stack.
    pub passes: usize,
    pub seed: u64,
}

/// Fold index per sample. Each class is shuffled and dealt round-robin,
/// continuing the deal across classes, so every fold holds within one
/// sample of its share of each class and of the total.
pub fn stratified_folds(labels: &LabelVector, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > labels.len() {
        return Err(Error::InfeasibleStratification(format!(
            "need 2 <= k <= n, got k = {k}, n = {}",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut dealt = 0;
    for mut members in labels.class_members() {
        members.shuffle(&mut rng);
        for z in members {
            folds[z] = dealt % k;
            dealt += 1;
        }
    }
    Ok(folds)
}

/// Out-of-sample softmax and MCD probabilities from stratified k-fold
/// cross-validation on `noisy_labels`. Each fold model is trained without
/// the fold it predicts.
pub fn oos_probabilities(
    data: &SynthDataset,
    noisy_labels: &LabelVector,
    k: usize,
    cfg: &OosConfig,
) -> Result<(ProbMatrix, McdStack)> {
    let data = data.relabeled(noisy_labels.clone())?;
    let folds = stratified_folds(noisy_labels, k, derive_seed(cfg.seed, &[0]))?;
    let (n, c) = (data.n(), data.num_classes());

    let per_fold = (0..k)
        .into_par_iter()
        .map(|f| {
            let (held, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&z| folds[z] == f);
            let training = cfg
                .training
                .with_seed(derive_seed(cfg.seed, &[1, f as u64]));
            let model = train_dropout_softmax(&data.subset(&train)?, &training)?;
            let held_data = data.subset(&held)?;
            let soft = model.predict_softmax(held_data.features())?;
            let stack = model.predict_mcd(
                held_data.features(),
                cfg.passes,
                derive_seed(cfg.seed, &[2, f as u64]),
            )?;
            Ok((held, soft, stack))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut soft_values = vec![0.0; n * c];
    let mut pass_values = vec![vec![0.0; n * c]; cfg.passes];
    for (held, soft, stack) in per_fold {
        for (row, &z) in held.iter().enumerate() {
            soft_values[z * c..(z + 1) * c].copy_from_slice(soft.row(row));
            for (dst, pass) in pass_values.iter_mut().zip(stack.passes()) {
                dst[z * c..(z + 1) * c].copy_from_slice(pass.row(row));
            }
        }
    }
    let stack = pass_values
        .into_iter()
        .map(|v| ProbMatrix::new(n, c, v))
        .collect::<Result<Vec<_>>>()?;
    Ok((ProbMatrix::new(n, c, soft_values)?, McdStack::new(stack)?))
}
