//! Linear softmax classifier with inverted dropout on its input features.
//! Dropout stays active at inference in MCD mode, which is what makes the
//! forward passes stochastic.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::SynthDataset;
use crate::error::{Error, Result};
use crate::tensor::{McdStack, ProbMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub dropout_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.1,
            batch_size: 32,
            dropout_rate: 0.5,
            weight_decay: 0.0,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InfeasibleParameters(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        if self.batch_size == 0 || !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InfeasibleParameters(
                "batch size and learning rate must be positive".into(),
            ));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(Error::InfeasibleParameters(
                "weight decay must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropoutSoftmaxModel {
    /// Row-major `d x c`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub dropout_rate: f64,
    d: usize,
    c: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictMode {
    /// Single deterministic pass with dropout off.
    Softmax,
    /// `passes` stochastic passes with fresh dropout masks.
    Mcd { passes: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Softmax(ProbMatrix),
    Mcd(McdStack),
}

impl DropoutSoftmaxModel {
    pub fn zeros(d: usize, c: usize, dropout_rate: f64) -> Self {
        Self {
            weights: vec![0.0; d * c],
            bias: vec![0.0; c],
            dropout_rate,
            d,
            c,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn c(&self) -> usize {
        self.c
    }

    /// Writes softmax(W^T x + b) into `out`.
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for (xi, w_row) in x.iter().zip(self.weights.chunks_exact(self.c)) {
            if *xi != 0.0 {
                for (o, w) in out.iter_mut().zip(w_row) {
                    *o += xi * w;
                }
            }
        }
        softmax_in_place(out);
    }

    fn dropped(&self, x: &[f64], rng: &mut ChaCha8Rng, buf: &mut [f64]) {
        let keep = 1.0 - self.dropout_rate;
        for (b, &v) in buf.iter_mut().zip(x) {
            *b = if self.dropout_rate > 0.0 && rng.random::<f64>() < self.dropout_rate {
                0.0
            } else {
                v / keep
            };
        }
    }

    fn check_features(&self, features: &[f64]) -> Result<usize> {
        if !features.len().is_multiple_of(self.d) {
            return Err(Error::DimensionMismatch(format!(
                "{} feature values are not a multiple of d = {}",
                features.len(),
                self.d
            )));
        }
        Ok(features.len() / self.d)
    }

    pub fn predict_softmax(&self, features: &[f64]) -> Result<ProbMatrix> {
        let n = self.check_features(features)?;
        let mut values = vec![0.0; n * self.c];
        for (x, out) in features
            .chunks_exact(self.d)
            .zip(values.chunks_exact_mut(self.c))
        {
            self.forward(x, out);
        }
        ProbMatrix::new(n, self.c, values)
    }

    pub fn predict_mcd(&self, features: &[f64], passes: usize, seed: u64) -> Result<McdStack> {
        let n = self.check_features(features)?;
        if passes == 0 {
            return Err(Error::InfeasibleParameters(
                "MCD needs at least one pass".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut buf = vec![0.0; self.d];
        let mut stack = Vec::with_capacity(passes);
        for _ in 0..passes {
            let mut values = vec![0.0; n * self.c];
            for (x, out) in features
                .chunks_exact(self.d)
                .zip(values.chunks_exact_mut(self.c))
            {
                self.dropped(x, &mut rng, &mut buf);
                self.forward(&buf, out);
            }
            stack.push(ProbMatrix::new(n, self.c, values)?);
        }
        McdStack::new(stack)
    }

    pub fn predict(&self, features: &[f64], mode: PredictMode) -> Result<Prediction> {
        Ok(match mode {
            PredictMode::Softmax => Prediction::Softmax(self.predict_softmax(features)?),
            PredictMode::Mcd { passes, seed } => {
                Prediction::Mcd(self.predict_mcd(features, passes, seed)?)
            }
        })
    }

    /// Fraction of samples whose argmax matches the label.
    pub fn accuracy(&self, data: &SynthDataset) -> Result<f64> {
        let p = self.predict_softmax(data.features())?;
        let predicted = crate::uncertainty::mcd_classify(&p);
        let correct = predicted
            .iter()
            .zip(data.labels().iter())
            .filter(|(a, b)| **a == *b)
            .count();
        Ok(correct as f64 / data.n() as f64)
    }
}

fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    v.iter_mut().for_each(|x| *x /= total);
}

/// Mini-batch gradient descent on cross-entropy. Each sample in each step
/// gets a fresh feature dropout mask; the last partial batch of every
/// epoch is dropped.
pub fn train_dropout_softmax(
    data: &SynthDataset,
    cfg: &TrainingConfig,
) -> Result<DropoutSoftmaxModel> {
    cfg.validate()?;
    let (d, c) = (data.d(), data.num_classes());
    let mut model = DropoutSoftmaxModel::zeros(d, c, cfg.dropout_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.n()).collect();
    let batches = data.n() / cfg.batch_size;

    let mut x = vec![0.0; d];
    let mut probs = vec![0.0; c];
    let mut grad_w = vec![0.0; d * c];
    let mut grad_b = vec![0.0; c];
    let scale = cfg.learning_rate / cfg.batch_size as f64;
    let decay = 1.0 - cfg.learning_rate * cfg.weight_decay;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss = 0.0;
        for batch in order.chunks_exact(cfg.batch_size).take(batches) {
            grad_w.iter_mut().for_each(|g| *g = 0.0);
            grad_b.iter_mut().for_each(|g| *g = 0.0);
            for &z in batch {
                model.dropped(data.row(z), &mut rng, &mut x);
                model.forward(&x, &mut probs);
                let label = data.labels().get(z);
                loss -= probs[label].max(f64::MIN_POSITIVE).ln();
                probs[label] -= 1.0;
                for (xi, g_row) in x.iter().zip(grad_w.chunks_exact_mut(c)) {
                    if *xi != 0.0 {
                        for (g, p) in g_row.iter_mut().zip(&probs) {
                            *g += xi * p;
                        }
                    }
                }
                for (g, p) in grad_b.iter_mut().zip(&probs) {
                    *g += p;
                }
            }
            for (w, g) in model.weights.iter_mut().zip(&grad_w) {
                *w = *w * decay - scale * g;
            }
            for (b, g) in model.bias.iter_mut().zip(&grad_b) {
                *b -= scale * g;
            }
        }
        if !loss.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Divergence { epoch });
        }
    }
    Ok(model)
}
