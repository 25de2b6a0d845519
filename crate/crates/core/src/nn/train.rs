use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_update, AdamParams, AdamState, MlpModel};
use crate::data::{split_dataset, Dataset};
use crate::error::{Error, Result};

/// Per-epoch learning rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LrSchedule {
    Constant,
    /// Half-cosine decay from the initial rate to `final_lr` over the run.
    Cosine { final_lr: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub validation_fraction: f64,
    pub schedule: LrSchedule,
}

impl TrainingConfig {
    /// Single-workstation settings for the 1/8-width model.
    pub fn desk() -> Self {
        TrainingConfig {
            learning_rate: 3e-4,
            batch_size: 64,
            epochs: 300,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 42,
            validation_fraction: 0.2,
            schedule: LrSchedule::Cosine { final_lr: 1e-5 },
        }
    }

    /// Full-size reference settings (6.5M samples, 8000 epochs).
    pub fn paper() -> Self {
        TrainingConfig {
            learning_rate: 5e-8,
            batch_size: 512,
            epochs: 8000,
            schedule: LrSchedule::Constant,
            ..Self::desk()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad(format!("decay rates must lie in (0, 1), got {} and {}", self.beta1, self.beta2));
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1".into());
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!("validation fraction must lie in (0, 1), got {}", self.validation_fraction));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        Ok(())
    }

    fn rate_at(&self, epoch: usize) -> f64 {
        match self.schedule {
            LrSchedule::Constant => self.learning_rate,
            LrSchedule::Cosine { final_lr } => {
                let progress = epoch as f64 / self.epochs.max(1) as f64;
                final_lr + 0.5 * (self.learning_rate - final_lr) * (1.0 + (std::f64::consts::PI * progress).cos())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    /// Entry 0 is the untrained model; entry `e` follows epoch `e`. Train
    /// loss after epoch `e` is the running mean over that epoch's batches.
    pub history: Vec<EpochLoss>,
    pub train_rows: usize,
    pub validation_rows: usize,
}

/// `(1/(D·N)) Σ ‖y - ŷ‖²`.
pub fn loss_mse(pred: ArrayView2<f64>, truth: ArrayView2<f64>) -> Result<f64> {
    if pred.dim() != truth.dim() {
        return Err(Error::ShapeMismatch { expected: truth.len(), actual: pred.len() });
    }
    if pred.is_empty() {
        return Err(Error::EmptyDataset("loss over zero samples"));
    }
    let sum: f64 = pred.iter().zip(truth.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / pred.len() as f64)
}

fn dataset_mse(model: &MlpModel, x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64> {
    // Chunked to bound memory on large sweeps.
    const CHUNK: usize = 4096;
    let mut sum = 0.0;
    for start in (0..x.nrows()).step_by(CHUNK) {
        let end = (start + CHUNK).min(x.nrows());
        let pred = model.forward_batch(x.slice(ndarray::s![start..end, ..]))?;
        let truth = y.slice(ndarray::s![start..end, ..]);
        sum += pred.iter().zip(truth.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(sum / (x.nrows() * y.ncols()) as f64)
}

/// Mini-batch Adam training with a seeded split and seeded per-epoch
/// shuffles. Targets are multiplied by the model's label scale first.
pub fn train(model: &mut MlpModel, dataset: &Dataset, cfg: &TrainingConfig) -> Result<TrainingOutcome> {
    cfg.validate()?;
    if dataset.len() == 0 {
        return Err(Error::EmptyDataset("training set is empty"));
    }
    if dataset.targets.ncols() != model.output_dim() {
        return Err(Error::ShapeMismatch { expected: model.output_dim(), actual: dataset.targets.ncols() });
    }
    let (tr, va) = split_dataset(dataset, 1.0 - cfg.validation_fraction, cfg.seed)?;
    let scale = model.label_scale();
    let x_tr = tr.inputs;
    let y_tr = tr.targets.mapv(|v| v * scale);
    let x_va = va.inputs;
    let y_va = va.targets.mapv(|v| v * scale);

    let mut states: Vec<(AdamState, AdamState)> = model
        .layers()
        .iter()
        .map(|l| (AdamState::new(l.weight.len()), AdamState::new(l.bias.len())))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7261_696e);
    let mut order: Vec<usize> = (0..x_tr.nrows()).collect();
    let out_dim = model.output_dim() as f64;

    let mut history = vec![EpochLoss {
        epoch: 0,
        train_mse: dataset_mse(model, x_tr.view(), y_tr.view())?,
        val_mse: dataset_mse(model, x_va.view(), y_va.view())?,
    }];
    for epoch in 1..=cfg.epochs {
        let params = AdamParams {
            learning_rate: cfg.rate_at(epoch - 1),
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.epsilon,
        };
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let xb = x_tr.select(Axis(0), idx);
            let yb = y_tr.select(Axis(0), idx);
            let (pred, cache) = model.forward_cached(xb.view())?;
            let diff: Array2<f64> = &pred - &yb;
            sum += diff.iter().map(|d| d * d).sum::<f64>();
            let upstream = diff * (2.0 / (out_dim * idx.len() as f64));
            let grads = model.backward(&cache, upstream.view(), true)?;
            for (i, layer) in model.layers_mut().iter_mut().enumerate() {
                let gw = grads.weights[i].as_standard_layout();
                let w = layer.weight.as_slice_mut().expect("weights are contiguous");
                adam_update(w, gw.as_slice().expect("contiguous"), &mut states[i].0, &params);
                let b = layer.bias.as_slice_mut().expect("bias is contiguous");
                adam_update(b, grads.biases[i].as_slice().expect("contiguous"), &mut states[i].1, &params);
            }
        }
        let train_mse = sum / (x_tr.nrows() as f64 * out_dim);
        let val_mse = dataset_mse(model, x_va.view(), y_va.view())?;
        if !train_mse.is_finite() || !val_mse.is_finite() {
            return Err(Error::Diverged { epoch, loss: train_mse });
        }
        history.push(EpochLoss { epoch, train_mse, val_mse });
    }
    Ok(TrainingOutcome { history, train_rows: x_tr.nrows(), validation_rows: x_va.nrows() })
}
