//! Mini-batch training loop: shuffled epochs, per-epoch multiplicative lr
//! decay, train/val loss history, and a last-good checkpoint that training
//! falls back to if the loss stops being finite.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::nn::loss::{loss_value_grad, Loss};
use crate::nn::model::Model;
use crate::nn::opt::{AdaBound, AdaBoundConfig};
use crate::{CoreError, Result, Scalar};

pub const DEFAULT_LR_INITIAL: f64 = 1.5e-4;
pub const DEFAULT_LR_DECAY: f64 = 0.25;
pub const LR_DECAY_RANGE: (f64, f64) = (0.25, 0.5);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: Loss,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_initial: f64,
    /// Per-epoch multiplicative decay: lr_e = lr_initial * (1 - d)^e.
    pub lr_decay_per_epoch: f64,
    pub seed: u64,
    /// Fraction of the data held out for the per-epoch validation loss.
    pub val_fraction: f64,
    pub optimizer: AdaBoundConfig,
}

impl TrainConfig {
    pub fn new(loss: Loss, epochs: usize, batch_size: usize, seed: u64) -> Self {
        TrainConfig {
            loss,
            epochs,
            batch_size,
            lr_initial: DEFAULT_LR_INITIAL,
            lr_decay_per_epoch: DEFAULT_LR_DECAY,
            seed,
            val_fraction: 0.1,
            optimizer: AdaBoundConfig::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lr_initial > 0.0) {
            return Err(CoreError::Config("lr_initial must be positive".into()));
        }
        if self.lr_decay_per_epoch < LR_DECAY_RANGE.0 || self.lr_decay_per_epoch > LR_DECAY_RANGE.1
        {
            return Err(CoreError::Config(format!(
                "lr_decay_per_epoch {} outside [{}, {}]",
                self.lr_decay_per_epoch, LR_DECAY_RANGE.0, LR_DECAY_RANGE.1
            )));
        }
        if self.batch_size == 0 {
            return Err(CoreError::Config("batch_size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(CoreError::Config("val_fraction must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub history: Vec<EpochStats>,
    /// Loss became non-finite; weights were restored to the last finite
    /// epoch (or the initial state) and training stopped early.
    pub diverged: bool,
    pub restored_epoch: Option<usize>,
}

fn gather_rows<S: Scalar>(data: &Array2<S>, idx: &[usize]) -> Array2<S> {
    let mut out = Array2::<S>::zeros((idx.len(), data.ncols()));
    for (r, &i) in idx.iter().enumerate() {
        out.row_mut(r).assign(&data.row(i));
    }
    out
}

/// Train `model` in place. Deterministic per seed: the shuffle stream, batch
/// order and optimizer state depend only on `cfg` and the data.
pub fn train<S: Scalar>(
    model: &mut Model<S>,
    inputs: &Array2<S>,
    labels: &Array2<S>,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    let n = inputs.nrows();
    if n == 0 {
        return Err(CoreError::Config("training set is empty".into()));
    }
    if labels.nrows() != n {
        return Err(CoreError::Config(format!(
            "inputs have {n} rows but labels have {}",
            labels.nrows()
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_val = ((n as f64) * cfg.val_fraction).round() as usize;
    let n_val = n_val.min(n.saturating_sub(1));
    let (val_idx, train_idx) = order.split_at(n_val);
    let val_x = gather_rows(inputs, val_idx);
    let val_y = gather_rows(labels, val_idx);
    let mut train_order: Vec<usize> = train_idx.to_vec();

    let mut opt = AdaBound::new(cfg.lr_initial, cfg.optimizer);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut good = model.snapshot();
    let mut good_epoch = None;
    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_initial * (1.0 - cfg.lr_decay_per_epoch).powi(epoch as i32);
        train_order.shuffle(&mut rng);
        let mut total = 0.0f64;
        let mut seen = 0usize;
        for chunk in train_order.chunks(cfg.batch_size) {
            let x = gather_rows(inputs, chunk);
            let y = gather_rows(labels, chunk);
            let pred = model.forward(&x)?;
            let (value, grad) = loss_value_grad(cfg.loss, &pred, &y);
            model.backward(&grad)?;
            let mut params = model.params_mut();
            opt.step(&mut params, lr);
            total += value * chunk.len() as f64;
            seen += chunk.len();
        }
        let train_loss = total / seen.max(1) as f64;
        let val_loss = if n_val > 0 {
            let pred = model.infer(&val_x)?;
            Some(loss_value_grad(cfg.loss, &pred, &val_y).0)
        } else {
            None
        };
        history.push(EpochStats {
            epoch,
            lr,
            train_loss,
            val_loss,
        });
        let finite =
            train_loss.is_finite() && val_loss.map_or(true, |v| v.is_finite()) && model.all_finite();
        if !finite {
            model.restore(&good);
            return Ok(TrainReport {
                history,
                diverged: true,
                restored_epoch: good_epoch,
            });
        }
        good = model.snapshot();
        good_epoch = Some(epoch);
    }
    Ok(TrainReport {
        history,
        diverged: false,
        restored_epoch: None,
    })
}
