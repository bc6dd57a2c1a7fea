//! High-level model-set builders: given a dictionary range, generate the
//! datasets and train the classifier bank, regressor bank, or denoiser.
//! Shared by the command-line stages and the end-to-end tests.

use serde::{Deserialize, Serialize};
use ndarray::Array2;
use rayon::prelude::*;

use crate::{
    data::{
        make_denoiser_pair, make_hpc_sample, make_regression_sample, DenoiserDatasetSpec,
        DftTable, HpcDatasetSpec, HpcRegime, LabeledSample, RegressionDatasetSpec, TargetKind,
    },
    imaging::{crop_width_for, PeriodDictionary},
    nn::{train, Loss, Model, TrainConfig, TrainReport},
    pipeline::{
        metrics::{evaluate_scores, EvalMetrics},
        regress::{RegressorBank, RegressorEntry},
        sweep::{HpcBank, HpcEntry},
        train_util::{conv_denoiser, dense_classifier, dense_regressor},
    },
    CoreError, Result,
};

const SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

/// Per-item seed derivation used by every bank builder. Public so dataset
/// materialization can reproduce the exact sample streams training uses.
pub fn derived_seed(base: u64, index: u64) -> u64 {
    base.wrapping_mul(SEED_MIX).wrapping_add(index)
}

/// Stack sample inputs/labels into training matrices.
pub fn samples_to_arrays(samples: &[LabeledSample]) -> Result<(Array2<f32>, Array2<f32>)> {
    let rows = samples.len();
    if rows == 0 {
        return Err(CoreError::Config("no samples to train on".into()));
    }
    let in_dim = samples[0].input.len();
    let out_dim = samples[0].label.len();
    let mut x = Array2::<f32>::zeros((rows, in_dim));
    let mut y = Array2::<f32>::zeros((rows, out_dim));
    for (r, s) in samples.iter().enumerate() {
        if s.input.len() != in_dim || s.label.len() != out_dim {
            return Err(CoreError::Shape {
                layer: 0,
                expected: format!("{in_dim}/{out_dim}"),
                got: format!("{}/{}", s.input.len(), s.label.len()),
            });
        }
        for (j, &v) in s.input.iter().enumerate() {
            x[(r, j)] = v;
        }
        for (j, &v) in s.label.iter().enumerate() {
            y[(r, j)] = v;
        }
    }
    Ok((x, y))
}

/// Training knobs for one classifier model (and, bank-wide, for every model
/// of a bank).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HpcTrainConfig {
    pub samples_per_class: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    pub lr_initial: f64,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for HpcTrainConfig {
    fn default() -> Self {
        HpcTrainConfig {
            samples_per_class: 400,
            epochs: 12,
            batch_size: 32,
            hidden: vec![256, 128],
            lr_initial: 1.5e-3,
            val_fraction: 0.1,
            seed: 0x11c0,
        }
    }
}

/// Generate a full labeled set for a classifier spec: `per_class` samples
/// of every class, targets visited round-robin.
pub fn generate_hpc_samples(
    dict: &PeriodDictionary,
    dft: &DftTable,
    spec: &HpcDatasetSpec,
    per_class: usize,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    let n_targets = spec.targets.len().max(1);
    (0..spec.classes * per_class)
        .into_par_iter()
        .map(|i| {
            let class_id = i / per_class + 1;
            let target_pos = i % n_targets;
            make_hpc_sample(dict, dft, spec, class_id, target_pos, derived_seed(seed, i as u64))
        })
        .collect()
}

/// Fit one classifier on an already materialized sample set.
pub fn fit_hpc_entry(
    spec: HpcDatasetSpec,
    x: &Array2<f32>,
    y: &Array2<f32>,
    cfg: &HpcTrainConfig,
) -> Result<(HpcEntry, TrainReport)> {
    let mut model = dense_classifier(x.ncols(), &cfg.hidden, spec.classes)?;
    model.init(cfg.seed);
    let tc = TrainConfig {
        lr_initial: cfg.lr_initial,
        val_fraction: cfg.val_fraction,
        ..TrainConfig::new(Loss::BinaryCrossEntropy, cfg.epochs, cfg.batch_size, cfg.seed)
    };
    let report = train(&mut model, x, y, &tc)?;
    Ok((HpcEntry { spec, model }, report))
}

/// Train one classifier from its dataset spec.
pub fn train_hpc_entry(
    dict: &PeriodDictionary,
    dft: &DftTable,
    spec: HpcDatasetSpec,
    cfg: &HpcTrainConfig,
) -> Result<(HpcEntry, TrainReport)> {
    let samples = generate_hpc_samples(dict, dft, &spec, cfg.samples_per_class, cfg.seed)?;
    let (x, y) = samples_to_arrays(&samples)?;
    fit_hpc_entry(spec, &x, &y, cfg)
}

/// Evaluate a trained classifier on freshly generated samples (use a seed
/// disjoint from training).
pub fn eval_hpc_entry(
    entry: &HpcEntry,
    dict: &PeriodDictionary,
    dft: &DftTable,
    per_class: usize,
    seed: u64,
) -> Result<EvalMetrics> {
    let samples = generate_hpc_samples(dict, dft, &entry.spec, per_class, seed)?;
    let (x, y) = samples_to_arrays(&samples)?;
    let scores = entry.model.infer(&x)?;
    let score_rows: Vec<Vec<f64>> = scores
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect();
    let labels: Vec<usize> = y
        .rows()
        .into_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap()
        })
        .collect();
    Ok(evaluate_scores(&score_rows, &labels, entry.spec.classes))
}

/// Partition a cell range into per-model target groups.
///
/// Groups are contiguous, hold at most `regime.targets_per_model()` cells,
/// and never straddle the image-width threshold, so every sample of one
/// model has the same input size.
pub fn target_groups(
    regime: HpcRegime,
    cell_range: (usize, usize),
    dict: &PeriodDictionary,
) -> Vec<Vec<TargetKind>> {
    let per_model = regime.targets_per_model();
    let wc = crate::imaging::WidthConfig::default();
    let mut groups: Vec<Vec<TargetKind>> = Vec::new();
    let mut width = f64::NAN;
    for cell in cell_range.0..=cell_range.1.min(dict.len().saturating_sub(1)) {
        let w = crop_width_for(dict.a_of(cell), &wc);
        let start_new = match groups.last() {
            Some(g) => g.len() >= per_model || w != width,
            None => true,
        };
        if start_new {
            groups.push(Vec::with_capacity(per_model));
            width = w;
        }
        groups.last_mut().unwrap().push(TargetKind::DictCell(cell));
    }
    groups
}

/// Train a full classifier bank covering `cell_range`. Models train in
/// parallel; each model's seed is derived from the bank seed and its first
/// cell so the result does not depend on scheduling.
pub fn train_hpc_bank(
    regime: HpcRegime,
    cell_range: (usize, usize),
    dict: &PeriodDictionary,
    dft: &DftTable,
    cfg: &HpcTrainConfig,
) -> Result<HpcBank> {
    let groups = target_groups(regime, cell_range, dict);
    if groups.is_empty() {
        return Err(CoreError::Config(format!(
            "cell range {cell_range:?} produces no target groups"
        )));
    }
    let entries: Result<Vec<HpcEntry>> = groups
        .into_par_iter()
        .map(|targets| {
            let first = match targets[0] {
                TargetKind::DictCell(c) => c as u64,
                TargetKind::Strong { .. } => 0,
            };
            let mut spec = HpcDatasetSpec::for_regime(regime, targets);
            spec.samples_per_class = cfg.samples_per_class;
            let model_cfg = HpcTrainConfig {
                seed: derived_seed(cfg.seed, first),
                ..cfg.clone()
            };
            train_hpc_entry(dict, dft, spec, &model_cfg).map(|(e, _)| e)
        })
        .collect();
    HpcBank::new(regime, entries?)
}

/// Training knobs for the regressor bank.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressTrainConfig {
    /// Cells covered by one regression model.
    pub band_cells: usize,
    pub samples: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    pub lr_initial: f64,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for RegressTrainConfig {
    fn default() -> Self {
        RegressTrainConfig {
            band_cells: 50,
            samples: 1500,
            epochs: 16,
            batch_size: 32,
            hidden: vec![256, 128],
            lr_initial: 1.5e-3,
            val_fraction: 0.1,
            seed: 0x4e47,
        }
    }
}

/// Width-consistent bands of `band_cells` cells covering an inclusive cell
/// range, overlapping by half a band so no peak sits at a band edge
/// (the bank routes each cell to the nearest band center).
pub fn regress_bands(
    cell_range: (usize, usize),
    band_cells: usize,
    dict: &PeriodDictionary,
) -> Vec<(usize, usize)> {
    let wc = crate::imaging::WidthConfig::default();
    let hi_cap = cell_range.1.min(dict.len().saturating_sub(1));
    if cell_range.0 > hi_cap {
        return Vec::new();
    }
    // Split into maximal segments of constant crop width first: a regressor
    // cannot straddle an image-geometry change.
    let mut segments: Vec<(usize, usize)> = Vec::new();
    let mut width = f64::NAN;
    for cell in cell_range.0..=hi_cap {
        let w = crop_width_for(dict.a_of(cell), &wc);
        match segments.last_mut() {
            Some(seg) if w == width => seg.1 = cell,
            _ => {
                segments.push((cell, cell));
                width = w;
            }
        }
    }
    let stride = (band_cells / 2).max(1);
    let mut bands: Vec<(usize, usize)> = Vec::new();
    for (lo, hi) in segments {
        let len = hi - lo + 1;
        if len <= band_cells {
            bands.push((lo, hi));
            continue;
        }
        let mut start = lo;
        loop {
            let end = (start + band_cells - 1).min(hi);
            bands.push((end + 1 - band_cells.min(end + 1 - lo), end));
            if end == hi {
                break;
            }
            start += stride;
        }
    }
    bands.dedup();
    bands
}

/// Generate the labeled set for one regression band.
pub fn generate_regress_samples(
    dict: &PeriodDictionary,
    dft: &DftTable,
    spec: &RegressionDatasetSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    (0..count)
        .into_par_iter()
        .map(|i| make_regression_sample(dict, dft, spec, derived_seed(seed, i as u64)))
        .collect()
}

/// Fit one band regressor on an already materialized sample set.
pub fn fit_regressor_entry(
    spec: RegressionDatasetSpec,
    x: &Array2<f32>,
    y: &Array2<f32>,
    cfg: &RegressTrainConfig,
    seed: u64,
) -> Result<RegressorEntry> {
    let mut model = dense_regressor(x.ncols(), &cfg.hidden)?;
    model.init(seed);
    let tc = TrainConfig {
        lr_initial: cfg.lr_initial,
        val_fraction: cfg.val_fraction,
        ..TrainConfig::new(Loss::MeanSquaredError, cfg.epochs, cfg.batch_size, seed)
    };
    train(&mut model, x, y, &tc)?;
    Ok(RegressorEntry { spec, model })
}

/// Train regression models covering `cell_range` in width-consistent bands.
pub fn train_regressor_bank(
    regime: HpcRegime,
    cell_range: (usize, usize),
    dict: &PeriodDictionary,
    dft: &DftTable,
    cfg: &RegressTrainConfig,
) -> Result<RegressorBank> {
    let bands = regress_bands(cell_range, cfg.band_cells, dict);
    if bands.is_empty() {
        return Err(CoreError::Config(format!(
            "cell range {cell_range:?} produces no regression bands"
        )));
    }
    let entries: Result<Vec<RegressorEntry>> = bands
        .into_par_iter()
        .map(|band| {
            let spec = RegressionDatasetSpec::for_band(regime, band, dict);
            let seed = derived_seed(cfg.seed, band.0 as u64);
            let samples = generate_regress_samples(dict, dft, &spec, cfg.samples, seed)?;
            let (x, y) = samples_to_arrays(&samples)?;
            fit_regressor_entry(spec, &x, &y, cfg, seed)
        })
        .collect();
    Ok(RegressorBank::new(entries?))
}

/// Training knobs for the denoising autoencoder.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DenoiserTrainConfig {
    pub pairs: usize,
    pub epochs: usize,
    pub batch_size: usize,
    /// Encoder channel counts, one per downsampling stage.
    pub channels: Vec<usize>,
    pub lr_initial: f64,
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for DenoiserTrainConfig {
    fn default() -> Self {
        DenoiserTrainConfig {
            pairs: 1200,
            epochs: 20,
            batch_size: 16,
            channels: vec![8, 16],
            lr_initial: 1.5e-3,
            val_fraction: 0.1,
            seed: 0xdeb0,
        }
    }
}

/// Generate noisy/clean window pairs for the denoiser.
pub fn generate_denoiser_samples(
    dict: &PeriodDictionary,
    dft: &DftTable,
    spec: &DenoiserDatasetSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<LabeledSample>> {
    (0..count)
        .into_par_iter()
        .map(|i| make_denoiser_pair(dict, dft, spec, derived_seed(seed, i as u64)))
        .collect()
}

/// Fit the denoiser on an already materialized pair set.
pub fn fit_denoiser(
    spec: &DenoiserDatasetSpec,
    x: &Array2<f32>,
    y: &Array2<f32>,
    cfg: &DenoiserTrainConfig,
) -> Result<(Model<f32>, TrainReport)> {
    let mut model = conv_denoiser(spec.window_len, &cfg.channels)?;
    model.init(cfg.seed);
    let tc = TrainConfig {
        lr_initial: cfg.lr_initial,
        val_fraction: cfg.val_fraction,
        ..TrainConfig::new(Loss::MeanSquaredError, cfg.epochs, cfg.batch_size, cfg.seed)
    };
    let report = train(&mut model, x, y, &tc)?;
    Ok((model, report))
}

/// Train a denoiser for one regime's acquisition.
pub fn train_denoiser(
    dict: &PeriodDictionary,
    dft: &DftTable,
    spec: &DenoiserDatasetSpec,
    cfg: &DenoiserTrainConfig,
) -> Result<(Model<f32>, TrainReport)> {
    let samples = generate_denoiser_samples(dict, dft, spec, cfg.pairs, cfg.seed)?;
    let (x, y) = samples_to_arrays(&samples)?;
    fit_denoiser(spec, &x, &y, cfg)
}
