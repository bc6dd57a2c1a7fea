//! Confidence sweep: run the owning classifier at every requested target
//! period index, then extract isolated peaks and broad above-threshold runs.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    make_dip_count_sample, DftTable, DipCountSpec, HpcDatasetSpec, HpcRegime, TargetKind,
};
use crate::imaging::{crop_width_for, flatten_image, slice_and_stack, PeriodDictionary};
use crate::nn::{
    load_model, save_model, train, Loss, Model, ReuseKey, TrainConfig,
};
use crate::peaks::{find_peaks, PeakParams};
use crate::signal::Trace;
use crate::{CoreError, Real, Result};

/// One trained classifier plus the dataset spec it was built from (which
/// pins its target cells, widths and regime).
#[derive(Debug, Clone)]
pub struct HpcEntry {
    pub spec: HpcDatasetSpec,
    pub model: Model<f32>,
}

impl HpcEntry {
    /// Dictionary cells this entry evaluates.
    pub fn cells(&self) -> Vec<usize> {
        self.spec
            .targets
            .iter()
            .filter_map(|t| match t {
                TargetKind::DictCell(k) => Some(*k),
                TargetKind::Strong { .. } => None,
            })
            .collect()
    }
}

/// A regime's classifier fleet with a cell -> entry ownership map.
#[derive(Debug, Clone)]
pub struct HpcBank {
    pub regime: HpcRegime,
    pub entries: Vec<HpcEntry>,
    owner: BTreeMap<usize, usize>,
}

impl HpcBank {
    pub fn new(regime: HpcRegime, entries: Vec<HpcEntry>) -> Result<Self> {
        let mut owner = BTreeMap::new();
        for (ei, e) in entries.iter().enumerate() {
            if e.spec.regime != regime {
                return Err(CoreError::Config(format!(
                    "entry {ei} was generated for {:?}, bank is {:?}",
                    e.spec.regime, regime
                )));
            }
            for cell in e.cells() {
                owner.insert(cell, ei);
            }
        }
        Ok(HpcBank {
            regime,
            entries,
            owner,
        })
    }

    pub fn owner_of(&self, cell: usize) -> Option<&HpcEntry> {
        self.owner.get(&cell).map(|&ei| &self.entries[ei])
    }

    /// Inclusive cell range the bank covers (None when empty).
    pub fn coverage(&self) -> Option<(usize, usize)> {
        let lo = self.owner.keys().next()?;
        let hi = self.owner.keys().next_back()?;
        Some((*lo, *hi))
    }

    /// Error listing every uncovered cell of an inclusive range.
    pub fn check_coverage(&self, cell_range: (usize, usize)) -> Result<()> {
        let missing: Vec<usize> = (cell_range.0..=cell_range.1)
            .filter(|c| !self.owner.contains_key(c))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CoreError::CoverageGap(missing))
        }
    }

    /// Persist every entry as `hpc-<first cell>.model` plus a JSON sidecar
    /// holding the dataset spec.
    pub fn save(&self, dir: impl AsRef<Path>, key: &ReuseKey) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e))?;
        for e in &self.entries {
            let first = e.cells().first().copied().unwrap_or(0);
            let base = dir.join(format!("hpc-{first:05}"));
            save_model(&e.model, key, base.with_extension("model"))?;
            let spec_json = serde_json::to_string_pretty(&e.spec)
                .map_err(|err| CoreError::Config(format!("spec serialization: {err}")))?;
            std::fs::write(base.with_extension("json"), spec_json)
                .map_err(|err| CoreError::io(base.with_extension("json"), err))?;
        }
        Ok(())
    }

    /// Load every `hpc-*.model` in a directory, verifying reuse keys.
    pub fn load(dir: impl AsRef<Path>, regime: HpcRegime, expected: &ReuseKey) -> Result<Self> {
        let dir = dir.as_ref();
        let mut entries = Vec::new();
        let mut names: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| CoreError::io(dir, e))?
            .filter_map(|d| d.ok().map(|d| d.path()))
            .filter(|p| {
                p.extension().is_some_and(|x| x == "model")
                    && p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("hpc-"))
            })
            .collect();
        names.sort();
        for path in names {
            let (model, key) = load_model::<f32>(&path)?;
            key.ensure_matches(expected)?;
            let spec_path = path.with_extension("json");
            let text =
                std::fs::read_to_string(&spec_path).map_err(|e| CoreError::io(&spec_path, e))?;
            let spec: HpcDatasetSpec = serde_json::from_str(&text).map_err(|e| CoreError::Parse {
                path: spec_path.display().to_string(),
                line: 0,
                msg: format!("dataset spec: {e}"),
            })?;
            entries.push(HpcEntry { spec, model });
        }
        if entries.is_empty() {
            return Err(CoreError::MissingPrerequisite(format!(
                "no hpc-*.model files in {}",
                dir.display()
            )));
        }
        HpcBank::new(regime, entries)
    }
}

/// Per-cell classifier outputs over a sweep range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceCurve {
    pub regime: HpcRegime,
    /// First dictionary cell of the sweep; cell i of the curve is
    /// `cell_start + i`.
    pub cell_start: usize,
    /// "Target present" score per cell: one minus the no-spin class score.
    pub scores: Vec<f64>,
    /// Full sigmoid vector per cell.
    pub class_scores: Vec<Vec<f64>>,
}

impl ConfidenceCurve {
    pub fn cell_of(&self, i: usize) -> usize {
        self.cell_start + i
    }
}

/// Classify every cell of the inclusive range with its owning model. The
/// trace must already be preprocessed (denoised / recovered) as desired.
pub fn hpc_sweep(
    trace: &Trace<Real>,
    bank: &HpcBank,
    dict: &PeriodDictionary,
    cell_range: (usize, usize),
) -> Result<ConfidenceCurve> {
    bank.check_coverage(cell_range)?;
    let cells: Vec<usize> = (cell_range.0..=cell_range.1).collect();
    // Group consecutive cells by owning entry for batched inference.
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for &cell in &cells {
        let ei = *bank.owner.get(&cell).expect("coverage checked");
        match groups.last_mut() {
            Some((gei, gcells)) if *gei == ei => gcells.push(cell),
            _ => groups.push((ei, vec![cell])),
        }
    }
    let results: Result<Vec<(usize, Vec<Vec<f64>>)>> = groups
        .par_iter()
        .map(|(ei, gcells)| {
            let entry = &bank.entries[*ei];
            let wc = entry.spec.gen.width_config();
            let mut rows: Vec<Vec<f32>> = Vec::with_capacity(gcells.len());
            for &cell in gcells {
                let tp = dict.tp_of(cell);
                let width = crop_width_for(dict.a_of(cell), &wc);
                let img = slice_and_stack(
                    trace,
                    tp,
                    width,
                    entry.spec.gen.n_slices,
                    entry.spec.gen.interp,
                )?;
                let flat: Vec<f32> = flatten_image(&img).into_iter().map(|v| v as f32).collect();
                if flat.len() != entry.model.in_dim() {
                    return Err(CoreError::Shape {
                        layer: 0,
                        expected: entry.model.in_dim().to_string(),
                        got: format!("{} (cell {cell})", flat.len()),
                    });
                }
                rows.push(flat);
            }
            let mut batch = Array2::<f32>::zeros((rows.len(), entry.model.in_dim()));
            for (r, row) in rows.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    batch[(r, j)] = v;
                }
            }
            let out = entry.model.infer(&batch)?;
            let scores: Vec<Vec<f64>> = out
                .rows()
                .into_iter()
                .map(|r| r.iter().map(|&v| v as f64).collect())
                .collect();
            Ok((gcells[0], scores))
        })
        .collect();
    let mut class_scores: Vec<(usize, Vec<f64>)> = Vec::with_capacity(cells.len());
    for (first_cell, rows) in results? {
        for (off, row) in rows.into_iter().enumerate() {
            class_scores.push((first_cell + off, row));
        }
    }
    class_scores.sort_by_key(|(c, _)| *c);
    // Presence confidence: the complement of the "no target spin" class.
    // More stable than the best spin-class score, whose mass can split
    // between the one-spin and two-spin classes when they are hard to tell
    // apart.
    let scores: Vec<f64> = class_scores
        .iter()
        .map(|(_, r)| (1.0 - r.first().copied().unwrap_or(1.0)).clamp(0.0, 1.0))
        .collect();
    Ok(ConfidenceCurve {
        regime: bank.regime,
        cell_start: cell_range.0,
        scores,
        class_scores: class_scores.into_iter().map(|(_, r)| r).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakDetection {
    pub cell: usize,
    pub score: f64,
    /// Argmax class at the peak (1-based class id).
    pub class_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadDipRun {
    /// Inclusive cell range of the contiguous above-threshold run.
    pub cells: (usize, usize),
    pub score_max: f64,
}

impl BroadDipRun {
    pub fn len(&self) -> usize {
        self.cells.1 - self.cells.0 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn center(&self) -> usize {
        (self.cells.0 + self.cells.1) / 2
    }
}

/// Width (in dictionary cells) of the above-threshold halo one resolvable
/// spin produces: the classifier answers "present" anywhere within its
/// resolution of the spin.
pub fn halo_cells(regime: HpcRegime, a_step_hz: f64) -> usize {
    ((regime.resolution_hz() / a_step_hz).round() as usize).max(1)
}

/// Minimal run length that counts as a broad dip. One spin saturates about
/// two halos plus soft edges, so anything shorter than three halos is left
/// to the peak picker.
pub fn broad_dip_min_run(halo: usize) -> usize {
    3 * halo + 2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDetections {
    pub peaks: Vec<PeakDetection>,
    pub broad: Vec<BroadDipRun>,
}

/// Split a confidence curve into isolated peaks (four-condition peak
/// picking at the regime threshold) and broad above-threshold runs.
pub fn extract_detections(curve: &ConfidenceCurve, a_step_hz: f64) -> SweepDetections {
    let height = curve.regime.peak_height();
    let min_run = broad_dip_min_run(halo_cells(curve.regime, a_step_hz));
    let mut broad = Vec::new();
    let n = curve.scores.len();
    let mut i = 0;
    while i < n {
        if curve.scores[i] >= height {
            let mut j = i;
            while j + 1 < n && curve.scores[j + 1] >= height {
                j += 1;
            }
            if j - i + 1 >= min_run {
                let score_max = curve.scores[i..=j].iter().cloned().fold(0.0f64, f64::max);
                broad.push(BroadDipRun {
                    cells: (curve.cell_of(i), curve.cell_of(j)),
                    score_max,
                });
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let in_broad = |cell: usize| broad.iter().any(|b| cell >= b.cells.0 && cell <= b.cells.1);
    let peaks = find_peaks(&curve.scores, &PeakParams::confidence(height))
        .into_iter()
        .map(|i| {
            let row = &curve.class_scores[i];
            let mut class = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[class] {
                    class = c;
                }
            }
            PeakDetection {
                cell: curve.cell_of(i),
                score: curve.scores[i],
                class_id: class + 1,
            }
        })
        .filter(|p| !in_broad(p.cell))
        .collect();
    SweepDetections { peaks, broad }
}

/// Heuristic class band for a run: one spin per one to two halo widths.
pub fn broad_dip_count_band(run_len: usize, halo: usize) -> (usize, usize) {
    let halo = halo.max(1);
    let min = run_len.div_ceil(halo);
    let max = ((2 * run_len).div_ceil(halo).saturating_sub(1)).max(min);
    (min, max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadDipEstimate {
    pub cells: (usize, usize),
    pub min_count: usize,
    pub max_count: usize,
    /// Argmax class mapped to a spin count (0 = "none" class won).
    pub estimated_count: usize,
    pub class_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipCountTrainConfig {
    pub samples_per_class: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for DipCountTrainConfig {
    fn default() -> Self {
        DipCountTrainConfig {
            samples_per_class: 160,
            epochs: 16,
            batch_size: 16,
            hidden: vec![256, 128],
            seed: 0x6421,
        }
    }
}

/// Estimate how many near-identical spins hide in a broad run by training a
/// dedicated counting classifier on demand (classes: none, min..=max spins
/// with periods spread over the run).
pub fn count_broad_dip(
    trace: &Trace<Real>,
    run: &BroadDipRun,
    regime: HpcRegime,
    dict: &PeriodDictionary,
    dft: &DftTable,
    cfg: &DipCountTrainConfig,
) -> Result<BroadDipEstimate> {
    let (min_count, max_count) = broad_dip_count_band(run.len(), halo_cells(regime, dict.a_step_hz));
    let base = HpcDatasetSpec::for_regime(regime, vec![]);
    let spec = DipCountSpec {
        regime,
        index_range: run.cells,
        min_count,
        max_count,
        spin_count_range: base.spin_count_range,
        dft_fraction_range: base.dft_fraction_range,
        target_b_range_hz: regime.target_b_range_hz(),
        gen: base.gen.clone(),
    };
    let classes = spec.classes();
    let per = cfg.samples_per_class;
    let samples: Result<Vec<_>> = (0..classes * per)
        .into_par_iter()
        .map(|i| {
            let class_id = i / per + 1;
            let seed = cfg
                .seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add(i as u64);
            make_dip_count_sample(dict, dft, &spec, class_id, seed)
        })
        .collect();
    let samples = samples?;
    let in_dim = samples[0].input.len();
    let mut x = Array2::<f32>::zeros((samples.len(), in_dim));
    let mut y = Array2::<f32>::zeros((samples.len(), classes));
    for (r, s) in samples.iter().enumerate() {
        for (j, &v) in s.input.iter().enumerate() {
            x[(r, j)] = v;
        }
        for (j, &v) in s.label.iter().enumerate() {
            y[(r, j)] = v;
        }
    }
    let mut model = super::train_util::dense_classifier(in_dim, &cfg.hidden, classes)?;
    model.init(cfg.seed);
    let tc = TrainConfig {
        lr_initial: 1.5e-3,
        ..TrainConfig::new(Loss::BinaryCrossEntropy, cfg.epochs, cfg.batch_size, cfg.seed)
    };
    train(&mut model, &x, &y, &tc)?;

    let center = run.center();
    let wc = spec.gen.width_config();
    let img = slice_and_stack(
        trace,
        dict.tp_of(center),
        crop_width_for(dict.a_of(center), &wc),
        spec.gen.n_slices,
        spec.gen.interp,
    )?;
    let flat: Vec<f32> = flatten_image(&img).into_iter().map(|v| v as f32).collect();
    let mut q = Array2::<f32>::zeros((1, in_dim));
    for (j, &v) in flat.iter().enumerate() {
        q[(0, j)] = v;
    }
    let out = model.infer(&q)?;
    let class_scores: Vec<f64> = out.row(0).iter().map(|&v| v as f64).collect();
    let mut best = 0;
    for (c, &v) in class_scores.iter().enumerate() {
        if v > class_scores[best] {
            best = c;
        }
    }
    let estimated_count = spec.count_of_class(best + 1).unwrap_or(0);
    Ok(BroadDipEstimate {
        cells: run.cells,
        min_count,
        max_count,
        estimated_count,
        class_scores,
    })
}
