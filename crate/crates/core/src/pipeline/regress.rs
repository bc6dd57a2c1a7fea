//! Regression stage: infer the (A, B) pair behind a detected peak, then
//! project A onto the cell's period contour.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;

use crate::data::RegressionDatasetSpec;
use crate::imaging::{crop_width_for, flatten_image, slice_and_stack, PeriodDictionary};
use crate::nn::{load_model, save_model, Model, ReuseKey};
use crate::signal::{solve_a_for_period, Trace};
use crate::{CoreError, Real, Result};

#[derive(Debug, Clone)]
pub struct RegressorEntry {
    pub spec: RegressionDatasetSpec,
    pub model: Model<f32>,
}

/// Regressors keyed by the contiguous cell band each one was trained for.
#[derive(Debug, Clone, Default)]
pub struct RegressorBank {
    pub entries: Vec<RegressorEntry>,
    owner: BTreeMap<usize, usize>,
}

impl RegressorBank {
    pub fn new(entries: Vec<RegressorEntry>) -> Self {
        // Bands overlap; route each cell to the entry whose center is
        // nearest so peaks never sit at the edge of their regressor's
        // training range.
        let mut owner = BTreeMap::new();
        for (ei, e) in entries.iter().enumerate() {
            let (lo, hi) = e.spec.cell_range;
            for cell in lo..=hi {
                let dist = (2 * cell).abs_diff(lo + hi);
                match owner.get(&cell) {
                    Some(&(best, _)) if best <= dist => {}
                    _ => {
                        owner.insert(cell, (dist, ei));
                    }
                }
            }
        }
        let owner = owner.into_iter().map(|(c, (_, ei))| (c, ei)).collect();
        RegressorBank { entries, owner }
    }

    pub fn owner_of(&self, cell: usize) -> Option<&RegressorEntry> {
        self.owner.get(&cell).map(|&ei| &self.entries[ei])
    }

    pub fn save(&self, dir: impl AsRef<Path>, key: &ReuseKey) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e))?;
        for e in &self.entries {
            let base = dir.join(format!("regress-{:05}", e.spec.cell_range.0));
            save_model(&e.model, key, base.with_extension("model"))?;
            let spec_json = serde_json::to_string_pretty(&e.spec)
                .map_err(|err| CoreError::Config(format!("spec serialization: {err}")))?;
            std::fs::write(base.with_extension("json"), spec_json)
                .map_err(|err| CoreError::io(base.with_extension("json"), err))?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>, expected: &ReuseKey) -> Result<Self> {
        let dir = dir.as_ref();
        let mut entries = Vec::new();
        let mut names: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| CoreError::io(dir, e))?
            .filter_map(|d| d.ok().map(|d| d.path()))
            .filter(|p| {
                p.extension().is_some_and(|x| x == "model")
                    && p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("regress-"))
            })
            .collect();
        names.sort();
        for path in names {
            let (model, key) = load_model::<f32>(&path)?;
            key.ensure_matches(expected)?;
            let spec_path = path.with_extension("json");
            let text =
                std::fs::read_to_string(&spec_path).map_err(|e| CoreError::io(&spec_path, e))?;
            let spec: RegressionDatasetSpec =
                serde_json::from_str(&text).map_err(|e| CoreError::Parse {
                    path: spec_path.display().to_string(),
                    line: 0,
                    msg: format!("dataset spec: {e}"),
                })?;
            entries.push(RegressorEntry { spec, model });
        }
        Ok(RegressorBank::new(entries))
    }
}

/// Regress (A, B) for a detected cell from the measured trace. The returned
/// A is re-solved so that TP(A, B) lands exactly on the cell's contour.
pub fn regress_ab(
    trace: &Trace<Real>,
    entry: &RegressorEntry,
    dict: &PeriodDictionary,
    cell: usize,
) -> Result<(f64, f64)> {
    let wc = entry.spec.gen.width_config();
    let tp = dict.tp_of(cell);
    let img = slice_and_stack(
        trace,
        tp,
        crop_width_for(dict.a_of(cell), &wc),
        entry.spec.gen.n_slices,
        entry.spec.gen.interp,
    )?;
    let flat: Vec<f32> = flatten_image(&img).into_iter().map(|v| v as f32).collect();
    if flat.len() != entry.model.in_dim() {
        return Err(CoreError::Shape {
            layer: 0,
            expected: entry.model.in_dim().to_string(),
            got: flat.len().to_string(),
        });
    }
    let mut x = Array2::<f32>::zeros((1, flat.len()));
    for (j, &v) in flat.iter().enumerate() {
        x[(0, j)] = v;
    }
    let out = entry.model.infer(&x)?;
    let (a_raw, b_raw) = entry.spec.denormalize_label([out[(0, 0)], out[(0, 1)]]);
    let (blo, bhi) = entry.spec.b_range_hz;
    let b = b_raw.clamp(blo, bhi);
    let a = solve_a_for_period(tp, b, dict.larmor_hz).unwrap_or(a_raw);
    Ok((a, b))
}

/// Fallback estimate when no regressor covers a cell: take the middle of
/// the regime's B search band and solve A on the contour.
pub fn contour_fallback(
    dict: &PeriodDictionary,
    cell: usize,
    b_range_hz: (f64, f64),
) -> (f64, f64) {
    let b = 0.5 * (b_range_hz.0 + b_range_hz.1);
    let a = solve_a_for_period(dict.tp_of(cell), b, dict.larmor_hz).unwrap_or(dict.a_of(cell));
    (a, b)
}
