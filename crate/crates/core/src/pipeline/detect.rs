//! The full detection pipeline, from raw traces to a spin report.
//!
//! Stages: optional denoising of noisy traces, decoherence fit and envelope
//! recovery, one classifier sweep per regime, peak / broad-dip extraction,
//! cross-regime merging, per-cell (A, B) regression, and joint fine tuning
//! on the recovered N = 32 trace.

use serde::{Deserialize, Serialize};
use crate::{
    data::{DftTable, HpcRegime},
    error::CoreError,
    imaging::PeriodDictionary,
    nn::{Model, ReuseKey},
    pipeline::{
        denoise::denoise,
        finetune::{fine_tune, FineTuneConfig, FineTuneOutcome},
        regress::{contour_fallback, regress_ab, RegressorBank},
        report::{
            BroadDipSummary, DetectionGroup, DetectionReport, MergedSpin, RegimeDetections,
            ReportedSpin, REPORT_SCHEMA_VERSION,
        },
        sweep::{
            count_broad_dip, extract_detections, hpc_sweep, ConfidenceCurve, DipCountTrainConfig,
            HpcBank, SweepDetections,
        },
    },
    signal::{
        fit_decoherence, recover_decoherence, target_period, DecoherenceFitOptions, SpinParams,
        Trace, TraceKind, DEFAULT_ENVELOPE_FLOOR,
    },
    Real, Result,
};

use super::report::merge_detections;

/// Classifier bank plus matching regressors for one regime.
pub struct RegimeModels {
    pub bank: HpcBank,
    pub regressors: RegressorBank,
}

/// Everything the pipeline needs to run: three regime model sets and
/// (optionally) a denoiser per pulse number.
pub struct PipelineModels {
    pub n32_high: RegimeModels,
    pub n32_low: RegimeModels,
    pub n256: RegimeModels,
    pub denoiser_n32: Option<Model<f32>>,
    pub denoiser_n256: Option<Model<f32>>,
}

impl PipelineModels {
    fn regime(&self, regime: HpcRegime) -> &RegimeModels {
        match regime {
            HpcRegime::N32HighB => &self.n32_high,
            HpcRegime::N32LowB => &self.n32_low,
            HpcRegime::N256 => &self.n256,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionConfig {
    /// Inclusive dictionary-cell range to sweep.
    pub cell_range: (usize, usize),
    /// Detections within this many cells collapse into one spin.
    pub merge_radius_cells: usize,
    pub fine_tune: FineTuneConfig,
    /// Run the fine-tuning stage (disable for sweep-only diagnostics).
    pub run_fine_tune: bool,
    /// Known bath spins used to mask bath-dominated regions in the fit.
    pub bath_spins: Vec<SpinParams<Real>>,
    /// Train a counting model for each broad dip run; None reports the
    /// band midpoint instead.
    pub dip_count: Option<DipCountTrainConfig>,
    /// Divide out a fitted decoherence envelope before sweeping.
    pub recover_decoherence: bool,
    pub decoherence_fit: DecoherenceFitOptions<Real>,
    pub envelope_floor: f64,
    /// Recovery is flagged low-confidence when more than this fraction of
    /// samples sat below the envelope floor.
    pub low_confidence_frac: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            cell_range: (0, 0),
            merge_radius_cells: 2,
            fine_tune: FineTuneConfig::default(),
            run_fine_tune: true,
            bath_spins: Vec::new(),
            dip_count: None,
            recover_decoherence: true,
            decoherence_fit: DecoherenceFitOptions::default(),
            envelope_floor: DEFAULT_ENVELOPE_FLOOR,
            low_confidence_frac: 0.25,
        }
    }
}

/// Preprocessed trace plus what was done to it.
pub struct ProcessedTrace {
    pub trace: Trace<Real>,
    pub denoised: bool,
    /// Fraction of samples where the fitted envelope sat below the floor.
    pub low_fraction: f64,
}

pub struct DetectionOutput {
    pub report: DetectionReport,
    pub curves: Vec<ConfidenceCurve>,
    pub merged: Vec<MergedSpin>,
    pub fine_tune: Option<FineTuneOutcome>,
    pub processed_n32: ProcessedTrace,
    pub processed_n256: ProcessedTrace,
}

fn preprocess(
    trace: &Trace<Real>,
    denoiser: Option<&Model<f32>>,
    cfg: &DetectionConfig,
) -> Result<ProcessedTrace> {
    let mut denoised = false;
    let mut working = trace.clone();
    if trace.kind == TraceKind::Noisy {
        if let Some(model) = denoiser {
            let key = ReuseKey::denoiser(trace.config.n_pulses, trace.config.tau_step_s);
            working = denoise(&working, model, &key)?;
            denoised = true;
        }
    }
    let mut low_fraction = 0.0;
    if cfg.recover_decoherence {
        let dp = fit_decoherence(&working, &cfg.decoherence_fit);
        if !dp.is_none() {
            let (recovered, low) = recover_decoherence(&working, &dp, cfg.envelope_floor);
            low_fraction = low.iter().filter(|&&f| f).count() as f64 / low.len().max(1) as f64;
            working = recovered;
        }
    }
    Ok(ProcessedTrace {
        trace: working,
        denoised,
        low_fraction,
    })
}

fn summarize_broad(
    detections: &SweepDetections,
    regime: HpcRegime,
    trace: &Trace<Real>,
    dict: &PeriodDictionary,
    dft: &DftTable,
    cfg: &DetectionConfig,
) -> Result<Vec<BroadDipSummary>> {
    let mut out = Vec::new();
    for run in &detections.broad {
        let (a_lo, a_hi) = (dict.a_of(run.cells.0), dict.a_of(run.cells.1));
        let summary = match &cfg.dip_count {
            Some(count_cfg) => {
                let est = count_broad_dip(trace, run, regime, dict, dft, count_cfg)?;
                BroadDipSummary {
                    regime,
                    cells: run.cells,
                    a_eq_range_hz: (a_lo.min(a_hi), a_lo.max(a_hi)),
                    min_count: est.min_count,
                    max_count: est.max_count,
                    estimated_count: est.estimated_count,
                    score_max: run.score_max,
                }
            }
            None => {
                let halo = super::sweep::halo_cells(regime, dict.a_step_hz);
                let (min_count, max_count) = super::sweep::broad_dip_count_band(run.len(), halo);
                BroadDipSummary {
                    regime,
                    cells: run.cells,
                    a_eq_range_hz: (a_lo.min(a_hi), a_lo.max(a_hi)),
                    min_count,
                    max_count,
                    estimated_count: (min_count + max_count) / 2,
                    score_max: run.score_max,
                }
            }
        };
        out.push(summary);
    }
    Ok(out)
}

/// Run the full pipeline on one N = 32 and one N = 256 trace of the same
/// sample.
pub fn run_detection(
    n32: &Trace<Real>,
    n256: &Trace<Real>,
    models: &PipelineModels,
    dict: &PeriodDictionary,
    dft: &DftTable,
    cfg: &DetectionConfig,
) -> Result<DetectionOutput> {
    if n32.config.n_pulses != 32 {
        return Err(CoreError::Config(format!(
            "first trace must be N = 32 (got N = {})",
            n32.config.n_pulses
        )));
    }
    let p32 = preprocess(n32, models.denoiser_n32.as_ref(), cfg)?;
    let p256 = preprocess(n256, models.denoiser_n256.as_ref(), cfg)?;
    let trace_for = |regime: HpcRegime| -> &Trace<Real> {
        match regime {
            HpcRegime::N32HighB | HpcRegime::N32LowB => &p32.trace,
            HpcRegime::N256 => &p256.trace,
        }
    };

    let mut curves = Vec::new();
    let mut regime_sets = Vec::new();
    let mut broad_dips = Vec::new();
    for regime in HpcRegime::ALL {
        let bank = &models.regime(regime).bank;
        let curve = hpc_sweep(trace_for(regime), bank, dict, cfg.cell_range)?;
        let detections = extract_detections(&curve, dict.a_step_hz);
        broad_dips.extend(summarize_broad(
            &detections,
            regime,
            trace_for(regime),
            dict,
            dft,
            cfg,
        )?);
        regime_sets.push(RegimeDetections {
            regime,
            peaks: detections.peaks,
        });
        curves.push(curve);
    }

    let merged = merge_detections(&regime_sets, cfg.merge_radius_cells);

    // Per-cell regression, against the trace the detection came from.
    let mut estimates: Vec<SpinParams<Real>> = Vec::with_capacity(merged.len());
    for m in &merged {
        let bank = &models.regime(m.source).regressors;
        let (a, b) = match bank.owner_of(m.cell) {
            Some(entry) => regress_ab(trace_for(m.source), entry, dict, m.cell)?,
            None => contour_fallback(dict, m.cell, m.source.regression_b_range_hz()),
        };
        estimates.push(SpinParams::new(a, b));
    }

    let outcome = if cfg.run_fine_tune && !estimates.is_empty() {
        Some(fine_tune(
            &estimates,
            &p32.trace,
            &cfg.bath_spins,
            &cfg.fine_tune,
        )?)
    } else {
        None
    };

    let (refined, sigma_a, sigma_b, flagged, passes, final_loss) = match &outcome {
        Some(o) => (
            o.refined.clone(),
            o.sigma_a_hz.clone(),
            o.sigma_b_hz.clone(),
            o.flagged.clone(),
            o.passes,
            o.final_loss,
        ),
        None => (
            estimates.clone(),
            vec![0.0; estimates.len()],
            vec![0.0; estimates.len()],
            vec![false; estimates.len()],
            0,
            0.0,
        ),
    };

    let spins: Vec<ReportedSpin> = merged
        .iter()
        .zip(&refined)
        .enumerate()
        .map(|(i, (m, params))| {
            let tp = target_period(params, dict.larmor_hz);
            let a_eq = dict
                .a_equivalent_of_period(tp)
                .unwrap_or_else(|| dict.a_of(m.cell));
            let group = if broad_dips
                .iter()
                .any(|b| m.cell >= b.cells.0 && m.cell <= b.cells.1)
            {
                DetectionGroup::BroadDip
            } else {
                DetectionGroup::Isolated
            };
            ReportedSpin {
                a_hz: params.a_hz,
                b_hz: params.b_hz,
                sigma_a_hz: sigma_a[i],
                sigma_b_hz: sigma_b[i],
                a_eq_hz: a_eq,
                cell: m.cell,
                score: m.score,
                class_id: m.class_id,
                source: m.source,
                confidence: m.confidence.clone(),
                group,
                low_confidence: flagged[i],
            }
        })
        .collect();

    let counted_total = DetectionReport::counted_total_of(&spins, &broad_dips);
    let low_confidence_recovery =
        p32.low_fraction > cfg.low_confidence_frac || p256.low_fraction > cfg.low_confidence_frac;
    let report = DetectionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        field_gauss: crate::signal::DEFAULT_FIELD_GAUSS,
        spins,
        broad_dips,
        counted_total,
        fit_loss_final: final_loss,
        fine_tune_passes: passes,
        low_confidence_recovery,
    };
    Ok(DetectionOutput {
        report,
        curves,
        merged,
        fine_tune: outcome,
        processed_n32: p32,
        processed_n256: p256,
    })
}
