//! Detection pipeline: denoising, classifier sweeps, peak extraction,
//! regression, fine tuning, and reporting.

mod build;
mod denoise;
mod detect;
mod evaluate;
mod finetune;
mod metrics;
mod regress;
mod report;
mod sweep;
mod train_util;

pub use build::{
    derived_seed, eval_hpc_entry, fit_denoiser, fit_hpc_entry, fit_regressor_entry,
    generate_denoiser_samples, generate_hpc_samples, generate_regress_samples, regress_bands,
    samples_to_arrays, target_groups, train_denoiser, train_hpc_bank, train_hpc_entry,
    train_regressor_bank, DenoiserTrainConfig, HpcTrainConfig, RegressTrainConfig,
};
pub use denoise::denoise;
pub use evaluate::{match_detections, MatchOutcome, MatchTolerance, SpinMatch};
pub use detect::{
    run_detection, DetectionConfig, DetectionOutput, PipelineModels, ProcessedTrace, RegimeModels,
};
pub use finetune::{
    build_fit_windows, fine_tune, fit_loss, FineTuneConfig, FineTuneOutcome, FitWindows,
};
pub use metrics::{auc_ovr, evaluate_scores, roc_ovr, EvalMetrics};
pub use regress::{contour_fallback, regress_ab, RegressorBank, RegressorEntry};
pub use report::{
    merge_detections, BroadDipSummary, DetectionGroup, DetectionReport, MergedSpin,
    RegimeDetections, RegimeScore, ReportedSpin, REPORT_SCHEMA_VERSION,
};
pub use sweep::{
    broad_dip_count_band, broad_dip_min_run, count_broad_dip, extract_detections, halo_cells,
    hpc_sweep, BroadDipEstimate, BroadDipRun, ConfidenceCurve, DipCountTrainConfig, HpcBank,
    HpcEntry, PeakDetection, SweepDetections,
};
pub use train_util::{conv_denoiser, dense_classifier, dense_regressor};
