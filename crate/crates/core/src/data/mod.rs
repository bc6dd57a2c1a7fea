//! Dataset generation and static data ingestion.

mod dft;
mod sampler;
mod scene;
mod shard;
mod spec;

pub use dft::{load_dft_table, DftRow, DftTable};
pub use sampler::{
    acquisition_for, make_denoiser_pair, make_dip_count_sample, make_hpc_sample,
    make_regression_sample, render_hpc_input, sample_spin_bath, sample_spin_bath_guarded,
    LabeledSample, SampleMeta,
};
pub use scene::{generate_scene, BandTag, Scene, SceneBand, SceneSpec, SceneSpin};
pub use shard::{read_dataset, records_to_arrays, write_dataset, DatasetManifest, ShardRecord};
pub use spec::{
    DecoherenceRange, DenoiserDatasetSpec, DipCountSpec, HpcDatasetSpec, HpcRegime,
    RegressionDatasetSpec, SampleGenConfig, TargetKind,
};
