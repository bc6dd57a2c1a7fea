//! Closed-form CPMG signal physics: single-spin coherence, multi-spin
//! product traces, the local-period formula, decoherence and its inversion,
//! and measurement noise.

mod decoherence;
mod io;
mod noise;
mod params;
mod sim;

pub use decoherence::{
    apply_decoherence, fit_decoherence, recover_decoherence, DecoherenceFitOptions,
    DecoherenceParams, DEFAULT_ENVELOPE_FLOOR,
};
pub use io::{read_trace_csv, write_trace_csv};
pub use noise::{
    add_gaussian_noise, noise_draw, truncated_normal_std, DEFAULT_NOISE_CLIP, DEFAULT_NOISE_SIGMA,
};
pub use params::{
    larmor_hz_from_gauss, AcquisitionConfig, SpinParams, Trace, TraceKind, DEFAULT_FIELD_GAUSS,
    DEFAULT_TAU_STEP_S, GAMMA_C13_HZ_PER_T,
};
pub use sim::{
    cpmg_signal, cpmg_signal_at_indices, single_spin_coherence, solve_a_for_period, target_period,
    SpinFactors,
};
