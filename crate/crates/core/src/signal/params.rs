//! Core domain types: hyperfine pairs, acquisition grids, and traces.

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result, Scalar};

/// 13C gyromagnetic ratio over 2*pi, Hz per tesla.
pub const GAMMA_C13_HZ_PER_T: f64 = 10.7084e6;

/// External field of the reference experiment, gauss.
pub const DEFAULT_FIELD_GAUSS: f64 = 403.553;

/// Measurement time resolution t_r, seconds.
pub const DEFAULT_TAU_STEP_S: f64 = 4e-9;

/// Nuclear Larmor frequency (omega_L / 2*pi, Hz) for a field in gauss.
pub fn larmor_hz_from_gauss(field_gauss: f64) -> f64 {
    GAMMA_C13_HZ_PER_T * field_gauss * 1e-4
}

/// One nuclear spin's hyperfine pair.
///
/// Both components are stored as frequency over 2*pi in Hz; angular factors
/// appear only inside the signal math. The sign of B is unobservable (it
/// enters the signal only squared), so construction normalizes B to |B|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinParams<S: Scalar> {
    pub a_hz: S,
    pub b_hz: S,
}

impl<S: Scalar> SpinParams<S> {
    pub fn new(a_hz: S, b_hz: S) -> Self {
        SpinParams {
            a_hz,
            b_hz: b_hz.abs(),
        }
    }

    /// omega_tilde / 2*pi in Hz: sqrt((A + omega_L)^2 + B^2).
    pub fn omega_tilde_hz(&self, larmor_hz: S) -> S {
        (self.a_hz + larmor_hz).hypot(self.b_hz)
    }

    /// Hyperfine magnitude omega_h / 2*pi = sqrt(A^2 + B^2) in Hz.
    pub fn omega_h_hz(&self) -> S {
        self.a_hz.hypot(self.b_hz)
    }
}

/// Which processing stage produced a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceKind {
    Pure,
    Decohered,
    Noisy,
    Denoised,
    Recovered,
}

/// CPMG acquisition grid: pulse count, Larmor frequency, and the tau sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig<S: Scalar> {
    pub n_pulses: u32,
    pub larmor_hz: S,
    pub tau_start_s: S,
    pub tau_end_s: S,
    pub tau_step_s: S,
}

impl<S: Scalar> AcquisitionConfig<S> {
    pub fn new(n_pulses: u32, larmor_hz: S, tau_start_s: S, tau_end_s: S, tau_step_s: S) -> Result<Self> {
        if n_pulses == 0 {
            return Err(CoreError::Config("n_pulses must be positive".into()));
        }
        if !(larmor_hz > S::zero()) {
            return Err(CoreError::Config("larmor_hz must be positive".into()));
        }
        if !(tau_step_s > S::zero()) {
            return Err(CoreError::Config("tau_step_s must be positive".into()));
        }
        if !(tau_end_s > tau_start_s) {
            return Err(CoreError::Config("tau_end_s must exceed tau_start_s".into()));
        }
        Ok(AcquisitionConfig {
            n_pulses,
            larmor_hz,
            tau_start_s,
            tau_end_s,
            tau_step_s,
        })
    }

    /// Grid with the reference field and 4 ns resolution.
    pub fn with_defaults(n_pulses: u32, tau_start_s: S, tau_end_s: S) -> Self {
        AcquisitionConfig::new(
            n_pulses,
            S::of(larmor_hz_from_gauss(DEFAULT_FIELD_GAUSS)),
            tau_start_s,
            tau_end_s,
            S::of(DEFAULT_TAU_STEP_S),
        )
        .expect("default acquisition config is valid")
    }

    /// Number of tau grid points: floor((end - start) / step) + 1.
    pub fn grid_len(&self) -> usize {
        ((self.tau_end_s - self.tau_start_s) / self.tau_step_s)
            .floor()
            .f64() as usize
            + 1
    }

    pub fn tau_at(&self, i: usize) -> S {
        self.tau_start_s + S::of(i as f64) * self.tau_step_s
    }

    /// Fractional grid coordinate of a tau value (0 at tau_start).
    pub fn grid_coord(&self, tau_s: S) -> S {
        (tau_s - self.tau_start_s) / self.tau_step_s
    }
}

/// A 1D coherence trace: one P_x value per tau grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<S: Scalar> {
    pub config: AcquisitionConfig<S>,
    pub values: Vec<S>,
    pub kind: TraceKind,
}

impl<S: Scalar> Trace<S> {
    pub fn new(config: AcquisitionConfig<S>, values: Vec<S>, kind: TraceKind) -> Self {
        debug_assert_eq!(values.len(), config.grid_len());
        Trace {
            config,
            values,
            kind,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Linear interpolation of the trace at an arbitrary tau, clamped to the
    /// grid ends.
    pub fn sample_linear(&self, tau_s: S) -> S {
        let x = self.config.grid_coord(tau_s);
        let n = self.values.len();
        if x <= S::zero() {
            return self.values[0];
        }
        let last = S::of((n - 1) as f64);
        if x >= last {
            return self.values[n - 1];
        }
        let i = x.floor().f64() as usize;
        let f = x - S::of(i as f64);
        self.values[i] + f * (self.values[i + 1] - self.values[i])
    }

    /// Nearest-grid-point sample, clamped to the grid ends.
    pub fn sample_nearest(&self, tau_s: S) -> S {
        let x = self.config.grid_coord(tau_s).f64().round();
        let i = x.clamp(0.0, (self.values.len() - 1) as f64) as usize;
        self.values[i]
    }
}
