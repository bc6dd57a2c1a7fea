//! Dataset specifications for the classifier, denoiser, counting, and
//! regression models.

use serde::{Deserialize, Serialize};

use crate::imaging::{Interp, WidthConfig, DEFAULT_N_SLICES};
use crate::signal::{DEFAULT_NOISE_CLIP, DEFAULT_NOISE_SIGMA};

/// Classifier operating regime. The two N32 regimes share the acquisition
/// but target different transverse-coupling bands; N256 resolves weakly
/// coupled spins that N32 cannot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HpcRegime {
    N32HighB,
    N32LowB,
    N256,
}

impl HpcRegime {
    pub const ALL: [HpcRegime; 3] = [HpcRegime::N32HighB, HpcRegime::N32LowB, HpcRegime::N256];

    pub fn n_pulses(self) -> u32 {
        match self {
            HpcRegime::N32HighB | HpcRegime::N32LowB => 32,
            HpcRegime::N256 => 256,
        }
    }

    /// Tau sweep of the acquisition, seconds.
    pub fn tau_span_s(self) -> (f64, f64) {
        match self {
            HpcRegime::N32HighB | HpcRegime::N32LowB => (6e-6, 50e-6),
            HpcRegime::N256 => (10e-6, 40e-6),
        }
    }

    /// Background-spin sampling box (A range, B range), Hz.
    pub fn bath_a_range_hz(self) -> (f64, f64) {
        (-50_000.0, 50_000.0)
    }

    pub fn bath_b_range_hz(self) -> (f64, f64) {
        match self {
            HpcRegime::N32HighB | HpcRegime::N32LowB => (6_000.0, 80_000.0),
            HpcRegime::N256 => (2_000.0, 20_000.0),
        }
    }

    /// Transverse-coupling band of the spins this regime is responsible for.
    pub fn target_b_range_hz(self) -> (f64, f64) {
        match self {
            HpcRegime::N32HighB => (12_000.0, 80_000.0),
            HpcRegime::N32LowB => (6_000.0, 12_000.0),
            HpcRegime::N256 => (2_000.0, 20_000.0),
        }
    }

    /// Classification resolution: minimum A separation (Hz) at which two
    /// spins are distinguished.
    pub fn resolution_hz(self) -> f64 {
        match self {
            HpcRegime::N32HighB => 200.0,
            HpcRegime::N32LowB => 500.0,
            HpcRegime::N256 => 150.0,
        }
    }

    /// Peak-extraction height threshold on the confidence curve.
    pub fn peak_height(self) -> f64 {
        match self {
            HpcRegime::N32LowB => 0.75,
            _ => 0.9,
        }
    }

    /// Target periods evaluated by one classifier model.
    pub fn targets_per_model(self) -> usize {
        match self {
            HpcRegime::N256 => 3,
            _ => 5,
        }
    }

    /// Regression search range for B, Hz.
    pub fn regression_b_range_hz(self) -> (f64, f64) {
        match self {
            HpcRegime::N32HighB => (10_000.0, 70_000.0),
            HpcRegime::N32LowB => (6_000.0, 12_000.0),
            HpcRegime::N256 => (2_000.0, 20_000.0),
        }
    }
}

/// How a classifier target is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TargetKind {
    /// A cell of the period dictionary.
    DictCell(usize),
    /// A strong-coupling anchor taken from the DFT list; the target period
    /// is the anchor's own local period.
    Strong { a_hz: f64, b_hz: f64 },
}

/// Decoherence-parameter randomization for training data.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecoherenceRange {
    /// log10 bounds of T in seconds.
    pub t_log10_range: (f64, f64),
    pub n_range: (f64, f64),
    /// Probability of drawing no decoherence at all.
    pub p_none: f64,
}

impl Default for DecoherenceRange {
    fn default() -> Self {
        DecoherenceRange {
            t_log10_range: (-4.5, -3.0),
            n_range: (1.0, 3.0),
            p_none: 0.2,
        }
    }
}

/// Rendering knobs shared by the image-producing samplers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SampleGenConfig {
    pub noise_sigma: f64,
    pub noise_clip: f64,
    pub decoherence: Option<DecoherenceRange>,
    pub n_slices: usize,
    pub interp: Interp,
    pub wide_width_s: f64,
    pub narrow_width_s: f64,
    pub width_threshold_a_hz: f64,
}

impl Default for SampleGenConfig {
    fn default() -> Self {
        let w = WidthConfig::default();
        SampleGenConfig {
            noise_sigma: DEFAULT_NOISE_SIGMA,
            noise_clip: DEFAULT_NOISE_CLIP,
            decoherence: Some(DecoherenceRange::default()),
            n_slices: DEFAULT_N_SLICES,
            interp: Interp::Linear,
            wide_width_s: w.wide_s,
            narrow_width_s: w.narrow_s,
            width_threshold_a_hz: w.threshold_a_hz,
        }
    }
}

impl SampleGenConfig {
    pub fn width_config(&self) -> WidthConfig {
        WidthConfig {
            wide_s: self.wide_width_s,
            narrow_s: self.narrow_width_s,
            threshold_a_hz: self.width_threshold_a_hz,
        }
    }

    /// Noiseless, decoherence-free variant (for clean evaluation inputs).
    pub fn clean() -> Self {
        SampleGenConfig {
            noise_sigma: 0.0,
            decoherence: None,
            ..SampleGenConfig::default()
        }
    }
}

/// Dataset description for one classifier model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HpcDatasetSpec {
    pub regime: HpcRegime,
    /// 5 targets for N32 models, 3 for N256.
    pub targets: Vec<TargetKind>,
    /// Number of classes K: class 1 = no target spin, class 2 = one, class
    /// 3 = two with slightly dissimilar periods.
    pub classes: usize,
    pub samples_per_class: usize,
    pub spin_count_range: (usize, usize),
    pub dft_fraction_range: (f64, f64),
    pub a_range_hz: (f64, f64),
    pub b_range_hz: (f64, f64),
    pub target_b_range_hz: (f64, f64),
    pub gen: SampleGenConfig,
}

impl HpcDatasetSpec {
    pub fn for_regime(regime: HpcRegime, targets: Vec<TargetKind>) -> Self {
        HpcDatasetSpec {
            regime,
            targets,
            classes: 3,
            samples_per_class: 4000,
            spin_count_range: (26, 32),
            dft_fraction_range: (0.0, 0.1),
            a_range_hz: regime.bath_a_range_hz(),
            b_range_hz: regime.bath_b_range_hz(),
            target_b_range_hz: regime.target_b_range_hz(),
            gen: SampleGenConfig::default(),
        }
    }
}

/// Dataset description for the denoising autoencoder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenoiserDatasetSpec {
    pub regime: HpcRegime,
    /// Window length in grid points (paper setting 3000 = 12 us at 4 ns;
    /// anything in 1000..=3000 works comparably).
    pub window_len: usize,
    pub spin_count_range: (usize, usize),
    pub dft_fraction_range: (f64, f64),
    pub noise_sigma: f64,
    pub noise_clip: f64,
    pub decoherence: DecoherenceRange,
}

impl DenoiserDatasetSpec {
    pub fn for_regime(regime: HpcRegime) -> Self {
        DenoiserDatasetSpec {
            regime,
            window_len: 3000,
            spin_count_range: (26, 32),
            dft_fraction_range: (0.0, 0.1),
            noise_sigma: DEFAULT_NOISE_SIGMA,
            noise_clip: DEFAULT_NOISE_CLIP,
            decoherence: DecoherenceRange::default(),
        }
    }
}

/// Dataset description for a regression model covering a band of dictionary
/// cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionDatasetSpec {
    pub regime: HpcRegime,
    /// Inclusive dictionary-cell range the model covers.
    pub cell_range: (usize, usize),
    pub b_range_hz: (f64, f64),
    /// A normalization bounds (covers the full contour excursion of the
    /// cell range over the B search region).
    pub a_norm_range_hz: (f64, f64),
    pub gen: SampleGenConfig,
}

/// Dataset description for a broad-dip counting model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DipCountSpec {
    pub regime: HpcRegime,
    /// Inclusive dictionary-cell range of the broad run.
    pub index_range: (usize, usize),
    pub min_count: usize,
    pub max_count: usize,
    pub spin_count_range: (usize, usize),
    pub dft_fraction_range: (f64, f64),
    pub target_b_range_hz: (f64, f64),
    pub gen: SampleGenConfig,
}

impl DipCountSpec {
    /// Class count: class 1 = no target, then one class per spin count in
    /// `min_count..=max_count`.
    pub fn classes(&self) -> usize {
        self.max_count - self.min_count + 2
    }

    /// Spin count encoded by a 1-based class id (None for class 1).
    pub fn count_of_class(&self, class_id: usize) -> Option<usize> {
        if class_id <= 1 {
            None
        } else {
            Some(self.min_count + class_id - 2)
        }
    }
}
