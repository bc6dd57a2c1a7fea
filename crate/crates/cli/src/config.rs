//! The TOML-backed run configuration. Every knob of every stage lives here;
//! command-line flags override individual fields and the merged result is
//! echoed into the run directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nvspec_core::{
    data::{HpcRegime, SceneSpec},
    pipeline::{DenoiserTrainConfig, DetectionConfig, HpcTrainConfig, RegressTrainConfig},
    signal::{SpinParams, DEFAULT_FIELD_GAUSS, DEFAULT_NOISE_CLIP, DEFAULT_NOISE_SIGMA},
    CoreError, Real, Result,
};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub run: RunSection,
    pub simulate: SimulateSection,
    pub gen_data: GenDataSection,
    pub train: TrainSection,
    pub detect: DetectSection,
    pub eval: EvalSection,
    pub plotdata: PlotdataSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunSection {
    /// Parent directory run directories are created under.
    pub out_dir: PathBuf,
    /// Run directory name; empty derives `<command>-<seed>`.
    pub name: String,
    /// Worker threads for data generation and training; 0 uses every core.
    pub workers: usize,
    pub field_gauss: f64,
    pub seed: u64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            out_dir: PathBuf::from("runs"),
            name: String::new(),
            workers: 0,
            field_gauss: DEFAULT_FIELD_GAUSS,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateSection {
    /// Inline spins, merged with `spin_file` and `scene` draws.
    pub spins: Vec<SpinParams<Real>>,
    /// JSON file with a spin list (array of {a_hz, b_hz}).
    pub spin_file: Option<PathBuf>,
    /// Random scene specification; drawn with the run seed.
    pub scene: Option<SceneSpec>,
    /// Pulse numbers to render, one trace set each.
    pub n_pulses: Vec<u32>,
    pub noise_sigma: f64,
    pub noise_clip: f64,
    pub decoherence_t_s: f64,
    pub decoherence_n: f64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            spins: Vec::new(),
            spin_file: None,
            scene: None,
            n_pulses: vec![32, 256],
            noise_sigma: DEFAULT_NOISE_SIGMA,
            noise_clip: DEFAULT_NOISE_CLIP,
            decoherence_t_s: 1e-4,
            decoherence_n: 1.7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Hpc,
    Regress,
    Denoise,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GenDataSection {
    pub regimes: Vec<HpcRegime>,
    /// Inclusive dictionary-cell range the datasets cover.
    pub cells: (usize, usize),
    pub families: Vec<Family>,
    pub hpc: HpcTrainConfig,
    pub regress: RegressTrainConfig,
    pub denoise: DenoiserTrainConfig,
    pub shard_size: usize,
}

impl Default for GenDataSection {
    fn default() -> Self {
        GenDataSection {
            regimes: vec![HpcRegime::N32HighB],
            cells: (1200, 1400),
            families: vec![Family::Hpc, Family::Regress, Family::Denoise],
            hpc: HpcTrainConfig::default(),
            regress: RegressTrainConfig::default(),
            denoise: DenoiserTrainConfig::default(),
            shard_size: 2000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSection {
    /// Run directory of a `gen-data` invocation (the dataset prerequisite).
    pub data: Option<PathBuf>,
    pub families: Vec<Family>,
    pub hpc: HpcTrainConfig,
    pub regress: RegressTrainConfig,
    pub denoise: DenoiserTrainConfig,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            data: None,
            families: vec![Family::Hpc, Family::Regress, Family::Denoise],
            hpc: HpcTrainConfig::default(),
            regress: RegressTrainConfig::default(),
            denoise: DenoiserTrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectSection {
    /// Run directory of a `train` invocation (the model prerequisite).
    pub models: Option<PathBuf>,
    /// Run directory of a `simulate` invocation; uses its noisy traces.
    pub sim: Option<PathBuf>,
    /// Explicit trace files, overriding `sim`.
    pub n32_trace: Option<PathBuf>,
    pub n256_trace: Option<PathBuf>,
    /// Cells to sweep; (0, 0) uses the loaded banks' coverage.
    pub cells: (usize, usize),
    /// JSON file with known bath spins for fit masking.
    pub bath_file: Option<PathBuf>,
    pub options: DetectionConfig,
}

impl Default for DetectSection {
    fn default() -> Self {
        DetectSection {
            models: None,
            sim: None,
            n32_trace: None,
            n256_trace: None,
            cells: (0, 0),
            bath_file: None,
            options: DetectionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSection {
    /// `report.json` from a detect run (or the run directory itself).
    pub report: Option<PathBuf>,
    /// `scene.json` from a simulate run (or the run directory itself).
    pub scene: Option<PathBuf>,
    pub tol_a_hz: f64,
    pub tol_b_hz: f64,
    pub gate_a_eq_hz: f64,
    /// Spins below this B are scored in no recovery band.
    pub min_b_hz: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            report: None,
            scene: None,
            tol_a_hz: 500.0,
            tol_b_hz: 3_000.0,
            gate_a_eq_hz: 2_000.0,
            min_b_hz: 6_000.0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PlotdataSection {
    /// Measured trace for the overlay bundle.
    pub trace: Option<PathBuf>,
    /// Detection report whose spins reproduce the curve.
    pub report: Option<PathBuf>,
    /// Confidence-curve CSVs to re-emit sorted.
    pub curves: Vec<PathBuf>,
    /// Emit the period image of this dictionary cell from `trace`.
    pub image_cell: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CoreError::Parse {
            path: path.display().to_string(),
            line: 0,
            msg: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| CoreError::Config(format!("config serialization: {e}")))
    }
}

/// Accepts `n32-high-b`, `n32_high_b`, `N32HighB` and similar spellings.
pub fn parse_regime(s: &str) -> Result<HpcRegime> {
    let norm: String = s
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase();
    match norm.as_str() {
        "n32highb" | "n32high" | "highb" => Ok(HpcRegime::N32HighB),
        "n32lowb" | "n32low" | "lowb" => Ok(HpcRegime::N32LowB),
        "n256" => Ok(HpcRegime::N256),
        _ => Err(CoreError::Config(format!("unknown regime '{s}'"))),
    }
}

pub fn parse_family(s: &str) -> Result<Family> {
    match s.trim().to_ascii_lowercase().as_str() {
        "hpc" | "classifier" => Ok(Family::Hpc),
        "regress" | "regressor" | "regression" => Ok(Family::Regress),
        "denoise" | "denoiser" => Ok(Family::Denoise),
        _ => Err(CoreError::Config(format!("unknown model family '{s}'"))),
    }
}

/// "LO:HI" (inclusive) cell-range flag.
pub fn parse_cells(s: &str) -> Result<(usize, usize)> {
    let err = || CoreError::Config(format!("cell range '{s}' is not LO:HI"));
    let (lo, hi) = s.split_once(':').ok_or_else(err)?;
    let lo = lo.trim().parse::<usize>().map_err(|_| err())?;
    let hi = hi.trim().parse::<usize>().map_err(|_| err())?;
    if lo > hi {
        return Err(CoreError::Config(format!("cell range '{s}' is reversed")));
    }
    Ok((lo, hi))
}

/// "a:b;a:b" inline spin-list flag (Hz).
pub fn parse_spins(s: &str) -> Result<Vec<SpinParams<Real>>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|pair| {
            let err = || CoreError::Config(format!("spin '{pair}' is not A:B in Hz"));
            let (a, b) = pair.split_once(':').ok_or_else(err)?;
            let a = a.trim().parse::<f64>().map_err(|_| err())?;
            let b = b.trim().parse::<f64>().map_err(|_| err())?;
            Ok(SpinParams::new(a, b))
        })
        .collect()
}
