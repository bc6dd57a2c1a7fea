//! Ground-truth scene construction for end-to-end detection runs.
//!
//! A scene is a set of individually placed spins (plus an implicit bath
//! added at render time if desired). Placement draws each spin's contour
//! position uniformly in the scene band under a minimum mutual separation,
//! so detections can be scored against unambiguous ground truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::imaging::PeriodDictionary;
use crate::signal::{solve_a_for_period, target_period, SpinParams};
use crate::{CoreError, Real, Result};

/// Which B band a placed spin belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandTag {
    /// Strongly coupled perpendicular component; primary detection band.
    HighB,
    /// Weaker band that the low-B models must pick up.
    LowB,
    /// Below every detection threshold; must not be reported.
    Decoy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneBand {
    pub tag: BandTag,
    pub count: usize,
    pub b_range_hz: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Contour-position band every spin is placed in.
    pub a_eq_range_hz: (f64, f64),
    pub bands: Vec<SceneBand>,
    /// Minimum |a_eq_i - a_eq_j| between any two spins.
    pub min_separation_hz: f64,
}

impl SceneSpec {
    pub fn total_spins(&self) -> usize {
        self.bands.iter().map(|b| b.count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpin {
    pub spin: SpinParams<Real>,
    pub band: BandTag,
    /// Contour position (reference-B A-equivalent) of this spin's period.
    pub a_eq_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub seed: u64,
    pub spec: SceneSpec,
    pub spins: Vec<SceneSpin>,
}

impl Scene {
    pub fn spin_params(&self) -> Vec<SpinParams<Real>> {
        self.spins.iter().map(|s| s.spin).collect()
    }
}

/// Place all spins of a spec. Fails if the band cannot hold the requested
/// count at the requested separation (500 attempts per spin).
pub fn generate_scene(spec: &SceneSpec, dict: &PeriodDictionary, seed: u64) -> Result<Scene> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut placed: Vec<SceneSpin> = Vec::with_capacity(spec.total_spins());
    for band in &spec.bands {
        for _ in 0..band.count {
            let mut attempts = 0;
            let (a_eq, b) = loop {
                let a_eq = rng.gen_range(spec.a_eq_range_hz.0..=spec.a_eq_range_hz.1);
                let b = rng.gen_range(band.b_range_hz.0..=band.b_range_hz.1);
                if placed
                    .iter()
                    .all(|p| (p.a_eq_hz - a_eq).abs() >= spec.min_separation_hz)
                {
                    break (a_eq, b);
                }
                attempts += 1;
                if attempts >= 500 {
                    return Err(CoreError::Config(format!(
                        "cannot place {} spins with {} Hz separation in [{}, {}] Hz",
                        spec.total_spins(),
                        spec.min_separation_hz,
                        spec.a_eq_range_hz.0,
                        spec.a_eq_range_hz.1
                    )));
                }
            };
            let tp = target_period(&SpinParams::new(a_eq, dict.b_ref_hz), dict.larmor_hz);
            let a = solve_a_for_period(tp, b, dict.larmor_hz).unwrap_or(a_eq);
            placed.push(SceneSpin {
                spin: SpinParams::new(a, b),
                band: band.tag,
                a_eq_hz: a_eq,
            });
        }
    }
    Ok(Scene {
        seed,
        spec: spec.clone(),
        spins: placed,
    })
}
