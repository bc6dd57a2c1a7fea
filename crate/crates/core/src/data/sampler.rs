//! Labeled-sample construction.
//!
//! Every sampler derives all randomness from a single `u64` seed through a
//! counter-based ChaCha stream, so any sample is byte-reproducible from its
//! spec plus seed. Rendering evaluates the signal only at the grid nodes the
//! sliced image actually reads, which matches the full-trace path bit for
//! bit (same per-node arithmetic) at a fraction of the cost.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::data::{
    DftTable, DenoiserDatasetSpec, DipCountSpec, HpcDatasetSpec, RegressionDatasetSpec,
    SampleGenConfig, TargetKind,
};
use crate::imaging::{crop_width_for, flatten_image, required_indices, slice_and_stack_sparse, PeriodDictionary};
use crate::signal::{
    cpmg_signal_at_indices, solve_a_for_period, target_period, AcquisitionConfig,
    DecoherenceParams, SpinParams,
};
use crate::{Real, Result};

/// Everything needed to re-render a sample's input exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub seed: u64,
    pub noise_seed: u64,
    pub spins: Vec<SpinParams<Real>>,
    pub class_id: usize,
    /// Dictionary cell (or target slot) the sample was rendered at.
    pub target_pos: Option<usize>,
    pub dp: Option<DecoherenceParams<Real>>,
    pub tp_s: f64,
    pub width_s: f64,
    /// Denoiser samples: start index of the 1D window.
    pub window_start: Option<usize>,
}

/// A training example: flattened image (or 1D window) plus label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub input: Vec<f32>,
    pub label: Vec<f32>,
    pub meta: SampleMeta,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// The acquisition grid a regime's datasets and sweeps are rendered on.
pub fn acquisition_for(spec_regime: crate::data::HpcRegime, larmor_hz: f64) -> AcquisitionConfig<Real> {
    let (t0, t1) = spec_regime.tau_span_s();
    AcquisitionConfig::new(
        spec_regime.n_pulses(),
        larmor_hz,
        t0,
        t1,
        crate::signal::DEFAULT_TAU_STEP_S,
    )
    .expect("regime acquisition is valid")
}

fn draw_decoherence<R: Rng>(
    rng: &mut R,
    range: &crate::data::DecoherenceRange,
) -> Option<DecoherenceParams<Real>> {
    let roll: f64 = rng.gen();
    if roll < range.p_none {
        return None;
    }
    let lg: f64 = rng.gen_range(range.t_log10_range.0..=range.t_log10_range.1);
    let n: f64 = rng.gen_range(range.n_range.0..=range.n_range.1);
    Some(DecoherenceParams::new(10f64.powf(lg), n))
}

/// A-equivalent (reference-B contour position) of an arbitrary spin.
fn a_equiv(spin: &SpinParams<Real>, dict: &PeriodDictionary) -> f64 {
    let tp = target_period(spin, dict.larmor_hz);
    dict.a_equivalent_of_period(tp).unwrap_or(f64::INFINITY)
}

fn bath_from_rng<R: Rng>(
    rng: &mut R,
    dft: &DftTable,
    dict: &PeriodDictionary,
    count_range: (usize, usize),
    dft_fraction_range: (f64, f64),
    a_range: (f64, f64),
    b_range: (f64, f64),
    guard_a_eq: &[f64],
    guard_hz: f64,
) -> Vec<SpinParams<Real>> {
    let count = rng.gen_range(count_range.0..=count_range.1);
    let frac: f64 = rng.gen_range(dft_fraction_range.0..=dft_fraction_range.1);
    let n_dft = ((count as f64) * frac).floor() as usize;
    let n_box = count - n_dft;
    let blocked = |spin: &SpinParams<Real>| -> bool {
        if guard_a_eq.is_empty() {
            return false;
        }
        let eq = a_equiv(spin, dict);
        guard_a_eq.iter().any(|g| (eq - g).abs() < guard_hz)
    };
    let mut spins = Vec::with_capacity(count);
    for _ in 0..n_box {
        let mut attempts = 0;
        loop {
            let a = rng.gen_range(a_range.0..=a_range.1);
            let b = rng.gen_range(b_range.0..=b_range.1);
            let s = SpinParams::new(a, b);
            attempts += 1;
            if !blocked(&s) || attempts > 1000 {
                spins.push(s);
                break;
            }
        }
    }
    for _ in 0..n_dft {
        let mut attempts = 0;
        loop {
            let row = &dft.rows[rng.gen_range(0..dft.rows.len())];
            let s = SpinParams::new(row.a_hz, row.b_hz);
            attempts += 1;
            if !blocked(&s) || attempts > 1000 {
                spins.push(s);
                break;
            }
        }
    }
    spins
}

/// Background-spin draw per the dataset rules: total count uniform in the
/// configured range, a 0..=10% fraction from the DFT list, the rest uniform
/// in the regime's (A, B) box. Deterministic per seed.
pub fn sample_spin_bath(
    spec: &HpcDatasetSpec,
    dft: &DftTable,
    dict: &PeriodDictionary,
    seed: u64,
) -> Vec<SpinParams<Real>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    bath_from_rng(
        &mut rng,
        dft,
        dict,
        spec.spin_count_range,
        spec.dft_fraction_range,
        spec.a_range_hz,
        spec.b_range_hz,
        &[],
        0.0,
    )
}

/// Like [`sample_spin_bath`] but rejecting spins whose period lands within
/// `guard_hz` (in A-equivalent terms) of any guarded position.
pub fn sample_spin_bath_guarded(
    spec: &HpcDatasetSpec,
    dft: &DftTable,
    dict: &PeriodDictionary,
    guard_a_eq: &[f64],
    guard_hz: f64,
    seed: u64,
) -> Vec<SpinParams<Real>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    bath_from_rng(
        &mut rng,
        dft,
        dict,
        spec.spin_count_range,
        spec.dft_fraction_range,
        spec.a_range_hz,
        spec.b_range_hz,
        guard_a_eq,
        guard_hz,
    )
}

/// A-equivalent anchor of a target slot.
fn target_a_eq(target: &TargetKind, dict: &PeriodDictionary) -> f64 {
    match target {
        TargetKind::DictCell(k) => dict.a_of(*k),
        TargetKind::Strong { a_hz, b_hz } => {
            a_equiv(&SpinParams::new(*a_hz, *b_hz), dict)
        }
    }
}

/// Slicing period of a target slot.
fn target_tp(target: &TargetKind, dict: &PeriodDictionary) -> f64 {
    match target {
        TargetKind::DictCell(k) => dict.tp_of(*k),
        TargetKind::Strong { a_hz, b_hz } => {
            target_period(&SpinParams::new(*a_hz, *b_hz), dict.larmor_hz)
        }
    }
}

/// Representative A of a target slot (selects the crop width).
fn target_a(target: &TargetKind, dict: &PeriodDictionary) -> f64 {
    match target {
        TargetKind::DictCell(k) => dict.a_of(*k),
        TargetKind::Strong { a_hz, .. } => *a_hz,
    }
}

/// One spin whose period falls inside the target's dictionary bin (A solved
/// on the contour for the drawn B), or near the strong anchor.
fn draw_target_spin<R: Rng>(
    rng: &mut R,
    target: &TargetKind,
    dict: &PeriodDictionary,
    target_b_range: (f64, f64),
    resolution_hz: f64,
    a_eq_offset_hz: f64,
) -> SpinParams<Real> {
    match target {
        TargetKind::DictCell(k) => {
            let b = rng.gen_range(target_b_range.0..=target_b_range.1);
            let jit: f64 = rng.gen_range(-0.5..=0.5) * dict.a_step_hz;
            let a_eq = dict.a_of(*k) + jit + a_eq_offset_hz;
            let tp = target_period(&SpinParams::new(a_eq, dict.b_ref_hz), dict.larmor_hz);
            let a = solve_a_for_period(tp, b, dict.larmor_hz).unwrap_or(a_eq);
            SpinParams::new(a, b)
        }
        TargetKind::Strong { a_hz, b_hz } => {
            let jit_a: f64 = rng.gen_range(-0.5..=0.5) * resolution_hz;
            let jit_b: f64 = rng.gen_range(-0.02..=0.02);
            SpinParams::new(*a_hz + jit_a + a_eq_offset_hz, *b_hz * (1.0 + jit_b))
        }
    }
}

/// Deterministic render shared by generation and meta-reproduction: sparse
/// signal evaluation, decoherence, per-node truncated noise, slice, flatten.
pub fn render_hpc_input(
    cfg: &AcquisitionConfig<Real>,
    spins: &[SpinParams<Real>],
    dp: Option<&DecoherenceParams<Real>>,
    gen: &SampleGenConfig,
    noise_seed: u64,
    tp_s: f64,
    width_s: f64,
) -> Result<Vec<f32>> {
    let indices = required_indices(cfg, tp_s, width_s, gen.n_slices, gen.interp);
    let mut values = cpmg_signal_at_indices(spins, cfg, &indices);
    if let Some(dp) = dp {
        for (pos, &i) in indices.iter().enumerate() {
            let tau = cfg.tau_at(i);
            let m = values[pos] + values[pos] - 1.0;
            values[pos] = 0.5 * m * dp.envelope(tau) + 0.5;
        }
    }
    if gen.noise_sigma > 0.0 {
        let mut rng = ChaCha12Rng::seed_from_u64(noise_seed);
        for v in values.iter_mut() {
            let noise: Real =
                crate::signal::noise_draw(&mut rng, gen.noise_sigma, gen.noise_clip);
            *v = (*v + noise).clamp(0.0, 1.0);
        }
    }
    if let Some(dp) = dp {
        // Mirror the detection pipeline, which recovers the envelope before
        // slicing: dip depth comes back and noise grows by 1/e(tau).
        let floor = crate::signal::DEFAULT_ENVELOPE_FLOOR;
        for (pos, &i) in indices.iter().enumerate() {
            let env = dp.envelope(cfg.tau_at(i));
            if env >= floor {
                values[pos] = ((values[pos] - 0.5) / env + 0.5).clamp(0.0, 1.0);
            }
        }
    }
    let img = slice_and_stack_sparse(cfg, &indices, &values, tp_s, width_s, gen.n_slices, gen.interp)?;
    Ok(flatten_image(&img).into_iter().map(|v| v as f32).collect())
}

fn one_hot(k: usize, classes: usize) -> Vec<f32> {
    let mut v = vec![0.0; classes];
    v[k] = 1.0;
    v
}

/// Build one classifier sample.
///
/// `class_id` is 1-based: 1 = bath only (no spin near the target period),
/// 2 = bath plus one spin in the target bin, 3 = bath plus two spins whose
/// periods differ by one classification-resolution step.
pub fn make_hpc_sample(
    dict: &PeriodDictionary,
    dft: &DftTable,
    spec: &HpcDatasetSpec,
    class_id: usize,
    target_pos: usize,
    seed: u64,
) -> Result<LabeledSample> {
    assert!(class_id >= 1 && class_id <= spec.classes, "class_id in [1, K]");
    assert!(target_pos < spec.targets.len());
    let regime = spec.regime;
    let cfg = acquisition_for(regime, dict.larmor_hz);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let dp = match &spec.gen.decoherence {
        Some(range) => draw_decoherence(&mut rng, range),
        None => None,
    };

    let guard: Vec<f64> = spec.targets.iter().map(|t| target_a_eq(t, dict)).collect();
    let guard_hz = regime.resolution_hz().max(dict.a_step_hz);
    let mut spins = bath_from_rng(
        &mut rng,
        dft,
        dict,
        spec.spin_count_range,
        spec.dft_fraction_range,
        spec.a_range_hz,
        spec.b_range_hz,
        &guard,
        guard_hz,
    );

    let target = &spec.targets[target_pos];
    if class_id >= 2 {
        spins.push(draw_target_spin(
            &mut rng,
            target,
            dict,
            spec.target_b_range_hz,
            regime.resolution_hz(),
            0.0,
        ));
    }
    if class_id >= 3 {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        spins.push(draw_target_spin(
            &mut rng,
            target,
            dict,
            spec.target_b_range_hz,
            regime.resolution_hz(),
            sign * regime.resolution_hz(),
        ));
    }

    let tp_s = target_tp(target, dict);
    let width_s = crop_width_for(target_a(target, dict), &spec.gen.width_config());
    let noise_seed = splitmix64(seed);
    let input = render_hpc_input(&cfg, &spins, dp.as_ref(), &spec.gen, noise_seed, tp_s, width_s)?;
    Ok(LabeledSample {
        input,
        label: one_hot(class_id - 1, spec.classes),
        meta: SampleMeta {
            seed,
            noise_seed,
            spins,
            class_id,
            target_pos: Some(target_pos),
            dp,
            tp_s,
            width_s,
            window_start: None,
        },
    })
}

/// Build one denoiser pair: label = clean (decohered, noiseless) window,
/// input = the same window with truncated Gaussian noise.
pub fn make_denoiser_pair(
    dict: &PeriodDictionary,
    dft: &DftTable,
    spec: &DenoiserDatasetSpec,
    seed: u64,
) -> Result<LabeledSample> {
    let cfg = acquisition_for(spec.regime, dict.larmor_hz);
    let n = cfg.grid_len();
    assert!(spec.window_len >= 2 && spec.window_len <= n, "window fits the sweep");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let dp = draw_decoherence(&mut rng, &spec.decoherence);
    let spins = bath_from_rng(
        &mut rng,
        dft,
        dict,
        spec.spin_count_range,
        spec.dft_fraction_range,
        spec.regime.bath_a_range_hz(),
        spec.regime.bath_b_range_hz(),
        &[],
        0.0,
    );
    let t0 = rng.gen_range(0..=(n - spec.window_len));

    let indices: Vec<usize> = (t0..t0 + spec.window_len).collect();
    let mut clean = cpmg_signal_at_indices(&spins, &cfg, &indices);
    if let Some(dp) = &dp {
        for (pos, &i) in indices.iter().enumerate() {
            let tau = cfg.tau_at(i);
            let m = clean[pos] + clean[pos] - 1.0;
            clean[pos] = 0.5 * m * dp.envelope(tau) + 0.5;
        }
    }
    let noise_seed = splitmix64(seed);
    let input: Vec<f32> = if spec.noise_sigma > 0.0 {
        let mut nrng = ChaCha12Rng::seed_from_u64(noise_seed);
        clean
            .iter()
            .map(|&v| {
                let noise: Real =
                    crate::signal::noise_draw(&mut nrng, spec.noise_sigma, spec.noise_clip);
                (v + noise).clamp(0.0, 1.0) as f32
            })
            .collect()
    } else {
        clean.iter().map(|&v| v as f32).collect()
    };
    let label: Vec<f32> = clean.iter().map(|&v| v as f32).collect();
    Ok(LabeledSample {
        input,
        label,
        meta: SampleMeta {
            seed,
            noise_seed,
            spins,
            class_id: 0,
            target_pos: None,
            dp,
            tp_s: 0.0,
            width_s: 0.0,
            window_start: Some(t0),
        },
    })
}

impl RegressionDatasetSpec {
    /// Spec for a cell band: the A normalization range covers the contour
    /// excursion of every cell in the band over the whole B search region.
    pub fn for_band(
        regime: crate::data::HpcRegime,
        cell_range: (usize, usize),
        dict: &PeriodDictionary,
    ) -> Self {
        let b_range = regime.regression_b_range_hz();
        let mut a_lo = f64::INFINITY;
        let mut a_hi = f64::NEG_INFINITY;
        for &cell in &[cell_range.0, cell_range.1] {
            for da in [-0.5, 0.5] {
                let a_eq = dict.a_of(cell) + da * dict.a_step_hz;
                let tp = target_period(&SpinParams::new(a_eq, dict.b_ref_hz), dict.larmor_hz);
                for &b in &[b_range.0, b_range.1] {
                    if let Some(a) = solve_a_for_period(tp, b, dict.larmor_hz) {
                        a_lo = a_lo.min(a);
                        a_hi = a_hi.max(a);
                    }
                }
            }
        }
        RegressionDatasetSpec {
            regime,
            cell_range,
            b_range_hz: b_range,
            a_norm_range_hz: (a_lo, a_hi),
            gen: SampleGenConfig {
                noise_sigma: 0.02,
                ..SampleGenConfig::default()
            },
        }
    }

    pub fn normalize_label(&self, a_hz: f64, b_hz: f64) -> [f32; 2] {
        let (alo, ahi) = self.a_norm_range_hz;
        let (blo, bhi) = self.b_range_hz;
        [
            ((a_hz - alo) / (ahi - alo)) as f32,
            ((b_hz - blo) / (bhi - blo)) as f32,
        ]
    }

    pub fn denormalize_label(&self, label: [f32; 2]) -> (f64, f64) {
        let (alo, ahi) = self.a_norm_range_hz;
        let (blo, bhi) = self.b_range_hz;
        (
            alo + label[0] as f64 * (ahi - alo),
            blo + label[1] as f64 * (bhi - blo),
        )
    }
}

/// Build one regression sample: a single on-contour spin rendered at its
/// cell's period; label = normalized (A, B).
pub fn make_regression_sample(
    dict: &PeriodDictionary,
    _dft: &DftTable,
    spec: &RegressionDatasetSpec,
    seed: u64,
) -> Result<LabeledSample> {
    let cfg = acquisition_for(spec.regime, dict.larmor_hz);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dp = match &spec.gen.decoherence {
        Some(range) => draw_decoherence(&mut rng, range),
        None => None,
    };
    let cell = rng.gen_range(spec.cell_range.0..=spec.cell_range.1);
    let b = rng.gen_range(spec.b_range_hz.0..=spec.b_range_hz.1);
    let jit: f64 = rng.gen_range(-0.5..=0.5) * dict.a_step_hz;
    let a_eq = dict.a_of(cell) + jit;
    let tp_spin = target_period(&SpinParams::new(a_eq, dict.b_ref_hz), dict.larmor_hz);
    let a = solve_a_for_period(tp_spin, b, dict.larmor_hz).unwrap_or(a_eq);
    let spins = vec![SpinParams::new(a, b)];

    let tp_s = dict.tp_of(cell);
    let width_s = crop_width_for(dict.a_of(cell), &spec.gen.width_config());
    let noise_seed = splitmix64(seed);
    let input = render_hpc_input(&cfg, &spins, dp.as_ref(), &spec.gen, noise_seed, tp_s, width_s)?;
    let label = spec.normalize_label(a, b).to_vec();
    Ok(LabeledSample {
        input,
        label,
        meta: SampleMeta {
            seed,
            noise_seed,
            spins,
            class_id: 0,
            target_pos: Some(cell),
            dp,
            tp_s,
            width_s,
            window_start: None,
        },
    })
}

/// Build one broad-dip counting sample: class 1 = no spin in the index
/// range, class c > 1 = `min_count + c - 2` spins with periods spread across
/// the range.
pub fn make_dip_count_sample(
    dict: &PeriodDictionary,
    dft: &DftTable,
    spec: &DipCountSpec,
    class_id: usize,
    seed: u64,
) -> Result<LabeledSample> {
    let classes = spec.classes();
    assert!(class_id >= 1 && class_id <= classes);
    let regime = spec.regime;
    let cfg = acquisition_for(regime, dict.larmor_hz);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dp = match &spec.gen.decoherence {
        Some(range) => draw_decoherence(&mut rng, range),
        None => None,
    };

    let (lo, hi) = spec.index_range;
    let a_lo = dict.a_of(lo) - 0.5 * dict.a_step_hz;
    let a_hi = dict.a_of(hi) + 0.5 * dict.a_step_hz;
    // Guard the whole run (plus resolution margin) for the bath.
    let guard: Vec<f64> = (lo..=hi).map(|k| dict.a_of(k)).collect();
    let guard_hz = regime.resolution_hz().max(dict.a_step_hz);
    let mut spins = bath_from_rng(
        &mut rng,
        dft,
        dict,
        spec.spin_count_range,
        spec.dft_fraction_range,
        regime.bath_a_range_hz(),
        regime.bath_b_range_hz(),
        &guard,
        guard_hz,
    );
    if let Some(count) = spec.count_of_class(class_id) {
        for _ in 0..count {
            let b = rng.gen_range(spec.target_b_range_hz.0..=spec.target_b_range_hz.1);
            let a_eq = rng.gen_range(a_lo..=a_hi);
            let tp = target_period(&SpinParams::new(a_eq, dict.b_ref_hz), dict.larmor_hz);
            let a = solve_a_for_period(tp, b, dict.larmor_hz).unwrap_or(a_eq);
            spins.push(SpinParams::new(a, b));
        }
    }

    let center = (lo + hi) / 2;
    let tp_s = dict.tp_of(center);
    let width_s = crop_width_for(dict.a_of(center), &spec.gen.width_config());
    let noise_seed = splitmix64(seed);
    let input = render_hpc_input(&cfg, &spins, dp.as_ref(), &spec.gen, noise_seed, tp_s, width_s)?;
    Ok(LabeledSample {
        input,
        label: one_hot(class_id - 1, classes),
        meta: SampleMeta {
            seed,
            noise_seed,
            spins,
            class_id,
            target_pos: Some(center),
            dp,
            tp_s,
            width_s,
            window_start: None,
        },
    })
}
