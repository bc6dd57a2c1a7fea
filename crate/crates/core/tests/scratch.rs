//! Temporary smoke test for the pipeline chain (will be replaced).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use nvspec_core::{
    data::{acquisition_for, DftTable, HpcRegime},
    imaging::PeriodDictionary,
    pipeline::{
        extract_detections, fine_tune, hpc_sweep, regress_ab, train_hpc_bank,
        train_regressor_bank, FineTuneConfig, HpcTrainConfig, RegressTrainConfig,
    },
    signal::{
        add_gaussian_noise, apply_decoherence, cpmg_signal, recover_decoherence,
        DecoherenceParams, SpinParams, DEFAULT_FIELD_GAUSS,
    },
};

#[test]
fn tiny_pipeline_smoke() {
    let t0 = std::time::Instant::now();
    let larmor = nvspec_core::signal::larmor_hz_from_gauss(DEFAULT_FIELD_GAUSS);
    let dict = PeriodDictionary::reference(larmor);
    let dft = DftTable::bundled();

    // One strong spin at a_eq ~ 15.7 kHz plus a realistic 27-spin bath kept
    // clear of the swept window.
    let planted = SpinParams::new(14_800.0, 30_000.0);
    let tp = nvspec_core::signal::target_period(&planted, larmor);
    let cell = dict.index_of_period(tp).expect("in dictionary");
    eprintln!("planted cell {cell} (a_eq {:.1})", dict.a_of(cell));

    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let mut spins = vec![planted];
    while spins.len() < 28 {
        let a = rng.gen_range(-50_000.0..=50_000.0);
        let b = rng.gen_range(6_000.0..=80_000.0);
        let s = SpinParams::new(a, b);
        let a_eq = dict
            .a_equivalent_of_period(nvspec_core::signal::target_period(&s, larmor))
            .unwrap_or(f64::MAX);
        if (a_eq - dict.a_of(cell)).abs() > 1_000.0 {
            spins.push(s);
        }
    }

    let cell_range = (cell - 25, cell + 25);
    let cfg = HpcTrainConfig {
        samples_per_class: 600,
        epochs: 16,
        ..HpcTrainConfig::default()
    };
    let bank = train_hpc_bank(HpcRegime::N32HighB, cell_range, &dict, dft, &cfg).expect("bank");
    eprintln!("bank trained: {} entries, {:.1?}", bank.entries.len(), t0.elapsed());

    let acq = acquisition_for(HpcRegime::N32HighB, larmor);
    let pure = cpmg_signal(&spins, &acq);
    let dp = DecoherenceParams::new(1e-4, 1.7);
    for seed in [99u64, 100, 101] {
        let probe = add_gaussian_noise(&apply_decoherence(&pure, &dp), 0.05, 0.05, seed);
        let f = nvspec_core::signal::fit_decoherence(&probe, &Default::default());
        let mut d: Vec<f64> = probe.values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let sig = d[d.len() / 2] * 1.4826 / std::f64::consts::SQRT_2;
        eprintln!(
            "fit probe seed {seed}: T={:.3e} n={:.2} sigma_hat={:.4} (true 1e-4, 1.7, tn-std 0.027)",
            f.t_s, f.n_exp, sig
        );
    }
    let noisy = add_gaussian_noise(&apply_decoherence(&pure, &dp), 0.05, 0.05, 99);
    let fitted = nvspec_core::signal::fit_decoherence(&noisy, &Default::default());
    let (recovered, _) = recover_decoherence(&noisy, &fitted, 0.05);

    let curve = hpc_sweep(&recovered, &bank, &dict, cell_range).expect("sweep");
    eprintln!(
        "scores: {:?}",
        curve.scores.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
    );
    for (i, cs) in curve.class_scores.iter().enumerate() {
        eprintln!(
            "  cell {} classes {:?}",
            curve.cell_of(i),
            cs.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()
        );
    }
    let det = extract_detections(&curve, dict.a_step_hz);
    eprintln!("peaks: {:?}, broad: {:?}", det.peaks, det.broad);
    assert!(!det.peaks.is_empty(), "planted spin detected");
    let hit = det
        .peaks
        .iter()
        .min_by_key(|p| p.cell.abs_diff(cell))
        .unwrap();
    assert!(hit.cell.abs_diff(cell) <= 3, "peak at planted cell, got {}", hit.cell);

    let rcfg = RegressTrainConfig {
        band_cells: 25,
        ..RegressTrainConfig::default()
    };
    let regs =
        train_regressor_bank(HpcRegime::N32HighB, cell_range, &dict, dft, &rcfg).expect("regs");
    let entry = regs.owner_of(hit.cell).expect("covered");
    let (a_est, b_est) = regress_ab(&recovered, entry, &dict, hit.cell).expect("regress");
    eprintln!(
        "regressed A {:.0} (true {:.0}), B {:.0} (true {:.0}) after {:.1?}",
        a_est, planted.a_hz, b_est, planted.b_hz, t0.elapsed()
    );

    // Fine-tune the planted spin; freeze everything else as bath knowledge.
    let ft_cfg = FineTuneConfig {
        uncertainty_repeats: 0,
        ..FineTuneConfig::default()
    };
    let start = vec![SpinParams::new(a_est, b_est)];
    let out = fine_tune(&start, &recovered, &spins[1..], &ft_cfg).expect("fine tune");
    eprintln!(
        "refined ({:.0}, {:.0}) true ({:.0}, {:.0}); passes {}, loss {:.3e}, windows {}, {:.1?}",
        out.refined[0].a_hz,
        out.refined[0].b_hz,
        planted.a_hz,
        planted.b_hz,
        out.passes,
        out.final_loss,
        out.window_count,
        t0.elapsed()
    );
    assert!((out.refined[0].a_hz - planted.a_hz).abs() < 500.0, "A refined");
    assert!((out.refined[0].b_hz - planted.b_hz).abs() < 3000.0, "B refined");
}
