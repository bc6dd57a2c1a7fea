//! Temporary diagnostic (will be removed).

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use nvspec_core::{
    data::{
        acquisition_for, make_hpc_sample, DftTable, HpcDatasetSpec, HpcRegime, TargetKind,
    },
    imaging::{crop_width_for, flatten_image, slice_and_stack, PeriodDictionary, WidthConfig},
    pipeline::{eval_hpc_entry, train_hpc_entry, HpcTrainConfig},
    signal::{
        add_gaussian_noise, apply_decoherence, cpmg_signal, larmor_hz_from_gauss,
        DecoherenceParams, SpinParams, DEFAULT_FIELD_GAUSS,
    },
};

fn infer_row(model: &nvspec_core::nn::Model<f32>, flat: &[f32]) -> Vec<f64> {
    let mut x = Array2::<f32>::zeros((1, flat.len()));
    for (j, &v) in flat.iter().enumerate() {
        x[(0, j)] = v;
    }
    let y = model.infer(&x).unwrap();
    y.row(0).iter().map(|&v| v as f64).collect()
}

#[test]
fn generator_vs_sweep_images() {
    let larmor = larmor_hz_from_gauss(DEFAULT_FIELD_GAUSS);
    let dict = PeriodDictionary::reference(larmor);
    let dft = DftTable::bundled();
    let cell = 1314usize;

    let targets: Vec<TargetKind> = (cell..cell + 5).map(TargetKind::DictCell).collect();
    let spec = HpcDatasetSpec::for_regime(HpcRegime::N32HighB, targets);
    let cfg = HpcTrainConfig {
        samples_per_class: 1500,
        epochs: 24,
        ..HpcTrainConfig::default()
    };
    let (entry, _) = train_hpc_entry(&dict, dft, spec.clone(), &cfg).expect("train");
    let m = eval_hpc_entry(&entry, &dict, dft, 80, 0xeeee).expect("eval");
    eprintln!("held-out acc {:.3} auc {:?}", m.accuracy, m.auc);

    // Model output on its own generator samples, class by class.
    for class_id in 1..=3 {
        let s = make_hpc_sample(&dict, dft, &entry.spec, class_id, 0, 0xabcd + class_id as u64)
            .unwrap();
        eprintln!("gen class {class_id} -> {:?}", infer_row(&entry.model, &s.input));
    }

    // Scene: planted on-cell spin + 27 bath spins away from the window.
    let planted_a_eq = dict.a_of(cell);
    let tp_cell = dict.tp_of(cell);
    let b_planted = 30_000.0;
    let a_planted =
        nvspec_core::signal::solve_a_for_period(tp_cell, b_planted, larmor).unwrap();
    let planted = SpinParams::new(a_planted, b_planted);
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    let mut spins = vec![planted];
    while spins.len() < 28 {
        let a = rng.gen_range(-50_000.0..=50_000.0);
        let b = rng.gen_range(6_000.0..=80_000.0);
        let s = SpinParams::new(a, b);
        let a_eq = dict
            .a_equivalent_of_period(nvspec_core::signal::target_period(&s, larmor))
            .unwrap_or(f64::MAX);
        if (a_eq - planted_a_eq).abs() > 1_000.0 {
            spins.push(s);
        }
    }
    let acq = acquisition_for(HpcRegime::N32HighB, larmor);
    let wc = WidthConfig::default();
    let width = crop_width_for(dict.a_of(cell), &wc);

    let pure = cpmg_signal(&spins, &acq);
    let img_pure = slice_and_stack(&pure, tp_cell, width, 33, entry.spec.gen.interp).unwrap();
    let flat_pure: Vec<f32> = flatten_image(&img_pure).iter().map(|&v| v as f32).collect();
    eprintln!("scene pure -> {:?}", infer_row(&entry.model, &flat_pure));

    let dp = DecoherenceParams::new(1e-4, 1.7);
    let deco = apply_decoherence(&pure, &dp);
    let img_d = slice_and_stack(&deco, tp_cell, width, 33, entry.spec.gen.interp).unwrap();
    let flat_d: Vec<f32> = flatten_image(&img_d).iter().map(|&v| v as f32).collect();
    eprintln!("scene deco -> {:?}", infer_row(&entry.model, &flat_d));

    let noisy = add_gaussian_noise(&deco, 0.05, 0.05, 99);
    let img_n = slice_and_stack(&noisy, tp_cell, width, 33, entry.spec.gen.interp).unwrap();
    let flat_n: Vec<f32> = flatten_image(&img_n).iter().map(|&v| v as f32).collect();
    eprintln!("scene noisy -> {:?}", infer_row(&entry.model, &flat_n));

    // Bath-only scene (no planted spin): expect class 1.
    let bath_pure = cpmg_signal(&spins[1..], &acq);
    let bath_noisy = add_gaussian_noise(&apply_decoherence(&bath_pure, &dp), 0.05, 0.05, 98);
    let img_b = slice_and_stack(&bath_noisy, tp_cell, width, 33, entry.spec.gen.interp).unwrap();
    let flat_b: Vec<f32> = flatten_image(&img_b).iter().map(|&v| v as f32).collect();
    eprintln!("bath noisy -> {:?}", infer_row(&entry.model, &flat_b));

    // Compare center columns: generator class-2 (clean render) vs scene pure.
    let mut clean_spec = entry.spec.clone();
    clean_spec.gen.noise_sigma = 0.0;
    clean_spec.gen.decoherence = None;
    let s_clean = make_hpc_sample(&dict, dft, &clean_spec, 2, 0, 0x1234).unwrap();
    eprintln!("gen clean class2 -> {:?}", infer_row(&entry.model, &s_clean.input));
    let w_px = img_pure.width();
    let gen_center: Vec<f32> = (0..33).map(|r| s_clean.input[r * w_px + w_px / 2]).collect();
    let scene_center: Vec<f32> = (0..33).map(|r| flat_pure[r * w_px + w_px / 2]).collect();
    eprintln!("gen center col   {:?}", &gen_center[..12]);
    eprintln!("scene center col {:?}", &scene_center[..12]);
    let gen_min: Vec<f32> = (0..6)
        .map(|r| {
            (0..w_px)
                .map(|j| s_clean.input[r * w_px + j])
                .fold(f32::INFINITY, f32::min)
        })
        .collect();
    let scene_min: Vec<f32> = (0..6)
        .map(|r| (0..w_px).map(|j| flat_pure[r * w_px + j]).fold(f32::INFINITY, f32::min))
        .collect();
    eprintln!("gen row mins   {:?}", gen_min);
    eprintln!("scene row mins {:?}", scene_min);
}
