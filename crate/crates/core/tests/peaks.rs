//! Peak-finder behavior against an independently written brute-force
//! oracle, plus the documented edge cases.

use nvspec_core::peaks::{find_peaks, local_maxima, peak_prominence, peak_width, PeakParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Brute-force reference: every rule evaluated from its plain definition,
/// no shared code with the implementation.
mod oracle {
    pub fn maxima(x: &[f64]) -> Vec<usize> {
        let n = x.len();
        let mut out = Vec::new();
        for start in 1..n.saturating_sub(1) {
            // `start` opens a plateau (possibly of length 1) if the sample
            // before it is strictly lower and the value holds until a
            // strictly lower sample follows.
            if x[start - 1] >= x[start] {
                continue;
            }
            let mut end = start;
            while end + 1 < n && x[end + 1] == x[start] {
                end += 1;
            }
            if end + 1 < n && x[end + 1] < x[start] {
                out.push((start + end) / 2);
            }
        }
        out
    }

    /// Greedy selection: repeatedly accept the highest remaining candidate
    /// (later index on ties) and discard all others closer than `d`.
    pub fn distance_filter(cands: &[usize], x: &[f64], d: usize) -> Vec<usize> {
        let mut remaining: Vec<usize> = cands.to_vec();
        let mut kept = Vec::new();
        while let Some(best_pos) = remaining
            .iter()
            .enumerate()
            .max_by(|(ia, &a), (ib, &b)| {
                x[a].partial_cmp(&x[b])
                    .unwrap()
                    .then(ia.cmp(ib))
            })
            .map(|(i, _)| i)
        {
            let best = remaining.remove(best_pos);
            kept.push(best);
            remaining.retain(|&p| p.abs_diff(best) >= d);
        }
        kept.sort_unstable();
        kept
    }

    /// Prominence from the definition: on each side find the window up to
    /// the nearest strictly higher sample (or the edge); take that window's
    /// minimum; prominence is the drop to the higher of the two minima.
    pub fn prominence(x: &[f64], p: usize) -> (f64, usize, usize) {
        let higher_left = (0..p).rev().find(|&i| x[i] > x[p]);
        let lo = higher_left.map_or(0, |i| i + 1);
        let (lbase, lmin) = (lo..=p)
            .map(|i| (i, x[i]))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        let higher_right = (p + 1..x.len()).find(|&i| x[i] > x[p]);
        let hi = higher_right.map_or(x.len() - 1, |i| i - 1);
        let (rbase, rmin) = (p..=hi)
            .map(|i| (i, x[i]))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        (x[p] - lmin.max(rmin), lbase, rbase)
    }

    /// Width at `rel` of the prominence: the extent of the region around
    /// the apex where the curve stays strictly above the evaluation height.
    /// A sample exactly at the height is the crossing; a jump below it is
    /// interpolated.
    pub fn width(x: &[f64], p: usize, rel: f64) -> f64 {
        let (prom, lbase, rbase) = prominence(x, p);
        let h = x[p] - rel * prom;
        let left = match (lbase..p).rev().find(|&i| x[i] <= h) {
            Some(i) if x[i] == h => i as f64,
            Some(i) => i as f64 + (h - x[i]) / (x[i + 1] - x[i]),
            None => lbase as f64,
        };
        let right = match (p + 1..=rbase).find(|&i| x[i] <= h) {
            Some(i) if x[i] == h => i as f64,
            Some(i) => i as f64 - (h - x[i]) / (x[i - 1] - x[i]),
            None => rbase as f64,
        };
        right - left
    }

    pub fn find(x: &[f64], params: &super::PeakParams) -> Vec<usize> {
        let mut peaks = maxima(x);
        if let Some(h) = params.height {
            peaks.retain(|&p| x[p] >= h);
        }
        if let Some(d) = params.distance {
            peaks = distance_filter(&peaks, x, d);
        }
        if let Some(pm) = params.prominence {
            peaks.retain(|&p| prominence(x, p).0 >= pm);
        }
        if let Some(w) = params.width {
            peaks.retain(|&p| width(x, p, params.rel_height) >= w);
        }
        peaks
    }
}

fn random_curve(rng: &mut impl Rng, len: usize, smooth: bool) -> Vec<f64> {
    let mut x: Vec<f64> = (0..len).map(|_| rng.gen::<f64>()).collect();
    if smooth {
        for _ in 0..2 {
            let y = x.clone();
            for i in 1..len - 1 {
                x[i] = 0.25 * y[i - 1] + 0.5 * y[i] + 0.25 * y[i + 1];
            }
        }
    }
    x
}

#[test]
fn matches_oracle_on_random_curves() {
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    let paramsets = [
        PeakParams::default(),
        PeakParams {
            height: Some(0.6),
            ..PeakParams::default()
        },
        PeakParams {
            distance: Some(4),
            ..PeakParams::default()
        },
        PeakParams {
            prominence: Some(0.2),
            ..PeakParams::default()
        },
        PeakParams {
            width: Some(2.0),
            ..PeakParams::default()
        },
        PeakParams::confidence(0.75),
        PeakParams::confidence(0.9),
    ];
    for case in 0..500 {
        let len = 10 + (case % 190);
        let smooth = case % 2 == 0;
        let x = random_curve(&mut rng, len, smooth);
        for params in &paramsets {
            let got = find_peaks(&x, params);
            let want = oracle::find(&x, params);
            assert_eq!(got, want, "case {case}, params {params:?}");
        }
    }
}

#[test]
fn matches_oracle_on_plateaus_and_ties() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    // Quantized curves force plateaus and exact value ties.
    for case in 0..300 {
        let len = 12 + (case % 80);
        let x: Vec<f64> = (0..len).map(|_| (rng.gen_range(0..6) as f64) / 5.0).collect();
        for params in [
            PeakParams::default(),
            PeakParams {
                distance: Some(3),
                ..PeakParams::default()
            },
            PeakParams::confidence(0.5),
        ] {
            let got = find_peaks(&x, &params);
            let want = oracle::find(&x, &params);
            assert_eq!(got, want, "case {case}, params {params:?}, x {x:?}");
        }
    }
}

#[test]
fn triangular_bump_has_one_peak_at_apex() {
    let x = [0.0, 0.25, 0.5, 0.75, 1.0, 0.75, 0.5, 0.25, 0.0];
    let peaks = find_peaks(
        &x,
        &PeakParams {
            height: Some(0.9),
            distance: Some(4),
            prominence: Some(0.5),
            width: Some(2.0),
            rel_height: 0.5,
        },
    );
    assert_eq!(peaks, vec![4]);
}

#[test]
fn flat_curve_has_no_peaks() {
    let x = [0.3; 50];
    assert!(find_peaks(&x, &PeakParams::default()).is_empty());
    assert!(local_maxima(&x).is_empty());
}

#[test]
fn short_inputs_are_safe() {
    for x in [&[][..], &[1.0][..], &[1.0, 2.0][..]] {
        assert!(find_peaks(x, &PeakParams::default()).is_empty());
    }
}

#[test]
fn prominence_and_width_match_oracle_pointwise() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    for _ in 0..200 {
        let x = random_curve(&mut rng, 60, true);
        for p in local_maxima(&x) {
            let (got_prom, got_l, got_r) = peak_prominence(&x, p);
            let (want_prom, want_l, want_r) = oracle::prominence(&x, p);
            assert!((got_prom - want_prom).abs() < 1e-12);
            assert_eq!((got_l, got_r), (want_l, want_r));
            let gw = peak_width(&x, p, 0.5);
            let ww = oracle::width(&x, p, 0.5);
            assert!((gw - ww).abs() < 1e-12, "width {gw} vs {ww}");
        }
    }
}
