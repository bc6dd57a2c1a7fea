//! Stretched-exponential decoherence: application, inversion, and envelope
//! fitting.
//!
//! The decohered signal is `P = M/2 * exp(-(tau/T)^n) + 1/2` where
//! `M = 2 P_pure - 1`. Recovery divides the centered signal by the envelope;
//! below a configurable envelope floor the division would only amplify noise,
//! so values pass through unscaled and are flagged low-confidence.

use serde::{Deserialize, Serialize};

use crate::{Scalar, signal::{Trace, TraceKind}};

/// Envelope floor below which recovery passes values through unscaled.
pub const DEFAULT_ENVELOPE_FLOOR: f64 = 0.05;

/// Dephasing time T and stretch exponent n. `t_s = +inf` is the sentinel for
/// a non-decaying trace (envelope identically 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceParams<S: Scalar> {
    pub t_s: S,
    pub n_exp: S,
}

impl<S: Scalar> DecoherenceParams<S> {
    pub fn new(t_s: S, n_exp: S) -> Self {
        debug_assert!(t_s > S::zero() && n_exp > S::zero());
        DecoherenceParams { t_s, n_exp }
    }

    /// Non-decaying sentinel: T = +inf, n = 1.
    pub fn none() -> Self {
        DecoherenceParams {
            t_s: S::infinity(),
            n_exp: S::one(),
        }
    }

    pub fn is_none(&self) -> bool {
        self.t_s == S::infinity()
    }

    /// Envelope exp(-(tau/T)^n).
    pub fn envelope(&self, tau_s: S) -> S {
        if self.is_none() {
            return S::one();
        }
        (-(tau_s / self.t_s).powf(self.n_exp)).exp()
    }
}

/// Multiply the centered signal by the decoherence envelope.
pub fn apply_decoherence<S: Scalar>(trace: &Trace<S>, dp: &DecoherenceParams<S>) -> Trace<S> {
    debug_assert_eq!(trace.kind, TraceKind::Pure);
    let half = S::of(0.5);
    let values = trace
        .values
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let tau = trace.config.tau_at(i);
            let m = p + p - S::one();
            half * m * dp.envelope(tau) + half
        })
        .collect();
    Trace::new(trace.config.clone(), values, TraceKind::Decohered)
}

/// Divide out the decoherence envelope.
///
/// Returns the recovered trace and a per-point low-confidence flag: `true`
/// where the envelope was below `floor` and the value passed through
/// unscaled.
pub fn recover_decoherence<S: Scalar>(
    trace: &Trace<S>,
    dp: &DecoherenceParams<S>,
    floor: S,
) -> (Trace<S>, Vec<bool>) {
    let half = S::of(0.5);
    let one = S::one();
    let mut low = Vec::with_capacity(trace.len());
    let values = trace
        .values
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let tau = trace.config.tau_at(i);
            let env = dp.envelope(tau);
            if env >= floor {
                low.push(false);
                ((p - half) / env + half).min(one).max(S::zero())
            } else {
                low.push(true);
                p
            }
        })
        .collect();
    (
        Trace::new(trace.config.clone(), values, TraceKind::Recovered),
        low,
    )
}

/// Options for [`fit_decoherence`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoherenceFitOptions<S: Scalar> {
    /// Envelope-sampling window; `None` derives one Larmor period from the
    /// trace config.
    pub window_s: Option<S>,
    /// Extra constant subtracted from the measured envelope before fitting,
    /// on top of the automatic correction.
    pub noise_bias: S,
    /// Estimate the noise level from first differences and subtract the
    /// crest-statistic bias it induces.
    pub auto_noise_bias: bool,
}

impl<S: Scalar> Default for DecoherenceFitOptions<S> {
    fn default() -> Self {
        DecoherenceFitOptions {
            window_s: None,
            noise_bias: S::zero(),
            auto_noise_bias: true,
        }
    }
}

/// Window-maximum bias in units of the first-difference noise level.
///
/// The acquisition noise is a Gaussian truncated near one sigma, so the
/// per-window maximum of several hundred samples sits one clip above the
/// crest with negligible spread. First differences of that truncated noise
/// have sigma about 0.54 of the clip, hence max - 1.85 sigma_hat recovers
/// the crest. For a noiseless trace sigma_hat is ~0 and the maximum is the
/// crest itself.
const CREST_BIAS_FACTOR: f64 = 1.85;

/// Stretch exponents outside this range are unphysical for a spin bath and
/// get clamped before the intercept refit.
const MAX_STRETCH: f64 = 4.5;

/// Robust P-space noise estimate from second differences, which cancel the
/// locally linear part of the signal (dip walls) that would contaminate
/// first differences.
fn estimate_noise_level<S: Scalar>(trace: &Trace<S>) -> f64 {
    let mut diffs: Vec<f64> = trace
        .values
        .windows(3)
        .map(|w| (w[2].f64() - 2.0 * w[1].f64() + w[0].f64()).abs())
        .collect();
    if diffs.is_empty() {
        return 0.0;
    }
    let mid = diffs.len() / 2;
    diffs.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    // MAD-to-sigma for a normal, then /sqrt(6) for the (1, -2, 1) stencil.
    diffs[mid] * 1.4826 / 6f64.sqrt()
}

fn median_in_place(v: &mut [f64]) -> f64 {
    let mid = v.len() / 2;
    v.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    v[mid]
}

/// Fit (T, n) to the upper envelope of a trace.
///
/// Each window of one Larmor period contributes its bias-corrected maximum
/// at the tau where the maximum occurred; windows whose maximum rides the
/// [0, 1] clamp are censored instead of fitted. The line
/// `ln(-ln e) = n ln tau - n ln T` is then fit by Theil-Sen, so windows
/// depressed by a coherence dip fall out as outliers. A trace whose
/// envelope never decays returns the `T = +inf, n = 1` sentinel.
pub fn fit_decoherence<S: Scalar>(
    trace: &Trace<S>,
    opts: &DecoherenceFitOptions<S>,
) -> DecoherenceParams<S> {
    let cfg = &trace.config;
    let window_s = opts
        .window_s
        .unwrap_or_else(|| cfg.larmor_hz.recip())
        .max(cfg.tau_step_s);
    let win = (window_s / cfg.tau_step_s).f64().round().max(1.0) as usize;

    let sigma = if opts.auto_noise_bias {
        estimate_noise_level(trace)
    } else {
        0.0
    };
    let bias = opts.noise_bias.f64() + CREST_BIAS_FACTOR * sigma;

    // (ln tau, ln(-ln e)) points from bias-corrected window maxima.
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut i = 0;
    while i < trace.len() {
        let end = (i + win).min(trace.len());
        let mut m = f64::NEG_INFINITY;
        let mut at = i;
        for (j, v) in trace.values[i..end].iter().enumerate() {
            let v = v.f64();
            if v > m {
                m = v;
                at = i + j;
            }
        }
        i = end;
        // Censor windows whose maximum is clamped: the crest statistic is
        // then a property of the clamp, not the envelope.
        if m >= 1.0 - (0.5 * sigma).max(1e-6) {
            continue;
        }
        let tau = cfg.tau_at(at).f64();
        let e = 2.0 * (m - bias) - 1.0;
        if tau > 0.0 && e > 0.02 && e < 0.92 {
            xs.push(tau.ln());
            ys.push((-e.ln()).ln());
        }
    }

    if xs.len() < 3 {
        return DecoherenceParams::none();
    }
    let mut slopes: Vec<f64> = Vec::new();
    for a in 0..xs.len() {
        for b in (a + 1)..xs.len() {
            let dx = xs[b] - xs[a];
            if dx.abs() > 1e-9 {
                slopes.push((ys[b] - ys[a]) / dx);
            }
        }
    }
    if slopes.is_empty() {
        return DecoherenceParams::none();
    }
    let slope = median_in_place(&mut slopes);
    if slope <= 0.3 {
        // Indistinguishable from a flat envelope at this noise level.
        return DecoherenceParams::none();
    }
    let slope = slope.min(MAX_STRETCH);
    let mut resid: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - slope * x).collect();
    let intercept = median_in_place(&mut resid);
    let t_s = (-intercept / slope).exp();
    if !t_s.is_finite() || t_s <= 0.0 {
        return DecoherenceParams::none();
    }
    DecoherenceParams::new(S::of(t_s), S::of(slope))
}
