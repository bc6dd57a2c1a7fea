//! Windowed denoiser inference with overlap-averaged stitching.

use ndarray::Array2;

use crate::nn::{Model, ReuseKey};
use crate::signal::{Trace, TraceKind};
use crate::{CoreError, Real, Result};

/// Run the denoiser over the trace in windows of the trained length (hop =
/// half window, the final window right-aligned), average the overlaps and
/// clamp to [0, 1]. The model's reuse key must match the trace acquisition.
pub fn denoise(trace: &Trace<Real>, model: &Model<f32>, key: &ReuseKey) -> Result<Trace<Real>> {
    let cfg = &trace.config;
    let expected = ReuseKey::denoiser(cfg.n_pulses, cfg.tau_step_s);
    key.ensure_matches(&expected)?;
    let w = model.in_dim();
    if model.out_dim() != w {
        return Err(CoreError::Config(format!(
            "denoiser output width {} differs from input width {w}",
            model.out_dim()
        )));
    }
    let n = trace.values.len();
    if n < w {
        return Err(CoreError::InsufficientTrace {
            required_s: w as f64 * cfg.tau_step_s,
            available_s: n as f64 * cfg.tau_step_s,
        });
    }
    let hop = (w / 2).max(1);
    let mut starts: Vec<usize> = (0..).map(|k| k * hop).take_while(|&s| s + w <= n).collect();
    if starts.last() != Some(&(n - w)) {
        starts.push(n - w);
    }
    let mut batch = Array2::<f32>::zeros((starts.len(), w));
    for (r, &s) in starts.iter().enumerate() {
        for j in 0..w {
            batch[(r, j)] = trace.values[s + j] as f32;
        }
    }
    let out = model.infer(&batch)?;
    let mut sum = vec![0.0f64; n];
    let mut cnt = vec![0.0f64; n];
    for (r, &s) in starts.iter().enumerate() {
        for j in 0..w {
            sum[s + j] += out[(r, j)] as f64;
            cnt[s + j] += 1.0;
        }
    }
    let values: Vec<Real> = sum
        .iter()
        .zip(cnt.iter())
        .map(|(&v, &c)| (v / c).clamp(0.0, 1.0))
        .collect();
    Ok(Trace::new(cfg.clone(), values, TraceKind::Denoised))
}
