//! Slicing a trace at a candidate period into a stacked 2D image.
//!
//! Row `r` of the image covers one period-length window centered on the
//! `r`-th expected coherence dip. A spin whose local period matches the
//! slicing period appears as a vertical line through the center column;
//! off-period spins appear as sloped lines, and strong-coupling spins as
//! fringe patterns.

use ndarray::Array2;

use crate::{
    CoreError, Result, Scalar,
    signal::{AcquisitionConfig, Trace},
};

/// Default number of stacked slices.
pub const DEFAULT_N_SLICES: usize = 33;

/// Resampling mode used to place pixels on the per-row grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Interp {
    Nearest,
    Linear,
}

/// Crop-width configuration: wide windows resolve the fringe structure of
/// strongly shifted spins, narrow windows cut the cost for |A| near zero.
#[derive(Debug, Clone, Copy)]
pub struct WidthConfig {
    pub wide_s: f64,
    pub narrow_s: f64,
    pub threshold_a_hz: f64,
}

impl Default for WidthConfig {
    fn default() -> Self {
        WidthConfig {
            wide_s: 100e-9,
            narrow_s: 60e-9,
            threshold_a_hz: 10_000.0,
        }
    }
}

/// Window width for a given A: wide for |A| >= threshold (ties wide),
/// narrow below.
pub fn crop_width_for(a_hz: f64, cfg: &WidthConfig) -> f64 {
    if a_hz.abs() >= cfg.threshold_a_hz {
        cfg.wide_s
    } else {
        cfg.narrow_s
    }
}

/// Period-sliced image with its slice geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodImage<S: Scalar> {
    /// H x W pixels, values in [0, 1].
    pub pixels: Array2<S>,
    pub tp_s: f64,
    pub width_s: f64,
    /// Tau of pixel (0, 0) (pixel centers are offset half a pitch into the
    /// window).
    pub origin_s: f64,
    pub interp: Interp,
}

impl<S: Scalar> PeriodImage<S> {
    pub fn height(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn width(&self) -> usize {
        self.pixels.ncols()
    }

    /// Column index of the per-row minimum.
    pub fn row_argmin(&self, r: usize) -> usize {
        let row = self.pixels.row(r);
        let mut best = 0;
        for j in 1..row.len() {
            if row[j] < row[best] {
                best = j;
            }
        }
        best
    }
}

/// Center tau of row 0: the first expected dip (odd multiple of tp/2) whose
/// full window fits after the trace start. For a trace starting at tau = 0
/// this is tp/2, putting the target dip in the image center column.
fn first_row_center(tau_start_s: f64, tp_s: f64, width_s: f64) -> f64 {
    let m = ((tau_start_s + 0.5 * width_s) / tp_s - 0.5).ceil().max(0.0);
    (m + 0.5) * tp_s
}

/// Largest slice count that fits in the trace for this period and width.
pub fn max_slices<S: Scalar>(cfg: &AcquisitionConfig<S>, tp_s: f64, width_s: f64) -> usize {
    let c0 = first_row_center(cfg.tau_start_s.f64(), tp_s, width_s);
    let room = cfg.tau_end_s.f64() - 0.5 * width_s - c0;
    if room < 0.0 {
        0
    } else {
        (room / tp_s).floor() as usize + 1
    }
}

fn pixel_tau(c0: f64, tp_s: f64, width_s: f64, pitch_s: f64, r: usize, j: usize) -> f64 {
    c0 + r as f64 * tp_s - 0.5 * width_s + (j as f64 + 0.5) * pitch_s
}

fn build_image<S: Scalar>(
    cfg: &AcquisitionConfig<S>,
    get: &dyn Fn(usize) -> S,
    tp_s: f64,
    width_s: f64,
    n_slices: usize,
    interp: Interp,
) -> Result<PeriodImage<S>> {
    let pitch = cfg.tau_step_s.f64();
    if width_s > tp_s {
        return Err(CoreError::Config(format!(
            "window width {width_s:.3e} s exceeds slicing period {tp_s:.3e} s"
        )));
    }
    if n_slices == 0 {
        return Err(CoreError::Config("n_slices must be positive".into()));
    }
    let w = (width_s / pitch).round() as usize;
    if w == 0 {
        return Err(CoreError::Config("window narrower than one pixel".into()));
    }
    let tau_start = cfg.tau_start_s.f64();
    let tau_end = cfg.tau_end_s.f64();
    let c0 = first_row_center(tau_start, tp_s, width_s);
    let required = c0 + (n_slices - 1) as f64 * tp_s + 0.5 * width_s - tau_start;
    let available = tau_end - tau_start;
    if required > available {
        return Err(CoreError::InsufficientTrace {
            required_s: required,
            available_s: available,
        });
    }
    let n_grid = cfg.grid_len();
    let last = (n_grid - 1) as f64;
    let mut pixels = Array2::zeros((n_slices, w));
    for r in 0..n_slices {
        for j in 0..w {
            let tau = pixel_tau(c0, tp_s, width_s, pitch, r, j);
            let x = ((tau - tau_start) / pitch).clamp(0.0, last);
            let v = match interp {
                Interp::Nearest => get(x.round().min(last) as usize),
                Interp::Linear => {
                    let i = x.floor() as usize;
                    if i + 1 >= n_grid {
                        get(n_grid - 1)
                    } else {
                        let f = S::of(x - i as f64);
                        let a = get(i);
                        a + f * (get(i + 1) - a)
                    }
                }
            };
            pixels[(r, j)] = v;
        }
    }
    Ok(PeriodImage {
        pixels,
        tp_s,
        width_s,
        origin_s: pixel_tau(c0, tp_s, width_s, pitch, 0, 0),
        interp,
    })
}

/// Slice a trace at `tp_s` into `n_slices` stacked rows of width `width_s`.
pub fn slice_and_stack<S: Scalar>(
    trace: &Trace<S>,
    tp_s: f64,
    width_s: f64,
    n_slices: usize,
    interp: Interp,
) -> Result<PeriodImage<S>> {
    build_image(
        &trace.config,
        &|i| trace.values[i],
        tp_s,
        width_s,
        n_slices,
        interp,
    )
}

/// Grid indices a sparse evaluation must cover to build the same image as
/// [`slice_and_stack`] (sorted, deduplicated).
pub fn required_indices<S: Scalar>(
    cfg: &AcquisitionConfig<S>,
    tp_s: f64,
    width_s: f64,
    n_slices: usize,
    interp: Interp,
) -> Vec<usize> {
    let pitch = cfg.tau_step_s.f64();
    let w = (width_s / pitch).round().max(1.0) as usize;
    let tau_start = cfg.tau_start_s.f64();
    let c0 = first_row_center(tau_start, tp_s, width_s);
    let n_grid = cfg.grid_len();
    let last = (n_grid - 1) as f64;
    let mut idx = Vec::with_capacity(n_slices * (w + 1));
    for r in 0..n_slices {
        for j in 0..w {
            let tau = pixel_tau(c0, tp_s, width_s, pitch, r, j);
            let x = ((tau - tau_start) / pitch).clamp(0.0, last);
            match interp {
                Interp::Nearest => idx.push(x.round().min(last) as usize),
                Interp::Linear => {
                    let i = x.floor() as usize;
                    idx.push(i.min(n_grid - 1));
                    idx.push((i + 1).min(n_grid - 1));
                }
            }
        }
    }
    idx.sort_unstable();
    idx.dedup();
    idx
}

/// Build an image from sparsely evaluated trace values.
///
/// `indices` must be the sorted output of [`required_indices`] for the same
/// geometry and `values[k]` the trace value at `indices[k]`; the result is
/// then bit-identical to slicing the fully evaluated trace.
pub fn slice_and_stack_sparse<S: Scalar>(
    cfg: &AcquisitionConfig<S>,
    indices: &[usize],
    values: &[S],
    tp_s: f64,
    width_s: f64,
    n_slices: usize,
    interp: Interp,
) -> Result<PeriodImage<S>> {
    debug_assert_eq!(indices.len(), values.len());
    let get = |i: usize| -> S {
        let k = indices.binary_search(&i).expect("index covered by required_indices");
        values[k]
    };
    build_image(cfg, &get, tp_s, width_s, n_slices, interp)
}

/// Row-major flattening, length H*W.
pub fn flatten_image<S: Scalar>(img: &PeriodImage<S>) -> Vec<S> {
    img.pixels.iter().copied().collect()
}

/// Inverse of [`flatten_image`] for the pixel array.
pub fn reshape_image<S: Scalar>(flat: &[S], h: usize, w: usize) -> Result<Array2<S>> {
    if flat.len() != h * w {
        return Err(CoreError::Config(format!(
            "cannot reshape {} values into {h}x{w}",
            flat.len()
        )));
    }
    Ok(Array2::from_shape_vec((h, w), flat.to_vec()).expect("shape checked"))
}
