//! Sequential per-spin refinement of hyperfine estimates against a measured
//! trace.
//!
//! Candidates from the regression stage are polished one spin at a time while
//! the others stay frozen. Each pass rebuilds the fit windows (samples around
//! the dips the current estimates predict, minus regions the spin bath
//! dominates), then for every spin launches a small particle swarm over B and
//! runs a bounded local minimiser from each particle. N = 32 traces, whose
//! loss surface is smooth and wide, use conjugate gradient; higher pulse
//! numbers produce narrow dips and get the more conservative L-BFGS. The
//! windowed least-squares objective itself is exposed as [`fit_loss`] so the
//! same number can be reported and tested directly.
//!
//! Because every particle starts a descent that only ever accepts
//! improvements, and one particle sits exactly on the current estimate, a
//! pass can never increase the loss under fixed windows.

use serde::{Deserialize, Serialize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::{
    error::CoreError,
    signal::{cpmg_signal, SpinFactors, SpinParams, Trace},
    Real, Result,
};

/// Tuning knobs for the per-spin refinement stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FineTuneConfig {
    /// Particles per spin; B starts are spread over `b0 +- db_hz`.
    pub n_particles: usize,
    /// Half-width of the particle spread in B (Hz).
    pub db_hz: f64,
    /// Box half-width for A around each starting estimate (Hz).
    pub a_box_hz: f64,
    /// Global bounds on B during optimisation (Hz).
    pub b_bounds_hz: (f64, f64),
    /// Maximum number of full passes over the spin list.
    pub max_passes: usize,
    /// Relative loss-improvement threshold that ends the pass loop.
    pub tol_rel: f64,
    /// Samples kept on each side of a predicted dip minimum.
    pub window_half: usize,
    /// Minimum single-spin dip depth (in M) for a period to contribute a
    /// window.
    pub dip_depth_min: f64,
    /// Grid points where the bath-only reference signal drops below this are
    /// excluded from every window.
    pub bath_threshold: f64,
    /// Extra tau ranges (seconds, inclusive) to exclude from the fit.
    pub mask_tau_s: Vec<(f64, f64)>,
    /// Iteration cap for each local descent.
    pub local_max_iter: usize,
    /// Central-difference step for numerical gradients, in kHz.
    pub grad_step_khz: f64,
    /// Number of jittered restarts used to estimate parameter spread;
    /// below 2 the spread comes back as zero.
    pub uncertainty_repeats: usize,
    /// Uniform jitter applied to A for uncertainty restarts (Hz).
    pub jitter_a_hz: f64,
    /// Uniform jitter applied to B for uncertainty restarts (Hz).
    pub jitter_b_hz: f64,
    pub seed: u64,
}

impl Default for FineTuneConfig {
    fn default() -> Self {
        FineTuneConfig {
            n_particles: 9,
            db_hz: 5_000.0,
            a_box_hz: 5_000.0,
            b_bounds_hz: (500.0, 100_000.0),
            max_passes: 12,
            tol_rel: 1e-6,
            window_half: 25,
            dip_depth_min: 1e-3,
            bath_threshold: 0.9,
            mask_tau_s: Vec::new(),
            local_max_iter: 60,
            grad_step_khz: 2e-3,
            uncertainty_repeats: 8,
            jitter_a_hz: 200.0,
            jitter_b_hz: 500.0,
            seed: 0,
        }
    }
}

impl FineTuneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(CoreError::Config("n_particles must be at least 1".into()));
        }
        if !(self.db_hz >= 0.0 && self.a_box_hz > 0.0) {
            return Err(CoreError::Config("db_hz must be >= 0 and a_box_hz > 0".into()));
        }
        let (blo, bhi) = self.b_bounds_hz;
        if !(blo > 0.0 && bhi > blo) {
            return Err(CoreError::Config(format!(
                "b bounds ({blo}, {bhi}) must satisfy 0 < lo < hi"
            )));
        }
        if self.max_passes == 0 || self.local_max_iter == 0 {
            return Err(CoreError::Config("pass and iteration caps must be nonzero".into()));
        }
        if !(self.tol_rel > 0.0) || !(self.grad_step_khz > 0.0) {
            return Err(CoreError::Config("tol_rel and grad_step_khz must be positive".into()));
        }
        if self.window_half == 0 {
            return Err(CoreError::Config("window_half must be at least 1".into()));
        }
        if !(self.bath_threshold > 0.0 && self.bath_threshold <= 1.0) {
            return Err(CoreError::Config("bath_threshold must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Grid indices that enter the fit objective.
#[derive(Debug, Clone)]
pub struct FitWindows {
    /// Sorted, deduplicated trace indices.
    pub indices: Vec<usize>,
}

impl FitWindows {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Result of one refinement run.
#[derive(Debug, Clone)]
pub struct FineTuneOutcome {
    pub refined: Vec<SpinParams<Real>>,
    /// Spread of A over the jittered restarts, per spin (Hz).
    pub sigma_a_hz: Vec<f64>,
    /// Spread of B over the jittered restarts, per spin (Hz).
    pub sigma_b_hz: Vec<f64>,
    /// True where every particle diverged and the input estimate was kept.
    pub flagged: Vec<bool>,
    /// Passes actually executed.
    pub passes: usize,
    /// Total loss after each pass, on that pass's windows.
    pub pass_losses: Vec<f64>,
    pub final_loss: f64,
    /// Number of grid points in the final fit windows.
    pub window_count: usize,
}

/// Build the fit windows for the given candidate set.
///
/// Every candidate pins a window of `window_half` samples either side of its
/// predicted dip minimum in each local period whose dip is deeper than
/// `dip_depth_min`. Points where the bath reference signal falls below
/// `bath_threshold`, and points inside any explicit tau mask, are removed.
pub fn build_fit_windows(
    candidates: &[SpinParams<Real>],
    trace: &Trace<Real>,
    bath: &[SpinParams<Real>],
    cfg: &FineTuneConfig,
) -> Result<FitWindows> {
    let acq = &trace.config;
    let n = trace.len();
    if n == 0 {
        return Err(CoreError::Config("cannot fit against an empty trace".into()));
    }
    let mut include = vec![false; n];
    let larmor = acq.larmor_hz;
    for spin in candidates {
        let f = SpinFactors::new(spin, larmor);
        let w_hz = f.w_tilde / (2.0 * std::f64::consts::PI);
        let tp = 1.0 / (w_hz + larmor);
        // Per-period argmin of the single-spin factor M.
        let mut best: Option<(usize, f64)> = None;
        let mut period = 0usize;
        let mark = |best: &mut Option<(usize, f64)>, include: &mut Vec<bool>| {
            if let Some((idx, m)) = best.take() {
                if m < 1.0 - cfg.dip_depth_min {
                    let lo = idx.saturating_sub(cfg.window_half);
                    let hi = (idx + cfg.window_half).min(n - 1);
                    for cell in include[lo..=hi].iter_mut() {
                        *cell = true;
                    }
                }
            }
        };
        for i in 0..n {
            let tau = acq.tau_at(i);
            let p = ((tau - acq.tau_start_s) / tp).floor() as usize;
            if p != period {
                mark(&mut best, &mut include);
                period = p;
            }
            let beta = 2.0 * std::f64::consts::PI * larmor * tau;
            let m = f.coherence_at(acq.n_pulses, tau, beta.sin(), beta.cos());
            if best.map_or(true, |(_, bm)| m < bm) {
                best = Some((i, m));
            }
        }
        mark(&mut best, &mut include);
    }
    if !bath.is_empty() {
        let reference = cpmg_signal(bath, acq);
        for (cell, &p) in include.iter_mut().zip(&reference.values) {
            if p < cfg.bath_threshold {
                *cell = false;
            }
        }
    }
    for &(lo, hi) in &cfg.mask_tau_s {
        for (i, cell) in include.iter_mut().enumerate() {
            let tau = acq.tau_at(i);
            if tau >= lo && tau <= hi {
                *cell = false;
            }
        }
    }
    let indices: Vec<usize> = include
        .iter()
        .enumerate()
        .filter_map(|(i, &keep)| keep.then_some(i))
        .collect();
    Ok(FitWindows { indices })
}

/// Windowed least-squares distance between the model for `candidates` and
/// the trace: `sum_i ((1 + prod_k M_k(t_i)) / 2 - y_i)^2` over the window
/// indices.
pub fn fit_loss(candidates: &[SpinParams<Real>], trace: &Trace<Real>, windows: &FitWindows) -> f64 {
    let acq = &trace.config;
    let factors: Vec<SpinFactors<Real>> = candidates
        .iter()
        .map(|s| SpinFactors::new(s, acq.larmor_hz))
        .collect();
    let mut total = 0.0;
    for &i in &windows.indices {
        let tau = acq.tau_at(i);
        let beta = 2.0 * std::f64::consts::PI * acq.larmor_hz * tau;
        let (sb, cb) = beta.sin_cos();
        let mut prod = 1.0;
        for f in &factors {
            prod *= f.coherence_at(acq.n_pulses, tau, sb, cb);
        }
        let p = ((1.0 + prod) * 0.5).clamp(0.0, 1.0);
        let r = p - trace.values[i];
        total += r * r;
    }
    total
}

/// Precomputed per-window quantities for optimising a single spin while the
/// rest of the candidate set stays frozen.
struct WindowEval {
    n_pulses: u32,
    larmor_hz: f64,
    taus: Vec<f64>,
    sin_b: Vec<f64>,
    cos_b: Vec<f64>,
    target: Vec<f64>,
    /// Product of the frozen spins' M factors at each window point.
    partial: Vec<f64>,
}

impl WindowEval {
    fn new(trace: &Trace<Real>, windows: &FitWindows, others: &[SpinParams<Real>]) -> Self {
        let acq = &trace.config;
        let factors: Vec<SpinFactors<Real>> = others
            .iter()
            .map(|s| SpinFactors::new(s, acq.larmor_hz))
            .collect();
        let m = windows.indices.len();
        let mut taus = Vec::with_capacity(m);
        let mut sin_b = Vec::with_capacity(m);
        let mut cos_b = Vec::with_capacity(m);
        let mut target = Vec::with_capacity(m);
        let mut partial = Vec::with_capacity(m);
        for &i in &windows.indices {
            let tau = acq.tau_at(i);
            let beta = 2.0 * std::f64::consts::PI * acq.larmor_hz * tau;
            let (sb, cb) = beta.sin_cos();
            let mut prod = 1.0;
            for f in &factors {
                prod *= f.coherence_at(acq.n_pulses, tau, sb, cb);
            }
            taus.push(tau);
            sin_b.push(sb);
            cos_b.push(cb);
            target.push(trace.values[i]);
            partial.push(prod);
        }
        WindowEval {
            n_pulses: acq.n_pulses,
            larmor_hz: acq.larmor_hz,
            taus,
            sin_b,
            cos_b,
            target,
            partial,
        }
    }

    /// Loss as a function of the varying spin, in kHz coordinates.
    fn loss_khz(&self, x: [f64; 2]) -> f64 {
        let spin = SpinParams::new(x[0] * 1e3, x[1] * 1e3);
        let f = SpinFactors::new(&spin, self.larmor_hz);
        let mut total = 0.0;
        for i in 0..self.taus.len() {
            let m = f.coherence_at(self.n_pulses, self.taus[i], self.sin_b[i], self.cos_b[i]);
            let p = ((1.0 + self.partial[i] * m) * 0.5).clamp(0.0, 1.0);
            let r = p - self.target[i];
            total += r * r;
        }
        total
    }

    fn grad_khz(&self, x: [f64; 2], h: f64) -> [f64; 2] {
        let mut g = [0.0; 2];
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            g[d] = (self.loss_khz(xp) - self.loss_khz(xm)) / (2.0 * h);
        }
        g
    }
}

fn clamp_box(x: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> [f64; 2] {
    [x[0].clamp(lo[0], hi[0]), x[1].clamp(lo[1], hi[1])]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

const ARMIJO_C1: f64 = 1e-4;
const LINE_SEARCH_SHRINK: f64 = 0.5;
const LINE_SEARCH_MAX: usize = 40;
const GRAD_TOL: f64 = 1e-10;

/// Backtracking line search with projection onto the box. Returns the
/// accepted point, its loss, and the step that produced it, or None if no
/// improving step exists along `d`.
fn project_search(
    eval: &WindowEval,
    x: [f64; 2],
    fx: f64,
    g: [f64; 2],
    d: [f64; 2],
    t0: f64,
    lo: [f64; 2],
    hi: [f64; 2],
) -> Option<([f64; 2], f64, f64)> {
    let mut t = t0;
    for _ in 0..LINE_SEARCH_MAX {
        let xn = clamp_box([x[0] + t * d[0], x[1] + t * d[1]], lo, hi);
        let step = [xn[0] - x[0], xn[1] - x[1]];
        if step[0] == 0.0 && step[1] == 0.0 {
            t *= LINE_SEARCH_SHRINK;
            continue;
        }
        let fn_ = eval.loss_khz(xn);
        if fn_.is_finite() && fn_ <= fx + ARMIJO_C1 * dot(g, step) {
            return Some((xn, fn_, t));
        }
        t *= LINE_SEARCH_SHRINK;
    }
    None
}

/// Polak-Ribiere conjugate gradient with restarts, projected onto the box.
fn minimize_cg(
    eval: &WindowEval,
    x0: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    cfg: &FineTuneConfig,
) -> ([f64; 2], f64) {
    let h = cfg.grad_step_khz;
    let mut x = clamp_box(x0, lo, hi);
    let mut fx = eval.loss_khz(x);
    if !fx.is_finite() {
        return (x, fx);
    }
    let mut g = eval.grad_khz(x, h);
    let mut d = [-g[0], -g[1]];
    let mut t_prev: f64 = 1.0;
    for _ in 0..cfg.local_max_iter {
        if g[0].abs().max(g[1].abs()) < GRAD_TOL {
            break;
        }
        if dot(g, d) >= 0.0 {
            d = [-g[0], -g[1]];
        }
        let dn = dot(d, d).sqrt();
        if dn == 0.0 {
            break;
        }
        let t0 = (t_prev * 2.0).min(1.0 / dn.max(1.0));
        let Some((xn, fxn, t)) = project_search(eval, x, fx, g, d, t0, lo, hi) else {
            break;
        };
        let gn = eval.grad_khz(xn, h);
        let gg = dot(g, g);
        let beta = if gg > 0.0 {
            (dot(gn, [gn[0] - g[0], gn[1] - g[1]]) / gg).max(0.0)
        } else {
            0.0
        };
        d = [-gn[0] + beta * d[0], -gn[1] + beta * d[1]];
        let rel = (fx - fxn) / fx.abs().max(1e-12);
        x = xn;
        fx = fxn;
        g = gn;
        t_prev = t;
        if rel < 1e-6 {
            break;
        }
    }
    (x, fx)
}

/// Bounded limited-memory BFGS (two-loop recursion, memory 5) with the same
/// projected backtracking search.
fn minimize_lbfgs(
    eval: &WindowEval,
    x0: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    cfg: &FineTuneConfig,
) -> ([f64; 2], f64) {
    const MEMORY: usize = 5;
    let h = cfg.grad_step_khz;
    let mut x = clamp_box(x0, lo, hi);
    let mut fx = eval.loss_khz(x);
    if !fx.is_finite() {
        return (x, fx);
    }
    let mut g = eval.grad_khz(x, h);
    let mut hist: Vec<([f64; 2], [f64; 2], f64)> = Vec::new(); // (s, y, 1/s.y)
    for _ in 0..cfg.local_max_iter {
        if g[0].abs().max(g[1].abs()) < GRAD_TOL {
            break;
        }
        // Two-loop recursion.
        let mut q = g;
        let mut alphas = Vec::with_capacity(hist.len());
        for &(s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, q);
            q = [q[0] - a * y[0], q[1] - a * y[1]];
            alphas.push(a);
        }
        let gamma = hist
            .last()
            .map(|&(s, y, _)| dot(s, y) / dot(y, y).max(1e-300))
            .unwrap_or(1.0);
        q = [gamma * q[0], gamma * q[1]];
        for (&(s, y, rho), &a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, q);
            q = [q[0] + (a - b) * s[0], q[1] + (a - b) * s[1]];
        }
        let mut d = [-q[0], -q[1]];
        if dot(g, d) >= 0.0 {
            d = [-g[0], -g[1]];
        }
        let Some((xn, fxn, _)) = project_search(eval, x, fx, g, d, 1.0, lo, hi) else {
            break;
        };
        let gn = eval.grad_khz(xn, h);
        let s = [xn[0] - x[0], xn[1] - x[1]];
        let y = [gn[0] - g[0], gn[1] - g[1]];
        let sy = dot(s, y);
        if sy > 1e-12 {
            if hist.len() == MEMORY {
                hist.remove(0);
            }
            hist.push((s, y, 1.0 / sy));
        }
        let rel = (fx - fxn) / fx.abs().max(1e-12);
        x = xn;
        fx = fxn;
        g = gn;
        if rel < 1e-6 {
            break;
        }
    }
    (x, fx)
}

/// Evenly spaced particle starts in B about `b0`, clamped to the bounds,
/// with the centre particle pinned exactly at `b0`.
fn particle_starts(b0: f64, cfg: &FineTuneConfig) -> Vec<f64> {
    let n = cfg.n_particles;
    let (blo, bhi) = cfg.b_bounds_hz;
    let lo = (b0 - cfg.db_hz).max(blo);
    let hi = (b0 + cfg.db_hz).min(bhi);
    let mut out = Vec::with_capacity(n);
    if n == 1 {
        out.push(b0.clamp(blo, bhi));
        return out;
    }
    for i in 0..n {
        out.push(lo + (hi - lo) * i as f64 / (n - 1) as f64);
    }
    out[n / 2] = b0.clamp(blo, bhi);
    out
}

struct PassResult {
    params: Vec<SpinParams<Real>>,
    flagged: Vec<bool>,
    pass_losses: Vec<f64>,
    passes: usize,
    final_loss: f64,
    window_count: usize,
}

fn run_passes(
    start: &[SpinParams<Real>],
    trace: &Trace<Real>,
    bath: &[SpinParams<Real>],
    cfg: &FineTuneConfig,
) -> Result<PassResult> {
    let n_spins = start.len();
    let mut params = start.to_vec();
    let mut flagged = vec![false; n_spins];
    let mut pass_losses = Vec::new();
    let mut passes = 0usize;
    let mut final_loss = 0.0;
    let mut window_count = 0usize;
    // A boxes are anchored at the incoming estimates, not re-centred each
    // pass, so a bad early step cannot walk a spin arbitrarily far.
    let a_bounds: Vec<(f64, f64)> = start
        .iter()
        .map(|s| (s.a_hz - cfg.a_box_hz, s.a_hz + cfg.a_box_hz))
        .collect();
    let use_cg = trace.config.n_pulses == 32;
    for _ in 0..cfg.max_passes {
        let windows = build_fit_windows(&params, trace, bath, cfg)?;
        window_count = windows.len();
        if windows.is_empty() {
            // Nothing left to fit against: keep the inputs and flag them.
            flagged.iter_mut().for_each(|f| *f = true);
            break;
        }
        passes += 1;
        let total_before = fit_loss(&params, trace, &windows);
        for j in 0..n_spins {
            let others: Vec<SpinParams<Real>> = params
                .iter()
                .enumerate()
                .filter_map(|(k, s)| (k != j).then_some(*s))
                .collect();
            let eval = WindowEval::new(trace, &windows, &others);
            let a0_khz = params[j].a_hz / 1e3;
            let lo = [a_bounds[j].0 / 1e3, cfg.b_bounds_hz.0 / 1e3];
            let hi = [a_bounds[j].1 / 1e3, cfg.b_bounds_hz.1 / 1e3];
            let starts = particle_starts(params[j].b_hz, cfg);
            let results: Vec<([f64; 2], f64)> = starts
                .par_iter()
                .map(|&b_hz| {
                    let x0 = [a0_khz, b_hz / 1e3];
                    if use_cg {
                        minimize_cg(&eval, x0, lo, hi, cfg)
                    } else {
                        minimize_lbfgs(&eval, x0, lo, hi, cfg)
                    }
                })
                .collect();
            let best = results
                .iter()
                .enumerate()
                .filter(|(_, (_, f))| f.is_finite())
                .min_by(|(i, (_, fa)), (k, (_, fb))| {
                    fa.partial_cmp(fb).unwrap().then(i.cmp(k))
                });
            match best {
                Some((_, (x, _))) => {
                    params[j] = SpinParams::new(x[0] * 1e3, x[1] * 1e3);
                }
                None => flagged[j] = true,
            }
        }
        let total_after = fit_loss(&params, trace, &windows);
        pass_losses.push(total_after);
        final_loss = total_after;
        if total_before - total_after <= cfg.tol_rel * total_before.abs().max(1e-12) {
            break;
        }
    }
    Ok(PassResult {
        params,
        flagged,
        pass_losses,
        passes,
        final_loss,
        window_count,
    })
}

fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    var.sqrt()
}

/// Refine every candidate against the trace and estimate parameter spreads.
///
/// The trace should already have its decoherence envelope divided out.
/// `bath` is the reference set used to mask regions the unresolved bath
/// dominates; pass an empty slice to skip the mask.
pub fn fine_tune(
    candidates: &[SpinParams<Real>],
    trace: &Trace<Real>,
    bath: &[SpinParams<Real>],
    cfg: &FineTuneConfig,
) -> Result<FineTuneOutcome> {
    cfg.validate()?;
    if candidates.is_empty() {
        return Ok(FineTuneOutcome {
            refined: Vec::new(),
            sigma_a_hz: Vec::new(),
            sigma_b_hz: Vec::new(),
            flagged: Vec::new(),
            passes: 0,
            pass_losses: Vec::new(),
            final_loss: 0.0,
            window_count: 0,
        });
    }
    let base = run_passes(candidates, trace, bath, cfg)?;
    let n_spins = candidates.len();
    let (sigma_a_hz, sigma_b_hz) = if cfg.uncertainty_repeats >= 2 {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        let jitters: Vec<Vec<SpinParams<Real>>> = (0..cfg.uncertainty_repeats)
            .map(|_| {
                candidates
                    .iter()
                    .map(|s| {
                        let a = s.a_hz + rng.gen_range(-cfg.jitter_a_hz..=cfg.jitter_a_hz);
                        let b = (s.b_hz + rng.gen_range(-cfg.jitter_b_hz..=cfg.jitter_b_hz))
                            .clamp(cfg.b_bounds_hz.0, cfg.b_bounds_hz.1);
                        SpinParams::new(a, b)
                    })
                    .collect()
            })
            .collect();
        let repeats: Result<Vec<PassResult>> = jitters
            .par_iter()
            .map(|start| run_passes(start, trace, bath, cfg))
            .collect();
        let repeats = repeats?;
        let mut sa = Vec::with_capacity(n_spins);
        let mut sb = Vec::with_capacity(n_spins);
        for j in 0..n_spins {
            let avals: Vec<f64> = repeats.iter().map(|r| r.params[j].a_hz).collect();
            let bvals: Vec<f64> = repeats.iter().map(|r| r.params[j].b_hz).collect();
            sa.push(sample_std(&avals));
            sb.push(sample_std(&bvals));
        }
        (sa, sb)
    } else {
        (vec![0.0; n_spins], vec![0.0; n_spins])
    };
    Ok(FineTuneOutcome {
        refined: base.params,
        sigma_a_hz,
        sigma_b_hz,
        flagged: base.flagged,
        passes: base.passes,
        pass_losses: base.pass_losses,
        final_loss: base.final_loss,
        window_count: base.window_count,
    })
}
