//! CPMG coherence evaluation.
//!
//! The coherence of the sensor after an N-pulse CPMG block at inter-pulse
//! spacing 2*tau is
//!
//! ```text
//! P_x(tau) = (1 + prod_k M_k(tau)) / 2
//! M_k = 1 - m_x^2 (1 - cos a)(1 - cos b) / (1 + cos phi) * sin^2(N phi / 2)
//! cos phi = cos a cos b - m_z sin a sin b
//! ```
//!
//! with `a = omega_tilde * tau`, `b = omega_L * tau`,
//! `m_z = (A + omega_L) / omega_tilde`, `m_x = B / omega_tilde`. The
//! denominator `1 + cos a cos b - m_z sin a sin b` is exactly `1 + cos phi`,
//! which this implementation exploits for both speed and stability: the
//! dip-strength ratio is clamped to its analytic range [0, 2] so `M_k` stays
//! in [-1, 1] and `P_x` in [0, 1] under any rounding.

use std::f64::consts::PI;

use crate::{Scalar, signal::{AcquisitionConfig, SpinParams, Trace, TraceKind}};

/// Per-spin factors that do not depend on tau.
#[derive(Debug, Clone, Copy)]
pub struct SpinFactors<S: Scalar> {
    /// Angular omega_tilde (rad/s).
    pub w_tilde: S,
    pub m_z: S,
    pub m_x2: S,
}

impl<S: Scalar> SpinFactors<S> {
    pub fn new(spin: &SpinParams<S>, larmor_hz: S) -> Self {
        let two_pi = S::of(2.0 * PI);
        let az = (spin.a_hz + larmor_hz) * two_pi;
        let bx = spin.b_hz * two_pi;
        let w_tilde = az.hypot(bx);
        if w_tilde == S::zero() {
            // Degenerate A = -omega_L, B = 0: the spin never couples.
            return SpinFactors {
                w_tilde,
                m_z: S::one(),
                m_x2: S::zero(),
            };
        }
        let m_x = bx / w_tilde;
        SpinFactors {
            w_tilde,
            m_z: az / w_tilde,
            m_x2: m_x * m_x,
        }
    }

    /// M_k at one tau given the shared Larmor factors sin/cos(omega_L tau).
    #[inline]
    pub fn coherence_at(&self, n_pulses: u32, tau_s: S, sin_b: S, cos_b: S) -> S {
        if self.m_x2 == S::zero() {
            return S::one();
        }
        let alpha = self.w_tilde * tau_s;
        let (sin_a, cos_a) = alpha.sin_cos_();
        let cos_phi = cos_a * cos_b - self.m_z * sin_a * sin_b;
        let one = S::one();
        let num = self.m_x2 * (one - cos_a) * (one - cos_b);
        let denom = one + cos_phi;
        // Analytic bound: num / denom in [0, 2]; enforce it against rounding
        // near the denominator zero at phi = pi.
        let ratio = if denom > S::zero() {
            (num / denom).min(S::of(2.0)).max(S::zero())
        } else {
            S::of(2.0)
        };
        let phi = cos_phi.min(one).max(-one).acos();
        let s = (S::of(n_pulses as f64) * phi * S::of(0.5)).sin();
        one - ratio * s * s
    }
}

/// Single-spin coherence factor M_k at one tau value.
pub fn single_spin_coherence<S: Scalar>(
    spin: &SpinParams<S>,
    cfg: &AcquisitionConfig<S>,
    tau_s: S,
) -> S {
    let f = SpinFactors::new(spin, cfg.larmor_hz);
    let beta = S::of(2.0 * PI) * cfg.larmor_hz * tau_s;
    let (sin_b, cos_b) = beta.sin_cos_();
    f.coherence_at(cfg.n_pulses, tau_s, sin_b, cos_b)
}

/// Full-grid coherence trace P_x for a set of spins (empty set gives the
/// constant trace 1).
pub fn cpmg_signal<S: Scalar>(spins: &[SpinParams<S>], cfg: &AcquisitionConfig<S>) -> Trace<S> {
    let n = cfg.grid_len();
    let factors: Vec<SpinFactors<S>> = spins
        .iter()
        .map(|s| SpinFactors::new(s, cfg.larmor_hz))
        .collect();
    let two_pi = S::of(2.0 * PI);
    let half = S::of(0.5);
    let one = S::one();
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let tau = cfg.tau_at(i);
        let beta = two_pi * cfg.larmor_hz * tau;
        let (sin_b, cos_b) = beta.sin_cos_();
        let mut prod = one;
        for f in &factors {
            prod = prod * f.coherence_at(cfg.n_pulses, tau, sin_b, cos_b);
        }
        values.push(((one + prod) * half).min(one).max(S::zero()));
    }
    Trace::new(cfg.clone(), values, TraceKind::Pure)
}

/// Coherence evaluated only at the given grid indices (same arithmetic per
/// point as [`cpmg_signal`], so shared indices agree bit-for-bit).
///
/// Indices must be in range; values are returned in input order.
pub fn cpmg_signal_at_indices<S: Scalar>(
    spins: &[SpinParams<S>],
    cfg: &AcquisitionConfig<S>,
    indices: &[usize],
) -> Vec<S> {
    let factors: Vec<SpinFactors<S>> = spins
        .iter()
        .map(|s| SpinFactors::new(s, cfg.larmor_hz))
        .collect();
    let two_pi = S::of(2.0 * PI);
    let half = S::of(0.5);
    let one = S::one();
    indices
        .iter()
        .map(|&i| {
            let tau = cfg.tau_at(i);
            let beta = two_pi * cfg.larmor_hz * tau;
            let (sin_b, cos_b) = beta.sin_cos_();
            let mut prod = one;
            for f in &factors {
                prod = prod * f.coherence_at(cfg.n_pulses, tau, sin_b, cos_b);
            }
            ((one + prod) * half).min(one).max(S::zero())
        })
        .collect()
}

/// Local dip period TP = 2*pi / (omega_tilde + omega_L), in seconds.
///
/// With both frequencies stored as Hz this is 1 / (omega_tilde_hz + larmor_hz).
/// Dips sit near odd multiples of TP/2; consecutive dips are TP apart.
pub fn target_period<S: Scalar>(spin: &SpinParams<S>, larmor_hz: S) -> S {
    (spin.omega_tilde_hz(larmor_hz) + larmor_hz).recip()
}

/// Invert the period formula for A given (TP, B): the A >= -omega_L branch of
/// sqrt((1/TP - omega_L)^2 - B^2) - omega_L.
///
/// Returns `None` when no real solution exists (B too large for the period).
pub fn solve_a_for_period<S: Scalar>(tp_s: S, b_hz: S, larmor_hz: S) -> Option<S> {
    let h = tp_s.recip() - larmor_hz;
    if h < b_hz.abs() {
        return None;
    }
    Some((h * h - b_hz * b_hz).sqrt() - larmor_hz)
}
