//! Truncated-Gaussian measurement noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::{Scalar, signal::{Trace, TraceKind}};

/// Noise amplitude of the reference experiment.
pub const DEFAULT_NOISE_SIGMA: f64 = 0.05;
/// Hard cut-off of the noise distribution.
pub const DEFAULT_NOISE_CLIP: f64 = 0.05;

/// Standard deviation of a zero-mean Gaussian with std `sigma` truncated to
/// `[-clip, clip]`: sigma * sqrt(1 - 2 a phi(a) / (2 Phi(a) - 1)) with
/// a = clip / sigma.
pub fn truncated_normal_std(sigma: f64, clip: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    let a = clip / sigma;
    let phi = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
    // Phi(a) - Phi(-a) = erf(a / sqrt(2)); series-free via the normal CDF
    // identity using the complementary error function is overkill here; use
    // the statrs-free rational approximation of erf.
    let erf = erf(a / std::f64::consts::SQRT_2);
    sigma * (1.0 - 2.0 * a * phi / erf).sqrt()
}

/// Abramowitz-Stegun 7.1.26 rational approximation, |error| < 1.5e-7.
fn erf(x: f64) -> f64 {
    let s = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let y = 1.0
        - (((((1.061405429 * t - 1.453152027) * t) + 1.421413741) * t - 0.284496736) * t
            + 0.254829592)
            * t
            * (-x * x).exp();
    s * y
}

/// Draw one sample of N(0, sigma^2) truncated to [-clip, clip] by rejection.
pub fn noise_draw<S: Scalar, R: Rng>(rng: &mut R, sigma: f64, clip: f64) -> S {
    if sigma == 0.0 {
        return S::zero();
    }
    let normal = Normal::new(0.0, sigma).expect("sigma >= 0");
    loop {
        let v: f64 = normal.sample(rng);
        if v.abs() <= clip {
            return S::of(v);
        }
    }
}

/// Add i.i.d. truncated-Gaussian noise and clamp the result to [0, 1].
///
/// `sigma = 0` leaves the values bit-identical; the result kind is `Noisy`
/// either way. Deterministic per seed.
pub fn add_gaussian_noise<S: Scalar>(
    trace: &Trace<S>,
    sigma: f64,
    clip: f64,
    seed: u64,
) -> Trace<S> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let one = S::one();
    let values = trace
        .values
        .iter()
        .map(|&p| {
            if sigma == 0.0 {
                p
            } else {
                (p + noise_draw::<S, _>(&mut rng, sigma, clip))
                    .min(one)
                    .max(S::zero())
            }
        })
        .collect();
    Trace::new(trace.config.clone(), values, TraceKind::Noisy)
}
