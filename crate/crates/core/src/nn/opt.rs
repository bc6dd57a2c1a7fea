//! Bounded adaptive-moment optimizer.
//!
//! Per-element steps follow the adaptive-moment rule with bias correction,
//! but the effective learning rate is clipped into a band that tightens
//! around the final step size as training progresses, so early steps behave
//! adaptively and late steps approach plain SGD. A plain unbounded variant
//! is available behind the `bounded` flag.

use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaBoundConfig {
    pub beta1: f64,
    pub beta2: f64,
    /// Final SGD-like step size the bounds converge to (at the initial lr).
    pub final_lr: f64,
    /// Bound convergence speed.
    pub gamma: f64,
    pub eps: f64,
    pub bounded: bool,
}

impl Default for AdaBoundConfig {
    fn default() -> Self {
        AdaBoundConfig {
            beta1: 0.9,
            beta2: 0.999,
            final_lr: 0.1,
            gamma: 1e-3,
            eps: 1e-8,
            bounded: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdaBound {
    pub cfg: AdaBoundConfig,
    pub lr_initial: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl AdaBound {
    pub fn new(lr_initial: f64, cfg: AdaBoundConfig) -> Self {
        AdaBound {
            cfg,
            lr_initial,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    /// One update over every (param, grad) pair with the scheduled rate
    /// `lr_t`. Moment state is lazily sized on first call; the pair list
    /// must keep its shape across calls.
    pub fn step<S: Scalar>(&mut self, params: &mut [(&mut [S], &mut [S])], lr_t: f64) {
        if self.m.is_empty() {
            self.m = params.iter().map(|(p, _)| vec![0.0; p.len()]).collect();
            self.v = params.iter().map(|(p, _)| vec![0.0; p.len()]).collect();
        }
        assert_eq!(self.m.len(), params.len(), "parameter list shape is stable");
        self.t += 1;
        let t = self.t as f64;
        let c = &self.cfg;
        let bc1 = 1.0 - c.beta1.powf(t);
        let bc2 = 1.0 - c.beta2.powf(t);
        let step_size = lr_t * bc2.sqrt() / bc1;
        // Bounds scale with the lr schedule, tightening toward final_lr.
        let final_lr = c.final_lr * lr_t / self.lr_initial;
        let lower = final_lr * (1.0 - 1.0 / (c.gamma * t + 1.0));
        let upper = final_lr * (1.0 + 1.0 / (c.gamma * t));
        for (pi, (p, g)) in params.iter_mut().enumerate() {
            assert_eq!(p.len(), self.m[pi].len(), "parameter size is stable");
            let m = &mut self.m[pi];
            let v = &mut self.v[pi];
            for (j, (pv, gv)) in p.iter_mut().zip(g.iter()).enumerate() {
                let grad = gv.f64();
                m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * grad;
                v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * grad * grad;
                let denom = v[j].sqrt() + c.eps;
                let eta = if c.bounded {
                    (step_size / denom).clamp(lower, upper)
                } else {
                    step_size / denom
                };
                *pv = *pv - S::of(eta * m[j]);
            }
        }
    }
}
