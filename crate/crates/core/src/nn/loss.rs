//! Loss functions: value plus gradient with respect to the prediction.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    BinaryCrossEntropy,
    MeanSquaredError,
}

/// Probability clamp guarding the BCE logarithms.
pub const BCE_EPS: f64 = 1e-6;

/// Mean loss over every element, and its gradient.
pub fn loss_value_grad<S: Scalar>(
    loss: Loss,
    pred: &Array2<S>,
    target: &Array2<S>,
) -> (f64, Array2<S>) {
    assert_eq!(pred.raw_dim(), target.raw_dim(), "pred/target shapes match");
    let count = S::of(pred.len() as f64);
    match loss {
        Loss::MeanSquaredError => {
            let mut grad = Array2::<S>::zeros(pred.raw_dim());
            let mut total = 0.0f64;
            let two = S::of(2.0);
            for ((g, &p), &y) in grad.iter_mut().zip(pred.iter()).zip(target.iter()) {
                let d = p - y;
                total += (d * d).f64();
                *g = two * d / count;
            }
            (total / pred.len() as f64, grad)
        }
        Loss::BinaryCrossEntropy => {
            let lo = S::of(BCE_EPS);
            let hi = S::of(1.0 - BCE_EPS);
            let one = S::one();
            let mut grad = Array2::<S>::zeros(pred.raw_dim());
            let mut total = 0.0f64;
            for ((g, &p), &y) in grad.iter_mut().zip(pred.iter()).zip(target.iter()) {
                let p = p.min(hi).max(lo);
                total -= (y * p.ln() + (one - y) * (one - p).ln()).f64();
                *g = (p - y) / (p * (one - p)) / count;
            }
            (total / pred.len() as f64, grad)
        }
    }
}
