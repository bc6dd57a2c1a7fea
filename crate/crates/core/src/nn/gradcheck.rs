//! Finite-difference gradient verification (float64 mode).

use ndarray::Array2;

use crate::nn::loss::{loss_value_grad, Loss};
use crate::nn::model::Model;
use crate::Result;

pub const GRADCHECK_STEP: f64 = 1e-5;
pub const GRADCHECK_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_rel: f64,
    /// (param tensor index, element index, analytic, numeric) per failure.
    pub failures: Vec<(usize, usize, f64, f64)>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn rel_err(a: f64, n: f64) -> f64 {
    let denom = a.abs().max(n.abs());
    if denom < 1e-6 {
        0.0
    } else {
        (a - n).abs() / denom
    }
}

/// Compare analytic gradients against central finite differences of the
/// whole-batch loss. Batch-norm running statistics do not enter the
/// training-mode loss, so repeated forwards on one clone are safe.
pub fn check_gradients(
    model: &Model<f64>,
    x: &Array2<f64>,
    y: &Array2<f64>,
    loss: Loss,
    step: f64,
    tol: f64,
) -> Result<GradCheckReport> {
    let mut analytic_model = model.clone();
    let pred = analytic_model.forward(x)?;
    let (_, grad) = loss_value_grad(loss, &pred, y);
    analytic_model.backward(&grad)?;
    let analytic: Vec<Vec<f64>> = analytic_model
        .params_mut()
        .into_iter()
        .map(|(_, g)| g.to_vec())
        .collect();

    let mut probe = model.clone();
    let eval = |m: &mut Model<f64>| -> Result<f64> {
        let p = m.forward(x)?;
        Ok(loss_value_grad(loss, &p, y).0)
    };
    let mut report = GradCheckReport {
        checked: 0,
        max_rel: 0.0,
        failures: Vec::new(),
    };
    let n_tensors = analytic.len();
    for pi in 0..n_tensors {
        for ei in 0..analytic[pi].len() {
            {
                let mut params = probe.params_mut();
                params[pi].0[ei] += step;
            }
            let up = eval(&mut probe)?;
            {
                let mut params = probe.params_mut();
                params[pi].0[ei] -= 2.0 * step;
            }
            let down = eval(&mut probe)?;
            {
                let mut params = probe.params_mut();
                params[pi].0[ei] += step;
            }
            let numeric = (up - down) / (2.0 * step);
            let a = analytic[pi][ei];
            let rel = rel_err(a, numeric);
            report.checked += 1;
            report.max_rel = report.max_rel.max(rel);
            if rel > tol {
                report.failures.push((pi, ei, a, numeric));
            }
        }
    }
    Ok(report)
}
