//! Scoring a detection report against ground truth.
//!
//! Matching is greedy on contour distance: every (truth, reported) pair
//! closer than the gate is a candidate, closest pairs bind first, and each
//! side binds at most once. A bound pair counts as recovered only when both
//! hyperfine components land inside the stated tolerances.

use serde::{Deserialize, Serialize};

use crate::pipeline::report::ReportedSpin;
use crate::signal::SpinParams;
use crate::{Real, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchTolerance {
    /// |A_true - A_reported| bound for a recovered spin.
    pub a_hz: f64,
    /// |B_true - B_reported| bound for a recovered spin.
    pub b_hz: f64,
    /// Maximal contour distance |a_eq_true - a_eq_reported| to consider a
    /// pair at all.
    pub gate_a_eq_hz: f64,
}

impl Default for MatchTolerance {
    fn default() -> Self {
        MatchTolerance {
            a_hz: 500.0,
            b_hz: 3_000.0,
            gate_a_eq_hz: 2_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinMatch {
    pub truth: usize,
    pub reported: usize,
    pub da_hz: f64,
    pub db_hz: f64,
    pub recovered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub matches: Vec<SpinMatch>,
    /// Truth indices no reported spin came near.
    pub missed_truth: Vec<usize>,
    /// Reported indices that match no planted spin.
    pub false_positives: Vec<usize>,
}

impl MatchOutcome {
    pub fn recovered_of(&self, truth_index: usize) -> bool {
        self.matches
            .iter()
            .any(|m| m.truth == truth_index && m.recovered)
    }
}

/// Bind reported spins to ground truth. `truth` carries each planted spin
/// and its contour position (reference-B A-equivalent).
pub fn match_detections(
    truth: &[(SpinParams<Real>, f64)],
    reported: &[ReportedSpin],
    tol: &MatchTolerance,
) -> Result<MatchOutcome> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (t, (_, a_eq_t)) in truth.iter().enumerate() {
        for (r, rep) in reported.iter().enumerate() {
            let d = (a_eq_t - rep.a_eq_hz).abs();
            if d <= tol.gate_a_eq_hz {
                candidates.push((d, t, r));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut truth_used = vec![false; truth.len()];
    let mut reported_used = vec![false; reported.len()];
    let mut matches = Vec::new();
    for (_, t, r) in candidates {
        if truth_used[t] || reported_used[r] {
            continue;
        }
        truth_used[t] = true;
        reported_used[r] = true;
        let da = truth[t].0.a_hz - reported[r].a_hz;
        let db = truth[t].0.b_hz - reported[r].b_hz;
        matches.push(SpinMatch {
            truth: t,
            reported: r,
            da_hz: da,
            db_hz: db,
            recovered: da.abs() <= tol.a_hz && db.abs() <= tol.b_hz,
        });
    }
    Ok(MatchOutcome {
        matches,
        missed_truth: (0..truth.len()).filter(|&t| !truth_used[t]).collect(),
        false_positives: (0..reported.len()).filter(|&r| !reported_used[r]).collect(),
    })
}
