//! Cross-regime merging of detections and the final machine/human report.

use serde::{Deserialize, Serialize};

use crate::{data::HpcRegime, error::CoreError, pipeline::sweep::PeakDetection, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Ranking used when the same spin shows up in several sweeps: the N = 32
/// strong-coupling models are most reliable, then the N = 32 low-B models,
/// then N = 256.
fn precedence(regime: HpcRegime) -> usize {
    match regime {
        HpcRegime::N32HighB => 0,
        HpcRegime::N32LowB => 1,
        HpcRegime::N256 => 2,
    }
}

/// Detections produced by one regime's sweep.
#[derive(Debug, Clone)]
pub struct RegimeDetections {
    pub regime: HpcRegime,
    pub peaks: Vec<PeakDetection>,
}

/// Confidence contribution from one regime to a merged detection.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RegimeScore {
    pub regime: HpcRegime,
    pub score: f64,
}

/// One detection after cross-regime merging.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergedSpin {
    /// Dictionary cell of the kept (highest-precedence) detection.
    pub cell: usize,
    pub source: HpcRegime,
    pub score: f64,
    pub class_id: usize,
    /// Best score seen within the merge radius, per contributing regime.
    pub confidence: Vec<RegimeScore>,
}

/// Merge per-regime peak detections into one spin list.
///
/// Candidates are visited in precedence order (then score, then cell); each
/// kept detection absorbs every remaining one within `radius_cells` cells,
/// recording the absorbed regimes' best scores as extra confidence. Any two
/// survivors end up more than `radius_cells` apart, so merging a merged list
/// again changes nothing.
pub fn merge_detections(sets: &[RegimeDetections], radius_cells: usize) -> Vec<MergedSpin> {
    #[derive(Clone, Copy)]
    struct Cand {
        regime: HpcRegime,
        cell: usize,
        score: f64,
        class_id: usize,
    }
    let mut cands: Vec<Cand> = sets
        .iter()
        .flat_map(|set| {
            set.peaks.iter().map(move |p| Cand {
                regime: set.regime,
                cell: p.cell,
                score: p.score,
                class_id: p.class_id,
            })
        })
        .collect();
    cands.sort_by(|a, b| {
        precedence(a.regime)
            .cmp(&precedence(b.regime))
            .then(b.score.partial_cmp(&a.score).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.cell.cmp(&b.cell))
    });
    let mut taken = vec![false; cands.len()];
    let mut merged = Vec::new();
    for i in 0..cands.len() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let keep = cands[i];
        let mut confidence: Vec<RegimeScore> = vec![RegimeScore {
            regime: keep.regime,
            score: keep.score,
        }];
        for j in (i + 1)..cands.len() {
            if taken[j] {
                continue;
            }
            let d = cands[j].cell.abs_diff(keep.cell);
            if d <= radius_cells {
                taken[j] = true;
                match confidence.iter_mut().find(|c| c.regime == cands[j].regime) {
                    Some(c) => c.score = c.score.max(cands[j].score),
                    None => confidence.push(RegimeScore {
                        regime: cands[j].regime,
                        score: cands[j].score,
                    }),
                }
            }
        }
        confidence.sort_by_key(|c| precedence(c.regime));
        merged.push(MergedSpin {
            cell: keep.cell,
            source: keep.regime,
            score: keep.score,
            class_id: keep.class_id,
            confidence,
        });
    }
    merged.sort_by_key(|m| m.cell);
    merged
}

/// Whether a detection came through as an isolated peak or as part of a
/// broad, unresolvable dip cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionGroup {
    Isolated,
    BroadDip,
}

/// Fully characterised spin in the final report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportedSpin {
    pub a_hz: f64,
    pub b_hz: f64,
    pub sigma_a_hz: f64,
    pub sigma_b_hz: f64,
    /// Equivalent parallel coupling on the reference contour (Hz).
    pub a_eq_hz: f64,
    pub cell: usize,
    pub score: f64,
    pub class_id: usize,
    pub source: HpcRegime,
    pub confidence: Vec<RegimeScore>,
    pub group: DetectionGroup,
    /// Set when fine tuning could not improve on the sweep estimate.
    pub low_confidence: bool,
}

/// A broad dip region whose spins could not be resolved individually; only
/// a count range (and a best single count) is reported.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BroadDipSummary {
    pub regime: HpcRegime,
    /// Inclusive dictionary-cell span of the run.
    pub cells: (usize, usize),
    /// Equivalent-A span of the run (Hz).
    pub a_eq_range_hz: (f64, f64),
    pub min_count: usize,
    pub max_count: usize,
    pub estimated_count: usize,
    pub score_max: f64,
}

/// Machine-readable output of the full detection pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub schema_version: u32,
    pub field_gauss: f64,
    pub spins: Vec<ReportedSpin>,
    pub broad_dips: Vec<BroadDipSummary>,
    /// Individually resolved spins plus the best-count estimate of every
    /// broad dip region.
    pub counted_total: usize,
    pub fit_loss_final: f64,
    pub fine_tune_passes: usize,
    /// Set when decoherence recovery ran outside its reliable range.
    pub low_confidence_recovery: bool,
}

impl DetectionReport {
    pub fn counted_total_of(spins: &[ReportedSpin], broad: &[BroadDipSummary]) -> usize {
        spins.len() + broad.iter().map(|b| b.estimated_count).sum::<usize>()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| CoreError::Config(format!("report serialisation: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: DetectionReport = serde_json::from_str(text).map_err(|e| CoreError::Parse {
            path: "detection report".into(),
            line: 0,
            msg: e.to_string(),
        })?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(CoreError::Parse {
                path: "detection report".into(),
                line: 0,
                msg: format!(
                    "unsupported schema version {} (expected {})",
                    report.schema_version, REPORT_SCHEMA_VERSION
                ),
            });
        }
        Ok(report)
    }

    /// Plain-text table for terminals and logs.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "detected spins: {} resolved, {} broad region(s), {} total (counting broad estimates)\n",
            self.spins.len(),
            self.broad_dips.len(),
            self.counted_total
        ));
        out.push_str(
            "  #   A (kHz)      B (kHz)      sigmaA  sigmaB  cell   score  src       flags\n",
        );
        for (i, s) in self.spins.iter().enumerate() {
            let mut flags = String::new();
            if s.low_confidence {
                flags.push_str("low-conf ");
            }
            if s.group == DetectionGroup::BroadDip {
                flags.push_str("broad");
            }
            out.push_str(&format!(
                "{:>3}   {:>9.3}   {:>9.3}   {:>6.3}  {:>6.3}  {:>5}  {:>5.3}  {:<8}  {}\n",
                i + 1,
                s.a_hz / 1e3,
                s.b_hz / 1e3,
                s.sigma_a_hz / 1e3,
                s.sigma_b_hz / 1e3,
                s.cell,
                s.score,
                format!("{:?}", s.source),
                flags.trim_end()
            ));
        }
        for b in &self.broad_dips {
            out.push_str(&format!(
                "broad dip {:?} cells {}..{}: {}..{} spins (best {}), a_eq {:.1}..{:.1} kHz\n",
                b.regime,
                b.cells.0,
                b.cells.1,
                b.min_count,
                b.max_count,
                b.estimated_count,
                b.a_eq_range_hz.0 / 1e3,
                b.a_eq_range_hz.1 / 1e3
            ));
        }
        out.push_str(&format!(
            "fit loss {:.6e} after {} pass(es){}\n",
            self.fit_loss_final,
            self.fine_tune_passes,
            if self.low_confidence_recovery {
                "  [decoherence recovery low confidence]"
            } else {
                ""
            }
        ));
        out
    }
}
