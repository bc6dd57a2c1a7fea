//! Target-period dictionary: a uniform grid of A values (fixed reference B)
//! mapped to their local periods.

use std::fs;
use std::path::Path;

use crate::{
    CoreError, Result,
    signal::{solve_a_for_period, target_period, SpinParams},
};

/// Default A grid step, Hz.
pub const DEFAULT_A_STEP_HZ: f64 = 50.0;
/// Default fixed B used to generate the grid, Hz.
pub const DEFAULT_B_REF_HZ: f64 = 10_000.0;

/// Ordered map from grid index to (A, TP). A increases with index, TP
/// decreases (strictly, for A > -omega_L which always holds on practical
/// grids).
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodDictionary {
    a_hz: Vec<f64>,
    tp_s: Vec<f64>,
    pub a_step_hz: f64,
    pub b_ref_hz: f64,
    pub larmor_hz: f64,
}

/// Build the dictionary over `[a_min_hz, a_max_hz]` with the given step and
/// reference B.
pub fn build_period_dictionary(
    larmor_hz: f64,
    a_min_hz: f64,
    a_max_hz: f64,
    a_step_hz: f64,
    b_ref_hz: f64,
) -> Result<PeriodDictionary> {
    if !(a_min_hz <= a_max_hz) {
        return Err(CoreError::Config("a_min_hz must not exceed a_max_hz".into()));
    }
    if !(a_step_hz > 0.0) {
        return Err(CoreError::Config("a_step_hz must be positive".into()));
    }
    let count = ((a_max_hz - a_min_hz) / a_step_hz).round() as usize + 1;
    let mut a_hz = Vec::with_capacity(count);
    let mut tp_s = Vec::with_capacity(count);
    for k in 0..count {
        let a = a_min_hz + k as f64 * a_step_hz;
        a_hz.push(a);
        tp_s.push(target_period(&SpinParams::new(a, b_ref_hz), larmor_hz));
    }
    Ok(PeriodDictionary {
        a_hz,
        tp_s,
        a_step_hz,
        b_ref_hz,
        larmor_hz,
    })
}

impl PeriodDictionary {
    /// Reference-experiment dictionary: A in [-50, +50] kHz, 50 Hz step,
    /// B_ref 10 kHz (2001 entries).
    pub fn reference(larmor_hz: f64) -> Self {
        build_period_dictionary(larmor_hz, -50_000.0, 50_000.0, DEFAULT_A_STEP_HZ, DEFAULT_B_REF_HZ)
            .expect("reference grid is valid")
    }

    pub fn len(&self) -> usize {
        self.a_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_hz.is_empty()
    }

    pub fn a_of(&self, idx: usize) -> f64 {
        self.a_hz[idx]
    }

    pub fn tp_of(&self, idx: usize) -> f64 {
        self.tp_s[idx]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        (0..self.len()).map(move |k| (k, self.a_hz[k], self.tp_s[k]))
    }

    /// Nearest grid index for an A value (clamped to the grid).
    pub fn index_of_a(&self, a_hz: f64) -> usize {
        let k = ((a_hz - self.a_hz[0]) / self.a_step_hz).round();
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// A value on the dictionary's reference-B contour whose period equals
    /// `tp_s`, i.e. the A-equivalent of an arbitrary spin's period.
    pub fn a_equivalent_of_period(&self, tp_s: f64) -> Option<f64> {
        solve_a_for_period(tp_s, self.b_ref_hz, self.larmor_hz)
    }

    /// Nearest grid index for a period (via the A-equivalent).
    pub fn index_of_period(&self, tp_s: f64) -> Option<usize> {
        self.a_equivalent_of_period(tp_s).map(|a| self.index_of_a(a))
    }

    /// Plain-text persistence: versioned header plus `idx\ta_hz\ttp_s` rows.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        out.push_str("# period-dictionary v1\n");
        out.push_str(&format!(
            "# larmor_hz={:.17e} a_step_hz={:.17e} b_ref_hz={:.17e}\n",
            self.larmor_hz, self.a_step_hz, self.b_ref_hz
        ));
        for (k, a, tp) in self.entries() {
            out.push_str(&format!("{k}\t{a:.17e}\t{tp:.17e}\n"));
        }
        fs::write(path, out).map_err(|e| CoreError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        let perr = |line: usize, msg: String| CoreError::Parse {
            path: path.display().to_string(),
            line,
            msg,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| perr(1, "empty dictionary file".into()))?;
        if header.trim() != "# period-dictionary v1" {
            return Err(perr(1, format!("unknown header '{header}'")));
        }
        let (_, meta) = lines
            .next()
            .ok_or_else(|| perr(2, "missing metadata line".into()))?;
        let mut larmor_hz = None;
        let mut a_step_hz = None;
        let mut b_ref_hz = None;
        for tok in meta.trim_start_matches('#').split_whitespace() {
            if let Some((k, v)) = tok.split_once('=') {
                let v: f64 = v
                    .parse()
                    .map_err(|e| perr(2, format!("bad metadata value {k}: {e}")))?;
                match k {
                    "larmor_hz" => larmor_hz = Some(v),
                    "a_step_hz" => a_step_hz = Some(v),
                    "b_ref_hz" => b_ref_hz = Some(v),
                    _ => {}
                }
            }
        }
        let (larmor_hz, a_step_hz, b_ref_hz) = match (larmor_hz, a_step_hz, b_ref_hz) {
            (Some(l), Some(s), Some(b)) => (l, s, b),
            _ => return Err(perr(2, "metadata must define larmor_hz, a_step_hz, b_ref_hz".into())),
        };
        let mut a_hz = Vec::new();
        let mut tp_s = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(perr(i + 1, "expected 3 tab-separated columns".into()));
            }
            let idx: usize = cols[0]
                .parse()
                .map_err(|e| perr(i + 1, format!("bad index: {e}")))?;
            if idx != a_hz.len() {
                return Err(perr(i + 1, format!("index {idx} out of order")));
            }
            a_hz.push(
                cols[1]
                    .parse()
                    .map_err(|e| perr(i + 1, format!("bad a_hz: {e}")))?,
            );
            tp_s.push(
                cols[2]
                    .parse()
                    .map_err(|e| perr(i + 1, format!("bad tp_s: {e}")))?,
            );
        }
        if a_hz.is_empty() {
            return Err(perr(0, "dictionary has no entries".into()));
        }
        Ok(PeriodDictionary {
            a_hz,
            tp_s,
            a_step_hz,
            b_ref_hz,
            larmor_hz,
        })
    }
}
