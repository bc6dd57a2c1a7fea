//! Strong-coupling hyperfine table from density functional theory,
//! rearranged by target period group. Ships with the crate and backs both
//! strong-coupling classifier targets and bath sampling.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use crate::{CoreError, Result};

const BUNDLED_TSV: &str = include_str!("../../data/dft_table.tsv");

/// One table row: hyperfine pair and its quoted magnitude
/// omega_h = sqrt(A^2 + B^2) (all as frequency over 2*pi, Hz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DftRow {
    pub group: u32,
    pub a_hz: f64,
    pub b_hz: f64,
    pub omega_h_hz: f64,
}

/// Parsed table. `omega_warnings` lists 1-based line numbers whose quoted
/// omega_h disagrees with sqrt(A^2 + B^2) by more than 1%.
#[derive(Debug, Clone)]
pub struct DftTable {
    pub rows: Vec<DftRow>,
    pub omega_warnings: Vec<usize>,
}

impl DftTable {
    /// The table bundled with the crate.
    pub fn bundled() -> &'static DftTable {
        static TABLE: OnceLock<DftTable> = OnceLock::new();
        TABLE.get_or_init(|| parse(BUNDLED_TSV, "<bundled>").expect("bundled table parses"))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows grouped by group id, ascending.
    pub fn groups(&self) -> Vec<(u32, Vec<&DftRow>)> {
        let mut map: BTreeMap<u32, Vec<&DftRow>> = BTreeMap::new();
        for row in &self.rows {
            map.entry(row.group).or_default().push(row);
        }
        map.into_iter().collect()
    }
}

/// Load a table from a TSV file (`group<TAB>a_hz<TAB>b_hz<TAB>omega_h_hz`,
/// `#` comments allowed). An empty table is an error; omega_h mismatches
/// beyond 1% are collected as warnings, not errors.
pub fn load_dft_table(path: impl AsRef<Path>) -> Result<DftTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    parse(&text, &path.display().to_string())
}

fn parse(text: &str, path_label: &str) -> Result<DftTable> {
    let mut rows = Vec::new();
    let mut omega_warnings = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let perr = |msg: String| CoreError::Parse {
            path: path_label.to_string(),
            line: i + 1,
            msg,
        };
        let cols: Vec<&str> = trimmed.split('\t').collect();
        if cols.len() != 4 {
            return Err(perr(format!("expected 4 tab-separated columns, got {}", cols.len())));
        }
        let group: u32 = cols[0]
            .parse()
            .map_err(|e| perr(format!("bad group id: {e}")))?;
        let a_hz: f64 = cols[1].parse().map_err(|e| perr(format!("bad A: {e}")))?;
        let b_hz: f64 = cols[2].parse().map_err(|e| perr(format!("bad B: {e}")))?;
        let omega_h_hz: f64 = cols[3]
            .parse()
            .map_err(|e| perr(format!("bad omega_h: {e}")))?;
        if b_hz < 0.0 {
            return Err(perr("B must be non-negative".into()));
        }
        if omega_h_hz <= 0.0 {
            return Err(perr("omega_h must be positive".into()));
        }
        let consistent = (a_hz.hypot(b_hz) - omega_h_hz).abs() / omega_h_hz <= 0.01;
        if !consistent {
            omega_warnings.push(i + 1);
        }
        rows.push(DftRow {
            group,
            a_hz,
            b_hz,
            omega_h_hz,
        });
    }
    if rows.is_empty() {
        return Err(CoreError::Parse {
            path: path_label.to_string(),
            line: 0,
            msg: "table has no data rows".into(),
        });
    }
    Ok(DftTable {
        rows,
        omega_warnings,
    })
}
