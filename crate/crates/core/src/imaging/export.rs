//! Image export: 8-bit PGM for inspection, lossless CSV for data exchange.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;

use crate::{CoreError, Result, Scalar};

/// Write pixels as binary 8-bit PGM (P5), mapping [0, 1] to [0, 255].
pub fn write_image_pgm<S: Scalar>(path: impl AsRef<Path>, pixels: &Array2<S>) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = pixels.dim();
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.reserve(h * w);
    for v in pixels.iter() {
        let g = (v.f64().clamp(0.0, 1.0) * 255.0).round() as u8;
        bytes.push(g);
    }
    let mut f = fs::File::create(path).map_err(|e| CoreError::io(path, e))?;
    f.write_all(&bytes).map_err(|e| CoreError::io(path, e))
}

/// Write raw pixels as CSV with 17 significant digits (lossless for f64).
pub fn write_image_csv<S: Scalar>(path: impl AsRef<Path>, pixels: &Array2<S>) -> Result<()> {
    let path = path.as_ref();
    let (h, w) = pixels.dim();
    let mut out = String::with_capacity(h * w * 26);
    for r in 0..h {
        for c in 0..w {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format!("{:.16e}", pixels[(r, c)].f64()));
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CoreError::io(path, e))
}

/// Read a CSV written by [`write_image_csv`].
pub fn read_image_csv<S: Scalar>(path: impl AsRef<Path>) -> Result<Array2<S>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    let mut rows: Vec<Vec<S>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<S>, _> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>().map(S::of))
            .collect();
        let row = row.map_err(|e| CoreError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg: format!("bad pixel value: {e}"),
        })?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CoreError::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    msg: format!("ragged row: {} vs {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CoreError::Parse {
            path: path.display().to_string(),
            line: 0,
            msg: "empty image file".into(),
        });
    }
    let h = rows.len();
    let w = rows[0].len();
    Ok(Array2::from_shape_vec((h, w), rows.into_iter().flatten().collect()).expect("checked"))
}
