//! Trace file I/O: CSV values plus a JSON sidecar with the acquisition
//! config and trace kind. Values are serialized with 17 significant decimal
//! digits so the round trip is bit-exact for f64 (and therefore for f32).

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result, Scalar, signal::{AcquisitionConfig, Trace, TraceKind}};

#[derive(Serialize, Deserialize)]
struct Sidecar {
    n_pulses: u32,
    larmor_hz: f64,
    tau_start_s: f64,
    tau_end_s: f64,
    tau_step_s: f64,
    kind: TraceKind,
}

fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    let mut os = csv_path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}

/// Write `<path>` as CSV (`tau_s,p_x`) and `<path>.json` as the sidecar.
pub fn write_trace_csv<S: Scalar>(path: impl AsRef<Path>, trace: &Trace<S>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(trace.len() * 48 + 16);
    out.push_str("tau_s,p_x\n");
    for (i, v) in trace.values.iter().enumerate() {
        let tau = trace.config.tau_at(i).f64();
        out.push_str(&format!("{:.16e},{:.16e}\n", tau, v.f64()));
    }
    let mut f = fs::File::create(path).map_err(|e| CoreError::io(path, e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| CoreError::io(path, e))?;

    let side = Sidecar {
        n_pulses: trace.config.n_pulses,
        larmor_hz: trace.config.larmor_hz.f64(),
        tau_start_s: trace.config.tau_start_s.f64(),
        tau_end_s: trace.config.tau_end_s.f64(),
        tau_step_s: trace.config.tau_step_s.f64(),
        kind: trace.kind,
    };
    let sp = sidecar_path(path);
    fs::write(&sp, serde_json::to_string_pretty(&side).expect("sidecar serializes"))
        .map_err(|e| CoreError::io(&sp, e))?;
    Ok(())
}

/// Read a trace written by [`write_trace_csv`].
pub fn read_trace_csv<S: Scalar>(path: impl AsRef<Path>) -> Result<Trace<S>> {
    let path = path.as_ref();
    let sp = sidecar_path(path);
    let side_text = fs::read_to_string(&sp).map_err(|e| CoreError::io(&sp, e))?;
    let side: Sidecar = serde_json::from_str(&side_text).map_err(|e| CoreError::Parse {
        path: sp.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    let cfg = AcquisitionConfig::new(
        side.n_pulses,
        S::of(side.larmor_hz),
        S::of(side.tau_start_s),
        S::of(side.tau_end_s),
        S::of(side.tau_step_s),
    )?;

    let text = fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    let mut values = Vec::with_capacity(cfg.grid_len());
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line.trim() != "tau_s,p_x" {
                return Err(CoreError::Parse {
                    path: path.display().to_string(),
                    line: 1,
                    msg: format!("expected header 'tau_s,p_x', got '{line}'"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (t, p) = (cols.next(), cols.next());
        let p = p.ok_or_else(|| CoreError::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: "expected two columns".into(),
        })?;
        let _ = t;
        let v: f64 = p.trim().parse().map_err(|e| CoreError::Parse {
            path: path.display().to_string(),
            line: lineno + 1,
            msg: format!("bad p_x value: {e}"),
        })?;
        values.push(S::of(v));
    }
    if values.len() != cfg.grid_len() {
        return Err(CoreError::Parse {
            path: path.display().to_string(),
            line: 0,
            msg: format!(
                "value count {} does not match grid length {}",
                values.len(),
                cfg.grid_len()
            ),
        });
    }
    Ok(Trace::new(cfg, values, side.kind))
}
