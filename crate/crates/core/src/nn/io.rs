//! Model persistence: versioned binary container with the architecture, a
//! reuse key describing the acquisition settings the model is valid for,
//! float32 tensors and a trailing checksum.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::nn::layer::LayerSpec;
use crate::nn::model::Model;
use crate::{CoreError, Result, Scalar};

pub const MODEL_MAGIC: [u8; 4] = *b"NVSM";
pub const MODEL_VERSION: u32 = 1;

/// Acquisition settings a trained model is tied to. A denoiser transfers
/// whenever the pulse count and time resolution match; classifier-style
/// models additionally pin the external field and the sweep length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseKey {
    pub model_kind: String,
    pub n_pulses: u32,
    pub tau_step_s: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub field_gauss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace_len: Option<usize>,
}

impl ReuseKey {
    pub fn denoiser(n_pulses: u32, tau_step_s: f64) -> Self {
        ReuseKey {
            model_kind: "denoiser".into(),
            n_pulses,
            tau_step_s,
            field_gauss: None,
            trace_len: None,
        }
    }

    pub fn classifier(
        kind: &str,
        n_pulses: u32,
        tau_step_s: f64,
        field_gauss: f64,
        trace_len: usize,
    ) -> Self {
        ReuseKey {
            model_kind: kind.into(),
            n_pulses,
            tau_step_s,
            field_gauss: Some(field_gauss),
            trace_len: Some(trace_len),
        }
    }

    /// Error listing every differing field, or Ok when the model may be
    /// reused under `expected` settings.
    pub fn ensure_matches(&self, expected: &ReuseKey) -> Result<()> {
        let mut diffs = Vec::new();
        if self.model_kind != expected.model_kind {
            diffs.push(format!(
                "model_kind: {} vs {}",
                self.model_kind, expected.model_kind
            ));
        }
        if self.n_pulses != expected.n_pulses {
            diffs.push(format!("n_pulses: {} vs {}", self.n_pulses, expected.n_pulses));
        }
        if self.tau_step_s != expected.tau_step_s {
            diffs.push(format!(
                "tau_step_s: {:e} vs {:e}",
                self.tau_step_s, expected.tau_step_s
            ));
        }
        if self.field_gauss != expected.field_gauss {
            diffs.push(format!(
                "field_gauss: {:?} vs {:?}",
                self.field_gauss, expected.field_gauss
            ));
        }
        if self.trace_len != expected.trace_len {
            diffs.push(format!(
                "trace_len: {:?} vs {:?}",
                self.trace_len, expected.trace_len
            ));
        }
        if diffs.is_empty() {
            Ok(())
        } else {
            Err(CoreError::ReuseKey(diffs.join("; ")))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ArchHeader {
    in_dim: usize,
    layers: Vec<LayerSpec>,
}

fn push_block(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(bytes);
}

/// Serialize the model (tensors stored as float32) with its reuse key.
pub fn save_model<S: Scalar>(model: &Model<S>, key: &ReuseKey, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    let key_json =
        serde_json::to_vec(key).map_err(|e| CoreError::Config(format!("reuse key: {e}")))?;
    push_block(&mut out, &key_json);
    let arch = ArchHeader {
        in_dim: model.in_dim(),
        layers: model.specs(),
    };
    let arch_json =
        serde_json::to_vec(&arch).map_err(|e| CoreError::Config(format!("arch header: {e}")))?;
    push_block(&mut out, &arch_json);
    let tensors: Vec<&[S]> = model
        .layers
        .iter()
        .flat_map(|l| l.persisted_tensors())
        .collect();
    out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
    for t in tensors {
        out.extend_from_slice(&(t.len() as u32).to_le_bytes());
        for v in t {
            out.extend_from_slice(&(v.f64() as f32).to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    fs::write(path, out).map_err(|e| CoreError::io(path, e))
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    path: String,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(CoreError::Parse {
                path: self.path.clone(),
                line: 0,
                msg: format!("truncated model file at byte {}", self.pos),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn block(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }
}

/// Load a model and its reuse key, verifying magic, version and checksum.
pub fn load_model<S: Scalar>(path: impl AsRef<Path>) -> Result<(Model<S>, ReuseKey)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| CoreError::io(path, e))?;
    let perr = |msg: String| CoreError::Parse {
        path: path.display().to_string(),
        line: 0,
        msg,
    };
    if bytes.len() < 40 {
        return Err(perr("file too short to be a model".into()));
    }
    let (body, stored_digest) = bytes.split_at(bytes.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != stored_digest {
        return Err(perr("checksum mismatch (corrupted model file)".into()));
    }
    let mut cur = Cursor {
        buf: body,
        pos: 0,
        path: path.display().to_string(),
    };
    let magic = cur.take(4)?;
    if magic != MODEL_MAGIC {
        return Err(perr(format!("bad magic {magic:?}")));
    }
    let version = cur.u32()?;
    if version != MODEL_VERSION {
        return Err(perr(format!(
            "unsupported model version {version} (want {MODEL_VERSION})"
        )));
    }
    let key: ReuseKey = serde_json::from_slice(cur.block()?)
        .map_err(|e| perr(format!("reuse key: {e}")))?;
    let arch: ArchHeader = serde_json::from_slice(cur.block()?)
        .map_err(|e| perr(format!("arch header: {e}")))?;
    let mut model = Model::<S>::from_specs(arch.in_dim, &arch.layers)?;
    let tensor_count = cur.u32()? as usize;
    let mut tensors: Vec<Vec<f32>> = Vec::with_capacity(tensor_count);
    for _ in 0..tensor_count {
        let n = cur.u32()? as usize;
        let raw = cur.take(n * 4)?;
        tensors.push(
            raw.chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        );
    }
    if cur.pos != body.len() {
        return Err(perr(format!(
            "{} trailing bytes after tensors",
            body.len() - cur.pos
        )));
    }
    let mut it = tensors.iter();
    for layer in &mut model.layers {
        for slot in layer.persisted_tensors_mut() {
            let t = it
                .next()
                .ok_or_else(|| perr("tensor count does not match architecture".into()))?;
            if t.len() != slot.len() {
                return Err(perr(format!(
                    "tensor length {} does not match architecture slot {}",
                    t.len(),
                    slot.len()
                )));
            }
            for (dst, &src) in slot.iter_mut().zip(t.iter()) {
                *dst = S::of(src as f64);
            }
        }
    }
    if it.next().is_some() {
        return Err(perr("extra tensors beyond architecture".into()));
    }
    Ok((model, key))
}

/// Load for inference under `expected` settings; refuses on key mismatch.
pub fn load_model_for<S: Scalar>(
    path: impl AsRef<Path>,
    expected: &ReuseKey,
) -> Result<(Model<S>, ReuseKey)> {
    let (model, key) = load_model(path)?;
    key.ensure_matches(expected)?;
    Ok((model, key))
}
