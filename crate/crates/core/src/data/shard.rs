//! Binary dataset persistence: fixed-layout shard files plus a JSON
//! manifest. Records are little-endian: u64 seed, u32 input length, u32
//! label length, then the two f32 payloads.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// One serialized sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardRecord {
    pub seed: u64,
    pub input: Vec<f32>,
    pub label: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub name: String,
    /// Serialized generation spec, kept for provenance and reuse checks.
    pub spec: serde_json::Value,
    pub record_count: usize,
    pub input_len: usize,
    pub label_len: usize,
    pub shards: Vec<String>,
}

fn write_record(w: &mut impl Write, rec: &ShardRecord) -> std::io::Result<()> {
    w.write_all(&rec.seed.to_le_bytes())?;
    w.write_all(&(rec.input.len() as u32).to_le_bytes())?;
    w.write_all(&(rec.label.len() as u32).to_le_bytes())?;
    for v in &rec.input {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in &rec.label {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_exact_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_record(r: &mut impl Read) -> std::io::Result<Option<ShardRecord>> {
    let mut seed_bytes = [0u8; 8];
    match r.read_exact(&mut seed_bytes) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e),
    }
    let seed = u64::from_le_bytes(seed_bytes);
    let ni = read_exact_u32(r)? as usize;
    let nl = read_exact_u32(r)? as usize;
    let mut read_vec = |n: usize| -> std::io::Result<Vec<f32>> {
        let mut buf = vec![0u8; n * 4];
        r.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    };
    let input = read_vec(ni)?;
    let label = read_vec(nl)?;
    Ok(Some(ShardRecord { seed, input, label }))
}

/// Write `records` under `dir` as `name.manifest.json` plus numbered shard
/// files of at most `shard_size` records. All records must share input and
/// label lengths.
pub fn write_dataset(
    dir: impl AsRef<Path>,
    name: &str,
    spec: serde_json::Value,
    records: &[ShardRecord],
    shard_size: usize,
) -> Result<PathBuf> {
    let dir = dir.as_ref();
    if records.is_empty() {
        return Err(CoreError::Config("cannot write an empty dataset".into()));
    }
    if shard_size == 0 {
        return Err(CoreError::Config("shard_size must be positive".into()));
    }
    let input_len = records[0].input.len();
    let label_len = records[0].label.len();
    for (i, r) in records.iter().enumerate() {
        if r.input.len() != input_len || r.label.len() != label_len {
            return Err(CoreError::Config(format!(
                "record {i} has shape ({}, {}), expected ({input_len}, {label_len})",
                r.input.len(),
                r.label.len()
            )));
        }
    }
    fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e))?;
    let mut shards = Vec::new();
    for (si, chunk) in records.chunks(shard_size).enumerate() {
        let shard_name = format!("{name}.shard{si:04}.bin");
        let path = dir.join(&shard_name);
        let file = File::create(&path).map_err(|e| CoreError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        for rec in chunk {
            write_record(&mut w, rec).map_err(|e| CoreError::io(&path, e))?;
        }
        w.flush().map_err(|e| CoreError::io(&path, e))?;
        shards.push(shard_name);
    }
    let manifest = DatasetManifest {
        schema_version: DATASET_SCHEMA_VERSION,
        name: name.to_string(),
        spec,
        record_count: records.len(),
        input_len,
        label_len,
        shards,
    };
    let mpath = dir.join(format!("{name}.manifest.json"));
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CoreError::Config(format!("manifest serialization: {e}")))?;
    fs::write(&mpath, json).map_err(|e| CoreError::io(&mpath, e))?;
    Ok(mpath)
}

/// Load a dataset back from its manifest path.
pub fn read_dataset(manifest_path: impl AsRef<Path>) -> Result<(DatasetManifest, Vec<ShardRecord>)> {
    let mpath = manifest_path.as_ref();
    let text = fs::read_to_string(mpath).map_err(|e| CoreError::io(mpath, e))?;
    let manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| CoreError::Parse {
        path: mpath.display().to_string(),
        line: 0,
        msg: format!("manifest: {e}"),
    })?;
    if manifest.schema_version != DATASET_SCHEMA_VERSION {
        return Err(CoreError::Config(format!(
            "unsupported dataset schema {} (want {DATASET_SCHEMA_VERSION})",
            manifest.schema_version
        )));
    }
    let dir = mpath.parent().unwrap_or_else(|| Path::new("."));
    let mut records = Vec::with_capacity(manifest.record_count);
    for shard in &manifest.shards {
        let path = dir.join(shard);
        let file = File::open(&path).map_err(|e| CoreError::io(&path, e))?;
        let mut r = BufReader::new(file);
        while let Some(rec) = read_record(&mut r).map_err(|e| CoreError::io(&path, e))? {
            if rec.input.len() != manifest.input_len || rec.label.len() != manifest.label_len {
                return Err(CoreError::Config(format!(
                    "shard {shard}: record shape ({}, {}) does not match manifest ({}, {})",
                    rec.input.len(),
                    rec.label.len(),
                    manifest.input_len,
                    manifest.label_len
                )));
            }
            records.push(rec);
        }
    }
    if records.len() != manifest.record_count {
        return Err(CoreError::Config(format!(
            "dataset holds {} records, manifest says {}",
            records.len(),
            manifest.record_count
        )));
    }
    Ok((manifest, records))
}

/// Stack records into input/label matrices for training. All records must
/// share the manifest's shapes; `read_dataset` has already enforced that.
pub fn records_to_arrays(records: &[ShardRecord]) -> Result<(Array2<f32>, Array2<f32>)> {
    let rows = records.len();
    if rows == 0 {
        return Err(CoreError::Config("dataset holds no records".into()));
    }
    let in_dim = records[0].input.len();
    let out_dim = records[0].label.len();
    let mut x = Array2::<f32>::zeros((rows, in_dim));
    let mut y = Array2::<f32>::zeros((rows, out_dim));
    for (r, rec) in records.iter().enumerate() {
        for (j, &v) in rec.input.iter().enumerate() {
            x[(r, j)] = v;
        }
        for (j, &v) in rec.label.iter().enumerate() {
            y[(r, j)] = v;
        }
    }
    Ok((x, y))
}
