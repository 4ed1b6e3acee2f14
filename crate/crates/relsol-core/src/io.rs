//! On-disk formats: little-endian binary field snapshots with JSON sidecars,
//! the per-exponent constants cache, and JSON-lines trajectory samples.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::evolution::SampleRow;
use crate::functionals::{Constants, ProvenanceTags};
use crate::spectral::{Field, Grid};

pub const SCHEMA_VERSION: u32 = 1;

/// Sidecar describing a binary snapshot. An infinite speed is stored as
/// JSON null and restored as such.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub schema_version: u32,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    #[serde(serialize_with = "ser_speed", deserialize_with = "de_speed")]
    pub c: f64,
    #[serde(rename = "M")]
    pub mass: f64,
    pub kind: String,
}

fn ser_speed<S: Serializer>(c: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if c.is_finite() {
        s.serialize_some(c)
    } else {
        s.serialize_none()
    }
}

fn de_speed<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

fn sidecar_path(data_path: &Path) -> PathBuf {
    data_path.with_extension("json")
}

/// Write the field as interleaved little-endian f64 (re, im per node) at
/// `path`, with the metadata sidecar next to it under extension .json.
pub fn write_snapshot(path: &Path, field: &Field, p: f64, c: f64, kind: &str) -> Result<PathBuf> {
    let grid = field.grid();
    let meta = SnapshotMeta {
        schema_version: SCHEMA_VERSION,
        length: grid.length(),
        n: grid.n(),
        p,
        c,
        mass: crate::functionals::mass(field),
        kind: kind.to_string(),
    };
    let mut bytes = Vec::with_capacity(16 * grid.n());
    for z in field.values() {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    std::fs::write(path, &bytes)?;
    let side = sidecar_path(path);
    write_json_pretty(&side, &meta)?;
    Ok(side)
}

/// Read a snapshot written by `write_snapshot`.
pub fn read_snapshot(path: &Path) -> Result<(Field, SnapshotMeta)> {
    let meta: SnapshotMeta =
        serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    let bytes = std::fs::read(path)?;
    let expected = 16 * meta.n;
    if bytes.len() != expected {
        return Err(Error::SnapshotLength {
            bytes: bytes.len(),
            expected,
            n: meta.n,
        });
    }
    let grid = Grid::new(meta.length, meta.n)?;
    let values: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[0..8].try_into().expect("chunk size"));
            let im = f64::from_le_bytes(ch[8..16].try_into().expect("chunk size"));
            Complex64::new(re, im)
        })
        .collect();
    Ok((Field::from_values(&grid, values)?, meta))
}

/// Cache row for one exponent.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CachedConstants {
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "Chalf")]
    pub c_half: f64,
    #[serde(rename = "CGN")]
    pub c_gn: f64,
    pub alpha: f64,
    pub provenance: ProvenanceTags,
}

/// p (displayed with minimal digits) -> constants. BTreeMap keeps the file
/// byte-deterministic.
pub type ConstantsCache = BTreeMap<String, CachedConstants>;

pub fn p_key(p: f64) -> String {
    format!("{p}")
}

/// Missing file reads as an empty cache.
pub fn read_constants_cache(path: &Path) -> Result<ConstantsCache> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(serde_json::from_str(&text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(ConstantsCache::new()),
        Err(e) => Err(e.into()),
    }
}

pub fn write_constants_cache(path: &Path, cache: &ConstantsCache) -> Result<()> {
    write_json_pretty(path, cache)
}

impl From<&Constants> for CachedConstants {
    fn from(c: &Constants) -> Self {
        CachedConstants {
            c1: c.c1,
            c_half: c.c_half,
            c_gn: c.c_gn,
            alpha: c.alpha,
            provenance: c.provenance,
        }
    }
}

impl CachedConstants {
    pub fn into_constants(self, p: f64) -> Constants {
        Constants {
            p,
            c1: self.c1,
            c_half: self.c_half,
            c_gn: self.c_gn,
            alpha: self.alpha,
            provenance: self.provenance,
        }
    }
}

/// Fetch the constants for `p` from the cache at `path`, computing and
/// persisting them on a miss.
pub fn cached_constants(path: &Path, p: f64) -> Result<Constants> {
    let mut cache = read_constants_cache(path)?;
    if let Some(row) = cache.get(&p_key(p)) {
        return Ok(row.into_constants(p));
    }
    let consts = Constants::compute(p)?;
    cache.insert(p_key(p), CachedConstants::from(&consts));
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    write_constants_cache(path, &cache)?;
    Ok(consts)
}

/// One JSON object per line, in sample order.
pub fn write_samples_jsonl(path: &Path, samples: &[SampleRow]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for s in samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_samples_jsonl(path: &Path) -> Result<Vec<SampleRow>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

/// Pretty JSON plus a trailing newline; field order is fixed by the struct,
/// so the bytes are deterministic.
pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
