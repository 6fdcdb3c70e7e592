//! Feature batches and their cross-set similarity, plus a packed binary
//! container for moving sets between runs.
//!
//! Container layout, little-endian throughout: magic `G2RF`, version u16,
//! label length u16 + UTF-8 bytes, row count u32, dimension u32, then
//! `rows * dim` f32 values in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::EvalError;

pub const FEATURE_MAGIC: [u8; 4] = *b"G2RF";
pub const FEATURE_VERSION: u16 = 1;

/// A labeled batch of equally sized feature vectors, row-major. Every
/// value is finite; NaN and infinities are rejected at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    label: String,
    dim: u32,
    data: Vec<f32>,
}

impl FeatureSet {
    pub fn new(label: impl Into<String>, dim: u32, data: Vec<f32>) -> Result<Self, EvalError> {
        let label = label.into();
        if dim == 0 {
            return Err(EvalError::ZeroDim { set: label });
        }
        if data.len() % dim as usize != 0 {
            return Err(EvalError::RaggedData {
                len: data.len(),
                dim,
            });
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite {
                set: label,
                index: bad / dim as usize,
            });
        }
        Ok(FeatureSet { label, dim, data })
    }

    pub fn empty(label: impl Into<String>, dim: u32) -> Result<Self, EvalError> {
        FeatureSet::new(label, dim, Vec::new())
    }

    pub fn push(&mut self, row: &[f32]) -> Result<(), EvalError> {
        if row.len() != self.dim as usize {
            return Err(EvalError::FeatureDimMismatch {
                left: self.dim,
                right: row.len() as u32,
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite {
                set: self.label.clone(),
                index: self.rows(),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.dim as usize
    }

    pub fn vector(&self, row: usize) -> &[f32] {
        let d = self.dim as usize;
        &self.data[row * d..(row + 1) * d]
    }
}

/// Mean cosine similarity over every cross pair: each row of `a` against
/// each row of `b`. Vectors are L2-normalized first, so rescaling any
/// vector by a positive factor leaves the result unchanged. Rather than
/// walking all `|a| * |b|` pairs, the mean is computed as the dot product
/// of the two sets' normalized-vector sums divided by the pair count,
/// which is the same quantity. Accumulation runs in f64.
pub fn cosine_pairwise(a: &FeatureSet, b: &FeatureSet) -> Result<f64, EvalError> {
    if a.dim() != b.dim() {
        return Err(EvalError::FeatureDimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    if a.rows() == 0 {
        return Err(EvalError::EmptySet {
            set: a.label().into(),
        });
    }
    if b.rows() == 0 {
        return Err(EvalError::EmptySet {
            set: b.label().into(),
        });
    }
    let sum_a = normalized_sum(a)?;
    let sum_b = normalized_sum(b)?;
    let dot: f64 = sum_a.iter().zip(&sum_b).map(|(x, y)| x * y).sum();
    Ok(dot / (a.rows() as f64 * b.rows() as f64))
}

fn normalized_sum(set: &FeatureSet) -> Result<Vec<f64>, EvalError> {
    let d = set.dim() as usize;
    let mut acc = vec![0.0f64; d];
    for row in 0..set.rows() {
        let v = set.vector(row);
        let norm = v
            .iter()
            .map(|&x| x as f64 * x as f64)
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            return Err(EvalError::ZeroVector {
                set: set.label().into(),
                index: row,
            });
        }
        for (slot, &x) in acc.iter_mut().zip(v) {
            *slot += x as f64 / norm;
        }
    }
    Ok(acc)
}

pub fn write_features(set: &FeatureSet, out: &mut impl Write) -> std::io::Result<()> {
    let label = set.label().as_bytes();
    if label.len() > u16::MAX as usize {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "feature label longer than 65535 bytes",
        ));
    }
    out.write_all(&FEATURE_MAGIC)?;
    out.write_all(&FEATURE_VERSION.to_le_bytes())?;
    out.write_all(&(label.len() as u16).to_le_bytes())?;
    out.write_all(label)?;
    out.write_all(&(set.rows() as u32).to_le_bytes())?;
    out.write_all(&set.dim().to_le_bytes())?;
    for row in 0..set.rows() {
        for &v in set.vector(row) {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_features(input: &mut impl Read) -> Result<FeatureSet, EvalError> {
    let mut magic = [0u8; 4];
    read_all(input, &mut magic)?;
    if magic != FEATURE_MAGIC {
        return Err(EvalError::BadContainer(format!(
            "bad magic {magic:02x?}"
        )));
    }
    let version = u16::from_le_bytes(read_array(input)?);
    if version != FEATURE_VERSION {
        return Err(EvalError::BadContainer(format!(
            "unsupported version {version}"
        )));
    }
    let label_len = u16::from_le_bytes(read_array(input)?) as usize;
    let mut label_bytes = vec![0u8; label_len];
    read_all(input, &mut label_bytes)?;
    let label = String::from_utf8(label_bytes)
        .map_err(|_| EvalError::BadContainer("label is not UTF-8".into()))?;
    let rows = u32::from_le_bytes(read_array(input)?) as usize;
    let dim = u32::from_le_bytes(read_array(input)?);
    if dim == 0 {
        return Err(EvalError::BadContainer("zero dimension".into()));
    }
    let count = rows
        .checked_mul(dim as usize)
        .ok_or_else(|| EvalError::BadContainer("value count overflows".into()))?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        data.push(f32::from_le_bytes(read_array(input)?));
    }
    FeatureSet::new(label, dim, data)
}

pub fn save_features(set: &FeatureSet, path: impl AsRef<Path>) -> Result<(), EvalError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| EvalError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_features(set, &mut out).map_err(|e| EvalError::io(path, e))?;
    out.flush().map_err(|e| EvalError::io(path, e))
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureSet, EvalError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| EvalError::io(path, e))?;
    read_features(&mut BufReader::new(file))
}

fn read_all(input: &mut impl Read, buf: &mut [u8]) -> Result<(), EvalError> {
    input
        .read_exact(buf)
        .map_err(|_| EvalError::BadContainer("truncated container".into()))
}

fn read_array<const N: usize>(input: &mut impl Read) -> Result<[u8; N], EvalError> {
    let mut buf = [0u8; N];
    read_all(input, &mut buf)?;
    Ok(buf)
}
