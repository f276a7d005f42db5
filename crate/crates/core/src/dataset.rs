//! Instance files.
//!
//! Raw binary: `n` little-endian `f64` fields followed by an `n x n`
//! row-major little-endian `f64` matrix `A`. Couplings are the strict lower
//! triangle of `(A + A^T) / 2`.
//!
//! Text: one JSON document per instance with `n`, `label`, `h` and `J`,
//! where `J` is a list of `[i, j, value]` triples with `j < i`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingProblem;

/// Serialized form of an [`IsingProblem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub n: usize,
    #[serde(default)]
    pub label: String,
    pub h: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<(usize, usize, f64)>,
}

impl From<IsingProblem> for ProblemDocument {
    fn from(p: IsingProblem) -> Self {
        Self {
            n: p.n(),
            label: p.label().to_string(),
            h: p.fields().to_vec(),
            j: p.couplings().collect(),
        }
    }
}

impl TryFrom<ProblemDocument> for IsingProblem {
    type Error = Error;

    fn try_from(doc: ProblemDocument) -> Result<Self> {
        if doc.h.len() != doc.n {
            return Err(Error::DimensionMismatch {
                expected: doc.n,
                got: doc.h.len(),
            });
        }
        if doc.j.iter().any(|&(i, j, _)| j >= i) {
            return Err(Error::parse(
                "instance document",
                "couplings must satisfy j < i",
            ));
        }
        Ok(IsingProblem::new(doc.h, &doc.j)?.with_label(doc.label))
    }
}

/// Reads a raw binary instance, inferring `n` from the file length.
pub fn load_raw_binary(path: impl AsRef<Path>, scale_sqrt2: bool) -> Result<IsingProblem> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(decode_raw(&bytes, scale_sqrt2)?.with_label(label))
}

/// Decodes the raw binary layout from memory.
pub fn decode_raw(bytes: &[u8], scale_sqrt2: bool) -> Result<IsingProblem> {
    let len = bytes.len();
    if !len.is_multiple_of(8) {
        return Err(Error::BadDatasetLength(len));
    }
    let words = len / 8;
    // n^2 + n = words
    let n = ((((1 + 4 * words) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    if n == 0 || n * n + n != words {
        return Err(Error::BadDatasetLength(len));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("raw dataset"));
    }
    let (h, a) = values.split_at(n);
    let mut lower = vec![vec![0.0; n]; n];
    for i in 1..n {
        for j in 0..i {
            lower[i][j] = (a[i * n + j] + a[j * n + i]) / 2.0;
        }
    }
    let mut p = IsingProblem::from_lower(h.to_vec(), &lower)?;
    if scale_sqrt2 {
        p.scale_couplings(std::f64::consts::SQRT_2);
    }
    Ok(p)
}

/// Encodes a problem in the raw binary layout. The coupling matrix is
/// written lower-triangular, which decodes back to the same problem.
pub fn encode_raw(p: &IsingProblem) -> Vec<u8> {
    let n = p.n();
    let mut out = Vec::with_capacity(8 * (n * n + n));
    for &v in p.fields() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for i in 0..n {
        for j in 0..n {
            let v = if j < i { 2.0 * p.coupling(i, j) } else { 0.0 };
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn write_raw_binary(p: &IsingProblem, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_raw(p)).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: impl AsRef<Path>) -> Result<IsingProblem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_text(&text)
}

pub fn from_text(text: &str) -> Result<IsingProblem> {
    let doc: ProblemDocument = serde_json::from_str(text)?;
    IsingProblem::try_from(doc)
}

pub fn to_text(p: &IsingProblem) -> String {
    serde_json::to_string_pretty(&ProblemDocument::from(p.clone())).expect("document serializes")
}

pub fn write_text(p: &IsingProblem, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_text(p)).map_err(|e| Error::io(path, e))
}

/// Loads either format, picking raw binary for `.bin`/`.dat` extensions.
pub fn load_any(path: impl AsRef<Path>, scale_sqrt2: bool) -> Result<IsingProblem> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") | Some("dat") | Some("raw") => load_raw_binary(path, scale_sqrt2),
        _ => {
            let mut p = read_text(path)?;
            if scale_sqrt2 {
                p.scale_couplings(std::f64::consts::SQRT_2);
            }
            Ok(p)
        }
    }
}
