//! File I/O for tensors.
//!
//! Binary "UQT1" layout (all integers little-endian):
//!
//! ```text
//! magic  "UQT1"                 4 bytes
//! kind   u8                     1 = matrix, 2 = stack, 3 = labels
//! pad    u8 x 3                 zero
//! dims   u64 x rank             matrix: n, c | stack: F, n, c | labels: n, c
//! data   f64 row-major          (labels: u32 per sample)
//! ```
//!
//! CSV: matrices are bare comma-separated rows; labels carry an
//! `index,label` header.

use std::fs;
use std::path::Path;

use super::{LabelVector, McdStack, ProbMatrix};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"UQT1";

const KIND_MATRIX: u8 = 1;
const KIND_STACK: u8 = 2;
const KIND_LABELS: u8 = 3;
const HEADER_LEN: usize = 8;
const LABEL_HEADER: &str = "index,label";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorFormat {
    Csv,
    Binary,
}

impl TensorFormat {
    /// `.csv` files are CSV, everything else is binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => TensorFormat::Csv,
            _ => TensorFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Matrix(ProbMatrix),
    Stack(McdStack),
    Labels(LabelVector),
}

impl Tensor {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Tensor::Matrix(_) => "matrix",
            Tensor::Stack(_) => "stack",
            Tensor::Labels(_) => "labels",
        }
    }

    pub fn into_matrix(self) -> Result<ProbMatrix> {
        match self {
            Tensor::Matrix(m) => Ok(m),
            other => Err(Error::InvalidTensor(format!(
                "expected matrix, found {}",
                other.kind_name()
            ))),
        }
    }

    pub fn into_stack(self) -> Result<McdStack> {
        match self {
            Tensor::Stack(s) => Ok(s),
            other => Err(Error::InvalidTensor(format!(
                "expected stack, found {}",
                other.kind_name()
            ))),
        }
    }

    pub fn into_labels(self) -> Result<LabelVector> {
        match self {
            Tensor::Labels(l) => Ok(l),
            other => Err(Error::InvalidTensor(format!(
                "expected labels, found {}",
                other.kind_name()
            ))),
        }
    }
}

impl From<ProbMatrix> for Tensor {
    fn from(m: ProbMatrix) -> Self {
        Tensor::Matrix(m)
    }
}

impl From<McdStack> for Tensor {
    fn from(s: McdStack) -> Self {
        Tensor::Stack(s)
    }
}

impl From<LabelVector> for Tensor {
    fn from(l: LabelVector) -> Self {
        Tensor::Labels(l)
    }
}

/// Borrowed view used for writing without cloning.
#[derive(Debug, Clone, Copy)]
pub enum TensorRef<'a> {
    Matrix(&'a ProbMatrix),
    Stack(&'a McdStack),
    Labels(&'a LabelVector),
}

impl<'a> From<&'a ProbMatrix> for TensorRef<'a> {
    fn from(m: &'a ProbMatrix) -> Self {
        TensorRef::Matrix(m)
    }
}

impl<'a> From<&'a McdStack> for TensorRef<'a> {
    fn from(s: &'a McdStack) -> Self {
        TensorRef::Stack(s)
    }
}

impl<'a> From<&'a LabelVector> for TensorRef<'a> {
    fn from(l: &'a LabelVector) -> Self {
        TensorRef::Labels(l)
    }
}

impl<'a> From<&'a Tensor> for TensorRef<'a> {
    fn from(t: &'a Tensor) -> Self {
        match t {
            Tensor::Matrix(m) => TensorRef::Matrix(m),
            Tensor::Stack(s) => TensorRef::Stack(s),
            Tensor::Labels(l) => TensorRef::Labels(l),
        }
    }
}

pub fn read_tensor(path: impl AsRef<Path>, format: TensorFormat) -> Result<Tensor> {
    let path = path.as_ref();
    match format {
        TensorFormat::Binary => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_binary(&bytes)
        }
        TensorFormat::Csv => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            decode_csv(&text, None)
        }
    }
}

/// Reads a label CSV, fixing the class count instead of inferring it from
/// the largest label present.
pub fn read_labels_csv(path: impl AsRef<Path>, num_classes: Option<usize>) -> Result<LabelVector> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_csv(&text, num_classes)?.into_labels()
}

pub fn write_tensor<'a>(
    value: impl Into<TensorRef<'a>>,
    path: impl AsRef<Path>,
    format: TensorFormat,
) -> Result<()> {
    let path = path.as_ref();
    let bytes = match format {
        TensorFormat::Binary => encode_binary(value.into()),
        TensorFormat::Csv => encode_csv(value.into())?.into_bytes(),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_binary(value: TensorRef<'_>) -> Vec<u8> {
    let (kind, dims): (u8, Vec<usize>) = match value {
        TensorRef::Matrix(m) => (KIND_MATRIX, vec![m.n(), m.c()]),
        TensorRef::Stack(s) => (KIND_STACK, vec![s.num_passes(), s.n(), s.c()]),
        TensorRef::Labels(l) => (KIND_LABELS, vec![l.len(), l.num_classes()]),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * dims.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&[kind, 0, 0, 0]);
    for d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    let mut put_matrix = |m: &ProbMatrix| {
        for v in m.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    };
    match value {
        TensorRef::Matrix(m) => put_matrix(m),
        TensorRef::Stack(s) => s.passes().iter().for_each(put_matrix),
        TensorRef::Labels(l) => {
            for label in l.iter() {
                out.extend_from_slice(&(label as u32).to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < HEADER_LEN || bytes[..4] != MAGIC {
        return Err(Error::MalformedHeader("missing UQT1 magic".into()));
    }
    let kind = bytes[4];
    let rank = match kind {
        KIND_MATRIX | KIND_LABELS => 2,
        KIND_STACK => 3,
        other => return Err(Error::MalformedHeader(format!("unknown kind byte {other}"))),
    };
    let dims_end = HEADER_LEN + 8 * rank;
    if bytes.len() < dims_end {
        return Err(Error::MalformedHeader("truncated dimensions".into()));
    }
    let dims: Vec<usize> = bytes[HEADER_LEN..dims_end]
        .chunks_exact(8)
        .map(|b| u64::from_le_bytes(b.try_into().unwrap()) as usize)
        .collect();
    let payload = &bytes[dims_end..];
    let elem = if kind == KIND_LABELS { 4 } else { 8 };
    let count = dims
        .iter()
        .take(if kind == KIND_LABELS { 1 } else { rank })
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::MalformedHeader("dimensions overflow".into()))?;
    if count.checked_mul(elem) != Some(payload.len()) {
        return Err(Error::DimensionMismatch(format!(
            "header {dims:?} implies {count} elements, payload holds {} bytes",
            payload.len()
        )));
    }

    let floats = || -> Result<Vec<f64>> {
        payload
            .chunks_exact(8)
            .enumerate()
            .map(|(i, b)| {
                let v = f64::from_le_bytes(b.try_into().unwrap());
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFiniteValue { position: i })
                }
            })
            .collect()
    };

    match kind {
        KIND_MATRIX => Ok(Tensor::Matrix(ProbMatrix::new(
            dims[0],
            dims[1],
            floats()?,
        )?)),
        KIND_STACK => {
            let (f, n, c) = (dims[0], dims[1], dims[2]);
            if f == 0 {
                return Err(Error::DimensionMismatch("stack with zero passes".into()));
            }
            let values = floats()?;
            let passes = values
                .chunks_exact(n * c)
                .map(|chunk| ProbMatrix::new(n, c, chunk.to_vec()))
                .collect::<Result<Vec<_>>>()?;
            Ok(Tensor::Stack(McdStack::new(passes)?))
        }
        _ => {
            let labels = payload
                .chunks_exact(4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
                .collect();
            Ok(Tensor::Labels(LabelVector::new(labels, dims[1])?))
        }
    }
}

fn encode_csv(value: TensorRef<'_>) -> Result<String> {
    let mut out = String::new();
    match value {
        TensorRef::Matrix(m) => {
            for row in m.rows() {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        TensorRef::Labels(l) => {
            out.push_str(LABEL_HEADER);
            out.push('\n');
            for (z, label) in l.iter().enumerate() {
                out.push_str(&format!("{z},{label}\n"));
            }
        }
        TensorRef::Stack(_) => {
            return Err(Error::InvalidTensor(
                "stacks have no CSV encoding; use the binary format".into(),
            ))
        }
    }
    Ok(out)
}

fn decode_csv(text: &str, num_classes: Option<usize>) -> Result<Tensor> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty());
    let Some((_, first)) = lines.clone().next() else {
        return Err(Error::MalformedHeader("empty CSV file".into()));
    };

    if first.replace(' ', "").eq_ignore_ascii_case(LABEL_HEADER) {
        lines.next();
        let mut labels = Vec::new();
        for (lineno, line) in lines {
            let mut cells = line.split(',').map(str::trim);
            let (Some(index), Some(label), None) = (cells.next(), cells.next(), cells.next())
            else {
                return Err(Error::MalformedHeader(format!(
                    "line {}: expected 'index,label'",
                    lineno + 1
                )));
            };
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|_| {
                    Error::MalformedHeader(format!("line {}: '{s}' is not an index", lineno + 1))
                })
            };
            if parse(index)? != labels.len() {
                return Err(Error::DimensionMismatch(format!(
                    "line {}: index {index} out of sequence",
                    lineno + 1
                )));
            }
            labels.push(parse(label)?);
        }
        let c = num_classes.unwrap_or_else(|| labels.iter().max().map_or(2, |&m| (m + 1).max(2)));
        return Ok(Tensor::Labels(LabelVector::new(labels, c)?));
    }

    let mut values = Vec::new();
    let mut n = 0;
    let mut c = None;
    for (lineno, line) in lines {
        let before = values.len();
        for cell in line.split(',') {
            let v: f64 = cell.trim().parse().map_err(|_| {
                Error::MalformedHeader(format!("line {}: '{}' is not a number", lineno + 1, cell))
            })?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    position: values.len(),
                });
            }
            values.push(v);
        }
        let width = values.len() - before;
        match c {
            None => c = Some(width),
            Some(c) if c != width => {
                return Err(Error::DimensionMismatch(format!(
                    "line {} has {width} columns, expected {c}",
                    lineno + 1
                )))
            }
            _ => {}
        }
        n += 1;
    }
    Ok(Tensor::Matrix(ProbMatrix::new(n, c.unwrap_or(0), values)?))
}
