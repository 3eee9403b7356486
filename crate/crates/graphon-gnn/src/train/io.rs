//! Dataset persistence.
//!
//! Same container style as parameter files: an 8-byte little-endian
//! header length, a JSON header `{"num_samples", "f_in", "f_out",
//! "sizes"}`, then per sample its GSO, input, and target as row-major
//! little-endian f64. Every sample must carry its own GSO, which is how
//! generated datasets (teacher-student, flocking) are built. Floats
//! round-trip bit-exactly.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::train::{Dataset, Sample};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    num_samples: usize,
    f_in: usize,
    f_out: usize,
    /// Graph size of each sample, in order.
    sizes: Vec<usize>,
}

fn push_matrix(buf: &mut Vec<u8>, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            buf.extend_from_slice(&m[(i, j)].to_le_bytes());
        }
    }
}

fn read_matrix(bytes: &[u8], offset: &mut usize, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let mut chunk = [0u8; 8];
            chunk.copy_from_slice(&bytes[*offset..*offset + 8]);
            m[(i, j)] = f64::from_le_bytes(chunk);
            *offset += 8;
        }
    }
    m
}

/// Writes the binary container. Errors if any sample lacks a GSO.
pub fn save_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let mut sizes = Vec::with_capacity(dataset.len());
    for (idx, sample) in dataset.samples().iter().enumerate() {
        if sample.gso.is_none() {
            return Err(Error::config(format!(
                "sample {idx} has no GSO; only per-sample-GSO datasets can be saved"
            )));
        }
        sizes.push(sample.x.nrows());
    }
    let header =
        Header { num_samples: dataset.len(), f_in: dataset.f_in(), f_out: dataset.f_out(), sizes };
    let header_bytes = serde_json::to_vec(&header)?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(&(header_bytes.len() as u64).to_le_bytes())?;
    file.write_all(&header_bytes)?;
    let mut buf = Vec::new();
    for sample in dataset.samples() {
        push_matrix(&mut buf, sample.gso.as_ref().expect("checked above"));
        push_matrix(&mut buf, &sample.x);
        push_matrix(&mut buf, &sample.y);
    }
    file.write_all(&buf)?;
    Ok(())
}

/// Reads a container written by [`save_dataset`].
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let mut file = std::fs::File::open(path.as_ref())?;
    let mut len_bytes = [0u8; 8];
    file.read_exact(&mut len_bytes).map_err(|_| truncated(path.as_ref()))?;
    let header_len = u64::from_le_bytes(len_bytes) as usize;
    if header_len > 1 << 20 {
        return Err(Error::config(format!(
            "implausible header length {header_len} in {}",
            path.as_ref().display()
        )));
    }
    let mut header_bytes = vec![0u8; header_len];
    file.read_exact(&mut header_bytes).map_err(|_| truncated(path.as_ref()))?;
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| Error::config(format!("bad dataset header: {e}")))?;
    if header.sizes.len() != header.num_samples {
        return Err(Error::config(format!(
            "header says {} samples but lists {} sizes",
            header.num_samples,
            header.sizes.len()
        )));
    }
    let mut value_bytes = Vec::new();
    file.read_to_end(&mut value_bytes)?;
    let expected: usize =
        header.sizes.iter().map(|&n| (n * n + n * header.f_in + n * header.f_out) * 8).sum();
    if value_bytes.len() != expected {
        return Err(Error::config(format!(
            "expected {expected} data bytes, found {}",
            value_bytes.len()
        )));
    }
    let mut offset = 0;
    let mut samples = Vec::with_capacity(header.num_samples);
    for &n in &header.sizes {
        let gso = read_matrix(&value_bytes, &mut offset, n, n);
        let x = read_matrix(&value_bytes, &mut offset, n, header.f_in);
        let y = read_matrix(&value_bytes, &mut offset, n, header.f_out);
        samples.push(Sample { gso: Some(gso), x, y });
    }
    Dataset::new(samples)
}

fn truncated(path: &Path) -> Error {
    Error::config(format!("truncated dataset file {}", path.display()))
}
