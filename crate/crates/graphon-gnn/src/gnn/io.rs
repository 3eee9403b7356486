//! Parameter persistence.
//!
//! Binary container layout: an 8-byte little-endian header length, a JSON
//! header `{"L", "K", "dims", "activation", "seed"}`, then the tap values
//! as row-major little-endian f64 in `(l, k)` order. Floats round-trip
//! bit-exactly. A CSV export (`layer,tap,row,col,value`) is available for
//! inspection and plotting.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{Activation, ParamTensor};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "K")]
    k: usize,
    dims: Vec<usize>,
    activation: String,
    seed: u64,
}

/// Writes the binary container. `activation` and `seed` record how the
/// parameters were built; they are returned verbatim by [`load_params`].
pub fn save_params(
    path: impl AsRef<Path>,
    params: &ParamTensor,
    activation: Activation,
    seed: u64,
) -> Result<()> {
    let header = Header {
        l: params.layers(),
        k: params.taps_per_layer(),
        dims: params.dims().to_vec(),
        activation: activation.name().to_string(),
        seed,
    };
    let header_bytes = serde_json::to_vec(&header)?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(&(header_bytes.len() as u64).to_le_bytes())?;
    file.write_all(&header_bytes)?;
    let mut buf = Vec::with_capacity(params.param_count() * 8);
    for l in 0..params.layers() {
        for k in 0..params.taps_per_layer() {
            let tap = params.tap(l, k);
            for i in 0..tap.nrows() {
                for j in 0..tap.ncols() {
                    buf.extend_from_slice(&tap[(i, j)].to_le_bytes());
                }
            }
        }
    }
    file.write_all(&buf)?;
    Ok(())
}

/// Reads a container written by [`save_params`].
pub fn load_params(path: impl AsRef<Path>) -> Result<(ParamTensor, Activation, u64)> {
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
        .map_err(|e| Error::config(format!("bad parameter header: {e}")))?;
    if header.dims.len() != header.l + 1 {
        return Err(Error::config(format!(
            "header says L = {} but dims has {} entries",
            header.l,
            header.dims.len()
        )));
    }
    let activation = Activation::from_name(&header.activation)?;
    let mut params = ParamTensor::zeros(&header.dims, header.k)?;
    let mut value_bytes = Vec::new();
    file.read_to_end(&mut value_bytes)?;
    if value_bytes.len() != params.param_count() * 8 {
        return Err(Error::config(format!(
            "expected {} tap bytes, found {}",
            params.param_count() * 8,
            value_bytes.len()
        )));
    }
    let mut offset = 0;
    for l in 0..params.layers() {
        for k in 0..params.taps_per_layer() {
            let (rows, cols) = params.tap(l, k).shape();
            for i in 0..rows {
                for j in 0..cols {
                    let mut chunk = [0u8; 8];
                    chunk.copy_from_slice(&value_bytes[offset..offset + 8]);
                    params.tap_mut(l, k)[(i, j)] = f64::from_le_bytes(chunk);
                    offset += 8;
                }
            }
        }
    }
    Ok((params, activation, header.seed))
}

fn truncated(path: &Path) -> Error {
    Error::config(format!("truncated parameter file {}", path.display()))
}

/// CSV export: one row per tap value, `layer,tap,row,col,value`.
pub fn params_to_csv(params: &ParamTensor, writer: &mut impl Write) -> Result<()> {
    writeln!(writer, "layer,tap,row,col,value")?;
    for l in 0..params.layers() {
        for k in 0..params.taps_per_layer() {
            let tap = params.tap(l, k);
            for i in 0..tap.nrows() {
                for j in 0..tap.ncols() {
                    writeln!(writer, "{l},{k},{i},{j},{}", tap[(i, j)])?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.bin");
        let params = ParamTensor::random_init(&[2, 5, 3], 4, 99).unwrap();
        save_params(&path, &params, Activation::Tanh, 99).unwrap();
        let (loaded, act, seed) = load_params(&path).unwrap();
        assert_eq!(act, Activation::Tanh);
        assert_eq!(seed, 99);
        assert_eq!(params.dims(), loaded.dims());
        for (a, b) in params.iter_values().zip(loaded.iter_values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_truncated_and_corrupt_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("params.bin");
        let params = ParamTensor::random_init(&[1, 2, 1], 2, 1).unwrap();
        save_params(&path, &params, Activation::Identity, 1).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
        assert!(load_params(&path).is_err());
        std::fs::write(&path, &bytes[..4]).unwrap();
        assert!(load_params(&path).is_err());
    }

    #[test]
    fn csv_export_lists_every_value() {
        let params = ParamTensor::random_init(&[1, 2], 3, 5).unwrap();
        let mut out = Vec::new();
        params_to_csv(&params, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "layer,tap,row,col,value");
        assert_eq!(lines.len(), 1 + params.param_count());
        assert!(lines[1].starts_with("0,0,0,0,"));
    }
}
