//! Replica weight files.
//!
//! ```text
//! "CRPW"                      4 bytes
//! format version              u32 LE
//! descriptor length           u32 LE
//! descriptor                  JSON: {"architecture": {...}, "tensors": [{name, rows, cols}, ...]}
//! tensors                     f32 LE, row-major, in descriptor order
//! checksum                    u64 LE, FNV-1a 64 over every preceding byte
//! ```

use std::path::Path;

use cannpi_core::replica::{ReplicaArchitecture, ReplicaWeights, TensorSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CRPW";
pub const WEIGHTS_VERSION: u32 = 1;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Descriptor {
    architecture: ReplicaArchitecture,
    tensors: Vec<TensorSpec>,
}

pub fn encode_weights(w: &ReplicaWeights<f32>) -> Vec<u8> {
    let desc = Descriptor {
        architecture: w.arch().clone(),
        tensors: w.arch().layout(),
    };
    let json = serde_json::to_vec(&desc).expect("descriptor serializes");
    let mut out = Vec::with_capacity(16 + json.len() + 4 * w.params().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for p in w.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    let sum = fnv1a64(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

/// Parses a weight file. The checksum is verified before anything else, so a
/// truncated file reports a checksum failure.
pub fn decode_weights(bytes: &[u8], origin: &Path) -> Result<ReplicaWeights<f32>> {
    if bytes.len() < 8 {
        return Err(Error::Checksum {
            stored: 0,
            computed: fnv1a64(bytes),
        });
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let computed = fnv1a64(body);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }
    if body.len() < 12 || &body[..4] != MAGIC {
        return Err(Error::format(origin, "not a CRPW weight file"));
    }
    let version = u32::from_le_bytes(body[4..8].try_into().unwrap());
    if version != WEIGHTS_VERSION {
        return Err(Error::Version {
            expected: WEIGHTS_VERSION,
            found: version,
        });
    }
    let json_len = u32::from_le_bytes(body[8..12].try_into().unwrap()) as usize;
    let json = body
        .get(12..12 + json_len)
        .ok_or_else(|| Error::format(origin, "descriptor runs past the end of the file"))?;
    let desc: Descriptor =
        serde_json::from_slice(json).map_err(|e| Error::format(origin, format!("descriptor: {e}")))?;
    desc.architecture.validate()?;
    let layout = desc.architecture.layout();
    for (want, got) in layout.iter().zip(&desc.tensors) {
        if want != got {
            return Err(cannpi_core::Error::Shape {
                what: format!("layer {} (declared {} as {}x{})", want.name, got.name, got.rows, got.cols),
                expected: want.len(),
                found: got.len(),
            }
            .into());
        }
    }
    if layout.len() != desc.tensors.len() {
        return Err(cannpi_core::Error::Shape {
            what: "tensor count".into(),
            expected: layout.len(),
            found: desc.tensors.len(),
        }
        .into());
    }
    let blob = &body[12 + json_len..];
    let count = desc.architecture.parameter_count();
    if blob.len() != 4 * count {
        return Err(cannpi_core::Error::Shape {
            what: "parameter blob (f32 values)".into(),
            expected: count,
            found: blob.len() / 4,
        }
        .into());
    }
    let params = blob
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(ReplicaWeights::from_params(desc.architecture, params)?)
}

pub fn save_weights(w: &ReplicaWeights<f32>, path: &Path) -> Result<()> {
    std::fs::write(path, encode_weights(w)).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<ReplicaWeights<f32>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_weights(&bytes, path)
}

/// Loads weights and insists on an architecture, naming the first layer that differs.
pub fn load_weights_as(path: &Path, expected: &ReplicaArchitecture) -> Result<ReplicaWeights<f32>> {
    let w = load_weights(path)?;
    expected.check_matches(w.arch())?;
    Ok(w)
}
