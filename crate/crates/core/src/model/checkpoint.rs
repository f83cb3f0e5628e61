//! The `TEEG` checkpoint file: magic, version, a JSON header holding the
//! architecture, training metadata and tensor directory, then raw
//! little-endian payloads in directory order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::network::Model;
use crate::model::spec::ModelSpec;
use crate::nn::{ParamStore, Target};
use crate::tensor::Tensor;

pub const MAGIC: &[u8; 4] = b"TEEG";
pub const FORMAT_VERSION: u32 = 1;
const PREAMBLE: usize = 4 + 4 + 8;

/// Storage precision of the tensor payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F64,
    F32,
}

impl Dtype {
    pub fn size(self) -> usize {
        match self {
            Dtype::F64 => 8,
            Dtype::F32 => 4,
        }
    }
}

impl std::str::FromStr for Dtype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f64" => Ok(Dtype::F64),
            "f32" => Ok(Dtype::F32),
            other => Err(Error::InvalidArgument(format!("unknown dtype {other:?} (f64 or f32)"))),
        }
    }
}

/// How the stored parameters were produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingMeta {
    pub target: Target,
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub lambda: f64,
    pub train_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub meta: TrainingMeta,
    pub dtype: Dtype,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    spec: ModelSpec,
    metadata: TrainingMeta,
    tensors: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    name: String,
    shape: Vec<usize>,
    dtype: Dtype,
    /// Byte offset from the start of the payload section.
    offset: u64,
}

fn bad(detail: impl Into<String>) -> Error {
    Error::format("checkpoint", detail)
}

impl Checkpoint {
    pub fn new(model: Model, meta: TrainingMeta, dtype: Dtype) -> Self {
        Checkpoint { model, meta, dtype }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut offset = 0u64;
        let tensors = self
            .model
            .params
            .iter()
            .map(|p| {
                let entry = Entry {
                    name: p.name.clone(),
                    shape: p.value.shape().to_vec(),
                    dtype: self.dtype,
                    offset,
                };
                offset += (p.value.len() * self.dtype.size()) as u64;
                entry
            })
            .collect();
        let header = Header {
            spec: self.model.spec.clone(),
            metadata: self.meta.clone(),
            tensors,
        };
        let json = serde_json::to_vec(&header).expect("header serializes");

        let mut out = Vec::with_capacity(PREAMBLE + json.len() + offset as usize);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for p in self.model.params.iter() {
            for &v in p.value.data() {
                match self.dtype {
                    Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
                    Dtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < PREAMBLE {
            return Err(bad("truncated preamble"));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("missing TEEG magic"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported format version {version}")));
        }
        let header_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let rest = &bytes[PREAMBLE..];
        let header_len = usize::try_from(header_len)
            .ok()
            .filter(|&n| n <= rest.len())
            .ok_or_else(|| bad("header length exceeds file"))?;
        let header: Header = serde_json::from_slice(&rest[..header_len])
            .map_err(|e| bad(format!("header: {e}")))?;
        let payload = &rest[header_len..];

        let expected = header.spec.param_shapes()?;
        if expected.len() != header.tensors.len() {
            return Err(bad(format!(
                "directory lists {} tensors, architecture needs {}",
                header.tensors.len(),
                expected.len()
            )));
        }
        let dtype = header.tensors.first().map_or(Dtype::F64, |e| e.dtype);
        let mut cursor = 0usize;
        let mut spans = Vec::with_capacity(expected.len());
        for ((name, shape), entry) in expected.iter().zip(&header.tensors) {
            if *name != entry.name || *shape != entry.shape {
                return Err(bad(format!(
                    "tensor {} {:?} does not match architecture entry {name} {shape:?}",
                    entry.name, entry.shape
                )));
            }
            if entry.dtype != dtype {
                return Err(bad("mixed tensor dtypes"));
            }
            if entry.offset != cursor as u64 {
                return Err(bad(format!("tensor {name} at offset {}, expected {cursor}", entry.offset)));
            }
            let len = shape.iter().product::<usize>();
            let end = len
                .checked_mul(dtype.size())
                .and_then(|n| n.checked_add(cursor))
                .filter(|&end| end <= payload.len())
                .ok_or_else(|| bad(format!("payload truncated in tensor {name}")))?;
            spans.push((cursor, end));
            cursor = end;
        }
        if cursor != payload.len() {
            return Err(bad(format!("{} trailing payload bytes", payload.len() - cursor)));
        }

        let mut params = ParamStore::new();
        for ((name, shape), (start, end)) in expected.into_iter().zip(spans) {
            let raw = &payload[start..end];
            let data: Vec<f64> = match dtype {
                Dtype::F64 => raw
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
                Dtype::F32 => raw
                    .chunks_exact(4)
                    .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
                    .collect(),
            };
            params.insert(name, Tensor::new(&shape, data)?)?;
        }
        Ok(Checkpoint {
            model: Model::from_parts(header.spec, params)?,
            meta: header.metadata,
            dtype,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model, Arch};

    fn meta() -> TrainingMeta {
        TrainingMeta {
            target: Target::Cp,
            seed: 3,
            epochs: 0,
            batch_size: 32,
            lr: 0.001,
            lambda: 0.1,
            train_fraction: 32.0 / 38.0,
        }
    }

    fn checkpoint(dtype: Dtype) -> Checkpoint {
        let spec = ModelSpec::default_for(Arch::AlexnetMini).unwrap();
        Checkpoint::new(build_model(spec, 11).unwrap(), meta(), dtype)
    }

    #[test]
    fn round_trip_is_byte_exact() {
        for dtype in [Dtype::F64, Dtype::F32] {
            let bytes = checkpoint(dtype).encode();
            let back = Checkpoint::decode(&bytes).unwrap();
            assert_eq!(back.encode(), bytes);
            assert_eq!(back.meta, meta());
            assert_eq!(back.dtype, dtype);
        }
        let ck = checkpoint(Dtype::F64);
        assert_eq!(Checkpoint::decode(&ck.encode()).unwrap(), ck);
    }

    #[test]
    fn preamble_layout() {
        let bytes = checkpoint(Dtype::F64).encode();
        assert_eq!(&bytes[..4], b"TEEG");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let header: serde_json::Value = serde_json::from_slice(&bytes[16..16 + n]).unwrap();
        assert_eq!(header["tensors"][0]["name"], "conv1.weight");
        assert_eq!(header["tensors"][0]["offset"], 0);
        assert_eq!(header["metadata"]["lr"], 0.001);
    }

    #[test]
    fn rejects_damage() {
        let bytes = checkpoint(Dtype::F32).encode();
        assert!(Checkpoint::decode(&bytes[..bytes.len() - 1]).is_err());
        assert!(Checkpoint::decode(&[bytes.as_slice(), &[0]].concat()).is_err());
        assert!(Checkpoint::decode(&bytes[..10]).is_err());
        let mut wrong = bytes.clone();
        wrong[0] = b'X';
        assert!(Checkpoint::decode(&wrong).is_err());
        let mut version = bytes.clone();
        version[4] = 2;
        assert!(Checkpoint::decode(&version).is_err());
        let mut huge = bytes;
        huge[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(Checkpoint::decode(&huge).is_err());
    }
}
