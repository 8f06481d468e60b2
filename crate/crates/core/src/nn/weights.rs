//! RNMW weight files: `"RNMW"`, version (u16 LE), layer count (u32 LE), then
//! per layer the name (u16 LE length + UTF-8), rank (u8), dims (u32 LE
//! each) and the values as f32 LE.

use super::model::{Architecture, ModelParams};
use super::tensor::Tensor;
use super::NnError;

pub const WEIGHTS_MAGIC: &[u8; 4] = b"RNMW";
pub const WEIGHTS_VERSION: u16 = 1;

pub fn save_weights(params: &ModelParams<f32>) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + params.parameter_count() * 4);
    out.extend_from_slice(WEIGHTS_MAGIC);
    out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
    out.extend_from_slice(&(params.tensors().len() as u32).to_le_bytes());
    for (name, tensor) in params.tensors() {
        out.extend_from_slice(&(name.len() as u16).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(tensor.shape().len() as u8);
        for &d in tensor.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in tensor.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        let end = self.pos.checked_add(n).ok_or(NnError::TruncatedWeights)?;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or(NnError::TruncatedWeights)?;
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, NnError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, NnError> {
        Ok(u16::from_le_bytes(
            self.take(2)?.try_into().expect("two bytes"),
        ))
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("four bytes"),
        ))
    }
}

/// Parses an RNMW file and checks it against the RouterNet-μ architecture.
pub fn load_weights(bytes: &[u8]) -> Result<ModelParams<f32>, NnError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4).map_err(|_| NnError::BadMagic)? != WEIGHTS_MAGIC {
        return Err(NnError::BadMagic);
    }
    let version = r.u16()?;
    if version != WEIGHTS_VERSION {
        return Err(NnError::VersionUnsupported(version));
    }
    let count = r.u32()? as usize;
    let mut tensors = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let name_len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| NnError::MalformedWeights("layer name is not UTF-8".into()))?
            .to_string();
        let rank = r.u8()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u32()? as usize);
        }
        let n = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| {
                NnError::MalformedWeights(format!("{name}: shape {shape:?} overflows"))
            })?;
        let data = r
            .take(n)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("four bytes")))
            .collect();
        tensors.push((name, Tensor::from_vec(&shape, data)));
    }
    if r.pos != bytes.len() {
        return Err(NnError::MalformedWeights(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    ModelParams::from_named(Architecture::ROUTERNET_MU, tensors)
}
