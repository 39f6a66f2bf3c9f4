//! Binary model container.
//!
//! Layout, all little-endian: magic `LSAE`, u32 format version, topology
//! block (input_dim, encoder layer count, widths), normalization block
//! (per-channel mean then std), every parameter vector in canonical order,
//! and a trailing FNV-1a checksum of all preceding bytes. Decoding verifies
//! magic, then version, then checksum, then shapes; a truncated or corrupted
//! file fails the checksum before any parameter is interpreted.

use super::cell::LstmLayerParams;
use super::{AutoencoderModel, Normalization, Topology};
use crate::checksum64;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub const MODEL_MAGIC: [u8; 4] = *b"LSAE";
pub const MODEL_FORMAT_VERSION: u32 = 1;

// guards against absurd allocations from a damaged topology block
const MAX_DIM: u32 = 65536;
const MAX_LAYERS: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelCodecError {
    BadMagic,
    UnsupportedVersion { got: u32 },
    ChecksumMismatch,
    Truncated,
    Malformed(&'static str),
}

impl fmt::Display for ModelCodecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelCodecError::BadMagic => f.write_str("not a model file (bad magic)"),
            ModelCodecError::UnsupportedVersion { got } => {
                write!(f, "unsupported model format version {}", got)
            }
            ModelCodecError::ChecksumMismatch => {
                f.write_str("model file failed checksum verification (truncated or corrupted)")
            }
            ModelCodecError::Truncated => f.write_str("model file too short"),
            ModelCodecError::Malformed(what) => write!(f, "malformed model file: {}", what),
        }
    }
}

pub fn encode_model(model: &AutoencoderModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(model.param_count() * 8 + 64);
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.topology.input_dim as u32).to_le_bytes());
    out.extend_from_slice(&(model.topology.encoder_hidden.len() as u32).to_le_bytes());
    for &w in &model.topology.encoder_hidden {
        out.extend_from_slice(&(w as u32).to_le_bytes());
    }
    for &m in &model.norm.mean {
        out.extend_from_slice(&m.to_le_bytes());
    }
    for &s in &model.norm.std {
        out.extend_from_slice(&s.to_le_bytes());
    }
    model.for_each_param(|p| {
        for &v in p {
            out.extend_from_slice(&v.to_le_bytes());
        }
    });
    let sum = checksum64(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelCodecError> {
        if self.at + n > self.bytes.len() {
            return Err(ModelCodecError::Truncated);
        }
        let slice = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(slice)
    }

    fn u32_le(&mut self) -> Result<u32, ModelCodecError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f64_le(&mut self) -> Result<f64, ModelCodecError> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]))
    }
}

fn zeroed(topology: Topology) -> AutoencoderModel {
    let mut encoder = Vec::new();
    let mut width = topology.input_dim;
    for &h in &topology.encoder_hidden {
        encoder.push(LstmLayerParams::zeros(width, h));
        width = h;
    }
    let mut decoder = Vec::new();
    let mut width = topology.latent_dim();
    for &h in topology.decoder_hidden().iter() {
        decoder.push(LstmLayerParams::zeros(width, h));
        width = h;
    }
    AutoencoderModel {
        norm: Normalization::identity(topology.input_dim),
        proj_w: vec![0.0; topology.input_dim * width],
        proj_b: vec![0.0; topology.input_dim],
        topology,
        encoder,
        decoder,
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<AutoencoderModel, ModelCodecError> {
    if bytes.len() < MODEL_MAGIC.len() + 4 + 8 {
        return Err(ModelCodecError::Truncated);
    }
    if bytes[..4] != MODEL_MAGIC {
        return Err(ModelCodecError::BadMagic);
    }
    let version = u32::from_le_bytes([bytes[4], bytes[5], bytes[6], bytes[7]]);
    if version != MODEL_FORMAT_VERSION {
        return Err(ModelCodecError::UnsupportedVersion { got: version });
    }
    let body = &bytes[..bytes.len() - 8];
    let tail = &bytes[bytes.len() - 8..];
    let stored = u64::from_le_bytes([
        tail[0], tail[1], tail[2], tail[3], tail[4], tail[5], tail[6], tail[7],
    ]);
    if checksum64(body) != stored {
        return Err(ModelCodecError::ChecksumMismatch);
    }

    let mut r = Reader { bytes: body, at: 8 };
    let input_dim = r.u32_le()?;
    if input_dim == 0 || input_dim > MAX_DIM {
        return Err(ModelCodecError::Malformed("input_dim out of range"));
    }
    let n_layers = r.u32_le()?;
    if n_layers == 0 || n_layers > MAX_LAYERS {
        return Err(ModelCodecError::Malformed("encoder layer count out of range"));
    }
    let mut widths = Vec::with_capacity(n_layers as usize);
    for _ in 0..n_layers {
        let w = r.u32_le()?;
        if w == 0 || w > MAX_DIM {
            return Err(ModelCodecError::Malformed("layer width out of range"));
        }
        widths.push(w as usize);
    }
    let topology = Topology { input_dim: input_dim as usize, encoder_hidden: widths };

    let mut mean = Vec::with_capacity(topology.input_dim);
    for _ in 0..topology.input_dim {
        mean.push(r.f64_le()?);
    }
    let mut std = Vec::with_capacity(topology.input_dim);
    for _ in 0..topology.input_dim {
        let s = r.f64_le()?;
        if !(s > 0.0) || !s.is_finite() {
            return Err(ModelCodecError::Malformed("normalization std must be positive"));
        }
        std.push(s);
    }

    let count = topology.param_count();
    let mut flat = Vec::with_capacity(count);
    for _ in 0..count {
        flat.push(r.f64_le()?);
    }
    if r.at != body.len() {
        return Err(ModelCodecError::Malformed("trailing bytes after parameters"));
    }

    let mut model = zeroed(topology);
    model.norm = Normalization { mean, std };
    model.unflatten(&flat);
    Ok(model)
}
