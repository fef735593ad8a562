//! Model persistence: the `ACCM` binary format.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "ACCM"            4 bytes magic
//! version           u16
//! header length     u32
//! header            JSON (hyperparameters, channel map, model tag, digest)
//! payload           f32 blocks: fwd.W, fwd.U, fwd.b, bwd.W, bwd.U, bwd.b,
//!                   dense_W, dense_b
//! ```
//!
//! The round trip is bitwise exact. The header embeds the channel map so a
//! model built against a different letter ordering refuses to load instead
//! of silently drifting.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Mode;
use crate::encoder::EncodingConfig;
use crate::nn::{LstmDirectionParams, Mat, ModelParams, BLOCK_NAMES};
use crate::textcore::Alphabet;

pub const MAGIC: &[u8; 4] = b"ACCM";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("bad magic bytes (not an ACCM model file)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("payload truncated: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("alphabet mismatch: file channel map {found:?} differs from this build's {expected:?}")]
    AlphabetMismatch { expected: String, found: String },
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Self-description stored alongside the weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelMeta {
    pub model_tag: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest_digest: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    hidden: usize,
    max_len: usize,
    channels: usize,
    dropout_rate: f64,
    model_tag: Mode,
    channel_map: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest_digest: Option<String>,
}

fn expected_channel_map(channels: usize) -> String {
    let full = Alphabet::channel_map();
    full.chars().take(channels).collect()
}

fn payload_len(hidden: usize, channels: usize, max_len: usize) -> usize {
    let per_direction = 4 * hidden * channels + 4 * hidden * hidden + 4 * hidden;
    4 * (2 * per_direction + max_len * 2 * hidden + max_len)
}

/// Serialize params and metadata into a writer.
pub fn write_model(
    params: &ModelParams<f32>,
    meta: &ModelMeta,
    mut w: impl Write,
) -> std::io::Result<()> {
    let header = Header {
        hidden: params.hidden,
        max_len: params.cfg.max_len,
        channels: params.cfg.channels,
        dropout_rate: params.dropout_rate,
        model_tag: meta.model_tag,
        channel_map: expected_channel_map(params.cfg.channels),
        manifest_digest: meta.manifest_digest.clone(),
    };
    let header_json = serde_json::to_vec(&header).expect("header serializes");
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(header_json.len() as u32).to_le_bytes())?;
    w.write_all(&header_json)?;
    for i in 0..BLOCK_NAMES.len() {
        for &v in params.block(i) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Deserialize a model from a reader.
pub fn read_model(mut r: impl Read) -> Result<(ModelParams<f32>, ModelMeta), ModelIoError> {
    let io = |e: std::io::Error| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            ModelIoError::TruncatedPayload { expected: 0, found: 0 }
        } else {
            ModelIoError::Io { path: PathBuf::new(), source: e }
        }
    };
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let mut version = [0u8; 2];
    r.read_exact(&mut version).map_err(io)?;
    let version = u16::from_le_bytes(version);
    if version != FORMAT_VERSION {
        return Err(ModelIoError::UnsupportedVersion(version));
    }
    let mut header_len = [0u8; 4];
    r.read_exact(&mut header_len).map_err(io)?;
    let header_len = u32::from_le_bytes(header_len) as usize;
    let mut header_bytes = vec![0u8; header_len];
    r.read_exact(&mut header_bytes).map_err(io)?;
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| ModelIoError::BadHeader(e.to_string()))?;

    if header.hidden == 0 || header.max_len == 0 {
        return Err(ModelIoError::ShapeMismatch(format!(
            "hidden {} and max_len {} must be positive",
            header.hidden, header.max_len
        )));
    }
    if header.channels != Alphabet::CHANNELS && header.channels != Alphabet::CHANNELS - 1 {
        return Err(ModelIoError::ShapeMismatch(format!(
            "channel count {} is not supported",
            header.channels
        )));
    }
    let expected_map = expected_channel_map(header.channels);
    if header.channel_map != expected_map {
        return Err(ModelIoError::AlphabetMismatch {
            expected: expected_map,
            found: header.channel_map,
        });
    }

    let expected = payload_len(header.hidden, header.channels, header.max_len);
    let mut payload = Vec::new();
    r.read_to_end(&mut payload).map_err(io)?;
    if payload.len() < expected {
        return Err(ModelIoError::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(ModelIoError::ShapeMismatch(format!(
            "payload is {} bytes but the header shapes require exactly {}",
            payload.len(),
            expected
        )));
    }

    let cfg = EncodingConfig {
        max_len: header.max_len,
        channels: header.channels,
    };
    let mut params = ModelParams {
        fwd: LstmDirectionParams::zeros(header.hidden, header.channels),
        bwd: LstmDirectionParams::zeros(header.hidden, header.channels),
        dense_w: Mat::zeros(header.max_len, 2 * header.hidden),
        dense_b: vec![0.0; header.max_len],
        hidden: header.hidden,
        dropout_rate: header.dropout_rate,
        cfg,
    };
    let mut cursor = 0usize;
    for i in 0..BLOCK_NAMES.len() {
        for v in params.block_mut(i) {
            let bytes: [u8; 4] = payload[cursor..cursor + 4].try_into().expect("length checked");
            *v = f32::from_le_bytes(bytes);
            cursor += 4;
        }
    }
    Ok((
        params,
        ModelMeta {
            model_tag: header.model_tag,
            manifest_digest: header.manifest_digest,
        },
    ))
}

/// Save a model file at `path`.
pub fn save(params: &ModelParams<f32>, meta: &ModelMeta, path: &Path) -> Result<(), ModelIoError> {
    let file = File::create(path).map_err(|source| ModelIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    write_model(params, meta, &mut w).map_err(|source| ModelIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    w.flush().map_err(|source| ModelIoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load a model file from `path`.
pub fn load(path: &Path) -> Result<(ModelParams<f32>, ModelMeta), ModelIoError> {
    let file = File::open(path).map_err(|source| ModelIoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_model(BufReader::new(file)).map_err(|e| match e {
        ModelIoError::Io { source, .. } => ModelIoError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}
