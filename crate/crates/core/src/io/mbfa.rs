//! MBFA activation dump.
//!
//! ```text
//! "MBFA" | version u16 | record_count u32 | layer_count u16 | layer_count × u32 length
//! record: sample_id u64 | group u8 | attack_id u8 | true_class u16 | Σ lengths × f32
//! ```
//!
//! Everything is little-endian. Records have a fixed stride, so record `i`
//! starts at `header_len + i * stride`. Payloads are stored as f32: values
//! written from f64 are rounded, and values already representable in f32
//! round-trip exactly.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::record::{ActivationRecord, AttackId, Group};

pub const MAGIC: [u8; 4] = *b"MBFA";
pub const VERSION: u16 = 1;
const RECORD_HEADER: usize = 8 + 1 + 1 + 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MbfaError {
    #[error("bad magic {found:?} at offset 0")]
    BadMagic { found: Vec<u8> },
    #[error("unsupported MBFA version {version} at offset 4")]
    UnsupportedVersion { version: u16 },
    #[error("truncated header: needed {needed} bytes at offset {offset}, file has {len}")]
    TruncatedHeader { offset: usize, needed: usize, len: usize },
    #[error("truncated payload in record {record} at offset {offset}: needed {needed} bytes, {available} available")]
    Truncated { record: usize, offset: usize, needed: usize, available: usize },
    #[error("layer-length mismatch in record {record}, layer {layer}: header says {expected}, found {found}")]
    LayerLengthMismatch { record: usize, layer: usize, expected: usize, found: usize },
    #[error("layer-length mismatch at offset {offset}: layer table declares {declared} entries per record, payload holds {found}")]
    LayerTableMismatch { offset: usize, declared: usize, found: usize },
    #[error("layer-count mismatch in record {record}: header says {expected}, found {found}")]
    LayerCountMismatch { record: usize, expected: usize, found: usize },
    #[error("invalid {field} in record {record} at offset {offset}: {detail}")]
    InvalidField { record: usize, field: &'static str, offset: usize, detail: String },
    #[error("invalid layer table at offset {offset}: {detail}")]
    InvalidLayerTable { offset: usize, detail: String },
    #[error("{extra} trailing bytes after the last record at offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("value {value} in record {record}, layer {layer}, entry {index} does not fit in f32")]
    Unrepresentable { record: usize, layer: usize, index: usize, value: f64 },
    #[error("too many {what}: {count}")]
    TooLarge { what: &'static str, count: usize },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl MbfaError {
    pub fn kind(&self) -> &'static str {
        match self {
            MbfaError::BadMagic { .. } => "bad_magic",
            MbfaError::UnsupportedVersion { .. } => "unsupported_version",
            MbfaError::TruncatedHeader { .. } => "truncated_header",
            MbfaError::Truncated { .. } => "truncated",
            MbfaError::LayerLengthMismatch { .. } => "layer_length_mismatch",
            MbfaError::LayerTableMismatch { .. } => "layer_table_mismatch",
            MbfaError::LayerCountMismatch { .. } => "layer_count_mismatch",
            MbfaError::InvalidField { .. } => "invalid_field",
            MbfaError::InvalidLayerTable { .. } => "invalid_layer_table",
            MbfaError::TrailingBytes { .. } => "trailing_bytes",
            MbfaError::Unrepresentable { .. } => "unrepresentable",
            MbfaError::TooLarge { .. } => "too_large",
            MbfaError::Io { .. } => "io",
        }
    }
}

fn header_len(layers: usize) -> usize {
    4 + 2 + 4 + 2 + 4 * layers
}

/// Serializes `records`, which must share one layer table. An empty slice
/// gives a valid zero-record file with an empty layer table.
pub fn encode_mbfa(records: &[ActivationRecord]) -> Result<Vec<u8>, MbfaError> {
    let table: Vec<usize> = records.first().map(|r| r.layer_lengths()).unwrap_or_default();
    encode_with_table(records, &table)
}

/// As [`encode_mbfa`] with an explicit layer table.
pub fn encode_with_table(records: &[ActivationRecord], table: &[usize]) -> Result<Vec<u8>, MbfaError> {
    let record_count = u32::try_from(records.len()).map_err(|_| MbfaError::TooLarge { what: "records", count: records.len() })?;
    let layer_count = u16::try_from(table.len()).map_err(|_| MbfaError::TooLarge { what: "layers", count: table.len() })?;
    let payload: usize = table.iter().sum();
    let mut out = Vec::with_capacity(header_len(table.len()) + records.len() * (RECORD_HEADER + 4 * payload));
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&record_count.to_le_bytes());
    out.extend_from_slice(&layer_count.to_le_bytes());
    for &len in table {
        let len32 = u32::try_from(len).map_err(|_| MbfaError::TooLarge { what: "layer entries", count: len })?;
        if len == 0 {
            return Err(MbfaError::InvalidLayerTable { offset: 0, detail: "zero-length layer".into() });
        }
        out.extend_from_slice(&len32.to_le_bytes());
    }
    for (ri, r) in records.iter().enumerate() {
        if r.layers.len() != table.len() {
            return Err(MbfaError::LayerCountMismatch { record: ri, expected: table.len(), found: r.layers.len() });
        }
        if (r.group == Group::Adversarial) != (r.attack != AttackId::None) {
            return Err(MbfaError::InvalidField {
                record: ri,
                field: "group",
                offset: out.len(),
                detail: format!("group {} inconsistent with attack {}", r.group, r.attack),
            });
        }
        out.extend_from_slice(&r.sample_id.to_le_bytes());
        out.push(r.group.code());
        out.push(r.attack.code());
        out.extend_from_slice(&r.true_class.to_le_bytes());
        for (li, (layer, &len)) in r.layers.iter().zip(table).enumerate() {
            if layer.len() != len {
                return Err(MbfaError::LayerLengthMismatch { record: ri, layer: li, expected: len, found: layer.len() });
            }
            for (i, &v) in layer.iter().enumerate() {
                let f = v as f32;
                if f.is_infinite() && v.is_finite() {
                    return Err(MbfaError::Unrepresentable { record: ri, layer: li, index: i, value: v });
                }
                out.extend_from_slice(&f.to_le_bytes());
            }
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        let s = self.bytes.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(s)
    }

    fn header<const N: usize>(&mut self) -> Result<[u8; N], MbfaError> {
        let (offset, len) = (self.pos, self.bytes.len());
        self.take(N)
            .map(|s| s.try_into().expect("length checked"))
            .ok_or(MbfaError::TruncatedHeader { offset, needed: N, len })
    }
}

/// Parses a complete MBFA file, returning the records and the layer table.
pub fn decode_with_table(bytes: &[u8]) -> Result<(Vec<ActivationRecord>, Vec<usize>), MbfaError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(MbfaError::BadMagic { found: bytes.iter().take(4).copied().collect() });
    }
    cur.pos = 4;
    let version = u16::from_le_bytes(cur.header()?);
    if version != VERSION {
        return Err(MbfaError::UnsupportedVersion { version });
    }
    let count = u32::from_le_bytes(cur.header()?) as usize;
    let layer_count = u16::from_le_bytes(cur.header()?) as usize;
    let mut table = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let offset = cur.pos;
        let len = u32::from_le_bytes(cur.header()?) as usize;
        if len == 0 {
            return Err(MbfaError::InvalidLayerTable { offset, detail: "zero-length layer".into() });
        }
        table.push(len);
    }
    if count > 0 && layer_count == 0 {
        return Err(MbfaError::InvalidLayerTable { offset: 10, detail: "records present but no layers declared".into() });
    }
    let stride = table
        .iter()
        .try_fold(RECORD_HEADER, |acc, &l| l.checked_mul(4).and_then(|b| b.checked_add(acc)))
        .ok_or(MbfaError::TooLarge { what: "record bytes", count: usize::MAX })?;
    // A body that splits into `count` equal records of a different whole
    // number of floats means the layer table disagrees with the payload;
    // anything else short is a truncation.
    let body = bytes.len() - cur.pos;
    if count > 0 && body != count * stride && body.is_multiple_of(count) {
        let per = body / count;
        if per >= RECORD_HEADER && (per - RECORD_HEADER).is_multiple_of(4) {
            return Err(MbfaError::LayerTableMismatch {
                offset: 12,
                declared: (stride - RECORD_HEADER) / 4,
                found: (per - RECORD_HEADER) / 4,
            });
        }
    }
    let mut records = Vec::with_capacity(count.min(bytes.len() / stride.max(1) + 1));
    for ri in 0..count {
        let start = cur.pos;
        let available = bytes.len() - start;
        if available < stride {
            return Err(MbfaError::Truncated { record: ri, offset: start, needed: stride, available });
        }
        let raw = cur.take(stride).expect("length checked");
        let sample_id = u64::from_le_bytes(raw[0..8].try_into().expect("8 bytes"));
        let group = Group::from_code(raw[8]).ok_or_else(|| MbfaError::InvalidField {
            record: ri,
            field: "group",
            offset: start + 8,
            detail: format!("unknown code {}", raw[8]),
        })?;
        let attack = AttackId::from_code(raw[9]).ok_or_else(|| MbfaError::InvalidField {
            record: ri,
            field: "attack_id",
            offset: start + 9,
            detail: format!("unknown code {}", raw[9]),
        })?;
        if (group == Group::Adversarial) != (attack != AttackId::None) {
            return Err(MbfaError::InvalidField {
                record: ri,
                field: "group",
                offset: start + 8,
                detail: format!("group {group} inconsistent with attack {attack}"),
            });
        }
        let true_class = u16::from_le_bytes(raw[10..12].try_into().expect("2 bytes"));
        let mut floats = raw[RECORD_HEADER..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64);
        let layers = table.iter().map(|&len| floats.by_ref().take(len).collect()).collect();
        records.push(ActivationRecord { sample_id, group, attack, true_class, layers });
    }
    if cur.pos != bytes.len() {
        return Err(MbfaError::TrailingBytes { offset: cur.pos, extra: bytes.len() - cur.pos });
    }
    Ok((records, table))
}

pub fn decode_mbfa(bytes: &[u8]) -> Result<Vec<ActivationRecord>, MbfaError> {
    decode_with_table(bytes).map(|(r, _)| r)
}

fn io_err(path: &Path, e: std::io::Error) -> MbfaError {
    MbfaError::Io { path: path.display().to_string(), message: e.to_string() }
}

pub fn read_mbfa_file(path: &Path) -> Result<Vec<ActivationRecord>, MbfaError> {
    decode_mbfa(&fs::read(path).map_err(|e| io_err(path, e))?)
}

pub fn write_mbfa_file(path: &Path, records: &[ActivationRecord]) -> Result<(), MbfaError> {
    fs::write(path, encode_mbfa(records)?).map_err(|e| io_err(path, e))
}
