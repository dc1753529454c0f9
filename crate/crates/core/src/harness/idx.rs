//! Big-endian IDX files: a 4-byte magic (`0x0000_08NN`, unsigned bytes with
//! `NN` dimensions), one 4-byte size per dimension, then the raw payload.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IdxError {
    #[error("bad magic {found:#010x} at offset {offset} (expected {expected:#010x})")]
    BadMagic { found: u32, expected: u32, offset: usize },
    #[error("truncated at offset {offset}: need {needed} bytes, {available} available")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("dimension sizes overflow at offset {offset}")]
    DimensionOverflow { offset: usize },
    #[error("{extra} trailing bytes after payload at offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },
}

/// An unsigned-byte image stack, `n × rows × cols`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub n: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn pixels_per_image(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdxData {
    Images(IdxImages),
    Labels(Vec<u8>),
}

fn read_u32(bytes: &[u8], offset: usize) -> std::result::Result<u32, IdxError> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(IdxError::Truncated {
            offset,
            needed: 4,
            available: bytes.len().saturating_sub(offset),
        })
}

fn parse(bytes: &[u8], expected: u32) -> std::result::Result<(Vec<usize>, &[u8]), IdxError> {
    let magic = read_u32(bytes, 0)?;
    if magic != expected {
        return Err(IdxError::BadMagic {
            found: magic,
            expected,
            offset: 0,
        });
    }
    let ndim = (magic & 0xff) as usize;
    let mut dims = Vec::with_capacity(ndim);
    let mut total: usize = 1;
    for k in 0..ndim {
        let offset = 4 + 4 * k;
        let d = read_u32(bytes, offset)? as usize;
        total = total.checked_mul(d).ok_or(IdxError::DimensionOverflow { offset })?;
        dims.push(d);
    }
    let start = 4 + 4 * ndim;
    let payload = &bytes[start..];
    if payload.len() < total {
        return Err(IdxError::Truncated {
            offset: start,
            needed: total,
            available: payload.len(),
        });
    }
    if payload.len() > total {
        return Err(IdxError::TrailingBytes {
            offset: start + total,
            extra: payload.len() - total,
        });
    }
    Ok((dims, payload))
}

pub fn parse_images(bytes: &[u8]) -> std::result::Result<IdxImages, IdxError> {
    let (dims, payload) = parse(bytes, IMAGES_MAGIC)?;
    Ok(IdxImages {
        n: dims[0],
        rows: dims[1],
        cols: dims[2],
        pixels: payload.to_vec(),
    })
}

pub fn parse_labels(bytes: &[u8]) -> std::result::Result<Vec<u8>, IdxError> {
    let (_, payload) = parse(bytes, LABELS_MAGIC)?;
    Ok(payload.to_vec())
}

/// Dispatches on the magic number.
pub fn parse_idx(bytes: &[u8]) -> std::result::Result<IdxData, IdxError> {
    match read_u32(bytes, 0)? {
        LABELS_MAGIC => parse_labels(bytes).map(IdxData::Labels),
        _ => parse_images(bytes).map(IdxData::Images),
    }
}

pub fn encode_images(images: &IdxImages) -> Vec<u8> {
    assert_eq!(images.pixels.len(), images.n * images.rows * images.cols);
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IMAGES_MAGIC, images.n as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn load_idx(path: impl AsRef<Path>) -> Result<IdxData> {
    Ok(parse_idx(&read(path.as_ref())?)?)
}

pub fn read_images(path: impl AsRef<Path>) -> Result<IdxImages> {
    Ok(parse_images(&read(path.as_ref())?)?)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<u8>> {
    Ok(parse_labels(&read(path.as_ref())?)?)
}

pub fn write_images(path: impl AsRef<Path>, images: &IdxImages) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_images(images)).map_err(|e| Error::io(path, e))
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_labels(labels)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_zero_image() {
        let img = IdxImages {
            n: 1,
            rows: 28,
            cols: 28,
            pixels: vec![0; 784],
        };
        let parsed = parse_images(&encode_images(&img)).unwrap();
        assert_eq!(parsed, img);
        assert_eq!(parsed.pixels_per_image(), 784);
    }

    #[test]
    fn wrong_magic_reports_offset_zero() {
        let mut bytes = encode_labels(&[1, 2, 3]);
        bytes[3] = 0x02;
        let err = parse_images(&bytes).unwrap_err();
        assert_eq!(
            err,
            IdxError::BadMagic {
                found: 0x802,
                expected: IMAGES_MAGIC,
                offset: 0
            }
        );
        assert!(err.to_string().contains("0x00000802"));
        assert!(matches!(parse_idx(&bytes), Err(IdxError::BadMagic { .. })));
    }

    #[test]
    fn truncation_and_trailing() {
        let bytes = encode_labels(&[1, 2, 3]);
        assert_eq!(
            parse_labels(&bytes[..10]).unwrap_err(),
            IdxError::Truncated {
                offset: 8,
                needed: 3,
                available: 2
            }
        );
        assert!(matches!(parse_labels(&bytes[..6]), Err(IdxError::Truncated { offset: 4, .. })));
        let mut long = bytes.clone();
        long.push(9);
        assert_eq!(
            parse_labels(&long).unwrap_err(),
            IdxError::TrailingBytes { offset: 11, extra: 1 }
        );
    }

    #[test]
    fn overflowing_dimensions() {
        let mut bytes = IMAGES_MAGIC.to_be_bytes().to_vec();
        for _ in 0..3 {
            bytes.extend_from_slice(&u32::MAX.to_be_bytes());
        }
        // Only overflows on 32-bit targets' usize; on 64-bit it is a truncation.
        assert!(parse_images(&bytes).is_err());
    }
}
