//! Binary PGM (P5) reading and writing.

use std::path::Path;

use crate::error::{HoloError, Result};
use crate::scalar::{lit, Scalar};
use crate::target::TargetImage;

/// How real values are mapped onto 0..=255 when writing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Divide by the grid maximum; an all-zero (or non-positive) grid writes zeros.
    LinearMax,
    /// Clamp to `[0, 1]`.
    ClampUnit,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn err(&self, message: impl Into<String>) -> HoloError {
        HoloError::Parse {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| HoloError::Parse {
                offset: start,
                message: format!("{what} out of range"),
            })
    }
}

/// Parses a binary PGM, scaling samples linearly to `[0, 1]`.
pub fn parse_pgm<T: Scalar>(bytes: &[u8]) -> Result<TargetImage<T>> {
    let mut cur = Cursor { bytes, pos: 0 };
    match bytes.get(..2) {
        Some(b"P5") => {}
        Some([b'P', b'2']) => return Err(cur.err("ASCII PGM (P2) is not supported, expected P5")),
        _ => return Err(cur.err("missing P5 magic number")),
    }
    cur.pos = 2;
    if !bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(cur.err("expected whitespace after magic number"));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(cur.err(format!("empty image {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(cur.err(format!("maxval {maxval} outside 1..=65535")));
    }
    if !bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(cur.err("expected single whitespace before raster"));
    }
    cur.pos += 1;

    let sample_bytes = if maxval < 256 { 1 } else { 2 };
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(sample_bytes))
        .ok_or_else(|| cur.err("image too large"))?;
    let raster = &bytes[cur.pos..];
    if raster.len() < needed {
        return Err(HoloError::Parse {
            offset: bytes.len(),
            message: format!("truncated raster: {} of {needed} bytes", raster.len()),
        });
    }
    let scale = T::one() / lit::<T>(maxval as f64);
    let mag = raster[..needed]
        .chunks_exact(sample_bytes)
        .enumerate()
        .map(|(i, s)| {
            let v = if sample_bytes == 1 {
                s[0] as u32
            } else {
                u16::from_be_bytes([s[0], s[1]]) as u32
            };
            if v > maxval {
                return Err(HoloError::Parse {
                    offset: cur.pos + i * sample_bytes,
                    message: format!("sample {v} exceeds maxval {maxval}"),
                });
            }
            Ok(lit::<T>(v as f64) * scale)
        })
        .collect::<Result<Vec<T>>>()?;
    TargetImage::new(width, height, mag)
}

pub fn load_pgm<T: Scalar>(path: impl AsRef<Path>) -> Result<TargetImage<T>> {
    parse_pgm(&std::fs::read(path)?)
}

/// Encodes `values` (row-major, `width x height`) as an 8-bit P5 image.
pub fn encode_pgm<T: Scalar>(width: usize, height: usize, values: &[T], norm: Normalization) -> Result<Vec<u8>> {
    if values.len() != width * height {
        return Err(HoloError::InvalidParameter(format!(
            "{} values for a {width}x{height} image",
            values.len()
        )));
    }
    let divisor = match norm {
        Normalization::ClampUnit => T::one(),
        Normalization::LinearMax => values.iter().fold(T::zero(), |m, &v| m.max(v)),
    };
    let header = format!("P5\n{width} {height}\n255\n");
    let mut out = Vec::with_capacity(header.len() + values.len());
    out.extend_from_slice(header.as_bytes());
    let full = lit::<T>(255.0);
    for &v in values {
        let unit = if divisor > T::zero() { v / divisor } else { T::zero() };
        let unit = if unit.is_nan() { T::zero() } else { unit.max(T::zero()).min(T::one()) };
        out.push((unit * full).round().to_u8().unwrap_or(0));
    }
    Ok(out)
}

pub fn save_pgm<T: Scalar>(
    path: impl AsRef<Path>,
    width: usize,
    height: usize,
    values: &[T],
    norm: Normalization,
) -> Result<()> {
    std::fs::write(path, encode_pgm(width, height, values, norm)?)?;
    Ok(())
}
