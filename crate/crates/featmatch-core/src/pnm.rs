//! Binary PGM (P5) and PPM (P6) reading and writing.
//!
//! The writer emits one canonical header layout (`P5\n<w> <h>\n255\n` plus
//! raster bytes), so write → read → write round-trips are byte-identical.
//! The reader accepts the full header grammar: `#` comments and arbitrary
//! whitespace between tokens. Only 8-bit rasters (maxval ≤ 255) are accepted.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage, SkinMask};

/// A decoded PNM file: P5 becomes grayscale, P6 becomes RGB.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PnmImage {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl PnmImage {
    pub fn dimensions(&self) -> (u32, u32) {
        match self {
            PnmImage::Gray(g) => g.dimensions(),
            PnmImage::Rgb(c) => c.dimensions(),
        }
    }

    /// Grayscale view, converting RGB via BT.601 luma when needed.
    pub fn to_gray(&self) -> GrayImage {
        match self {
            PnmImage::Gray(g) => g.clone(),
            PnmImage::Rgb(c) => crate::image::rgb_to_gray(c),
        }
    }

    /// RGB view, expanding grayscale to equal channels when needed.
    pub fn to_rgb(&self) -> RgbImage {
        match self {
            PnmImage::Gray(g) => RgbImage::from_gray(g),
            PnmImage::Rgb(c) => c.clone(),
        }
    }
}

struct HeaderParser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderParser<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn skip_whitespace_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<&'a [u8]> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse("unexpected end of PNM header".into()));
        }
        Ok(&self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self.token()?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| {
                Error::Parse(format!(
                    "invalid PNM {what}: {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

/// Decode a binary PGM or PPM from memory.
pub fn parse_pnm(bytes: &[u8]) -> Result<PnmImage> {
    let mut p = HeaderParser::new(bytes);
    let magic = p.token()?;
    let channels = match magic {
        b"P5" => 1usize,
        b"P6" => 3usize,
        other => {
            return Err(Error::Parse(format!(
                "unsupported PNM magic {:?} (only binary P5/P6)",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = p.number("width")?;
    let height = p.number("height")?;
    let maxval = p.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Parse(format!(
            "unsupported PNM maxval {maxval} (must be 1..=255)"
        )));
    }
    // exactly one whitespace byte separates the header from the raster
    if p.pos >= bytes.len() || !bytes[p.pos].is_ascii_whitespace() {
        return Err(Error::Parse("missing whitespace before PNM raster".into()));
    }
    let raster_start = p.pos + 1;
    let expected = width as usize * height as usize * channels;
    let raster = bytes
        .get(raster_start..raster_start + expected)
        .ok_or_else(|| {
            Error::Parse(format!(
                "PNM raster truncated: expected {expected} bytes, found {}",
                bytes.len().saturating_sub(raster_start)
            ))
        })?;
    match channels {
        1 => Ok(PnmImage::Gray(GrayImage::from_raw(
            width,
            height,
            raster.to_vec(),
        )?)),
        _ => Ok(PnmImage::Rgb(RgbImage::from_raw(
            width,
            height,
            raster.to_vec(),
        )?)),
    }
}

/// Canonical binary PGM encoding.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

/// Canonical binary PPM encoding.
pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

pub fn read_pnm(path: impl AsRef<Path>) -> Result<PnmImage> {
    parse_pnm(&fs::read(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    Ok(fs::write(path, encode_pgm(img))?)
}

pub fn write_ppm(path: impl AsRef<Path>, img: &RgbImage) -> Result<()> {
    Ok(fs::write(path, encode_ppm(img))?)
}

/// Masks serialize as PGM with 0/255 values.
pub fn write_mask_pgm(path: impl AsRef<Path>, mask: &SkinMask) -> Result<()> {
    write_pgm(path, &mask.to_gray())
}
