//! Raster containers, color conversion, skin segmentation, and smoothing.
//!
//! All containers are 8-bit with row-major storage and an `(x = column,
//! y = row)` coordinate convention, origin at the top-left. Operations here
//! are pure functions over immutable inputs.

use crate::error::{Error, Result};

/// Dense 8-bit luminance raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    /// Zero-filled image. Dimensions must be positive.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        Self::from_raw(width, height, vec![0; width as usize * height as usize])
    }

    pub fn from_raw(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if pixels.len() != width as usize * height as usize {
            return Err(Error::BufferSize {
                width,
                height,
                channels: 1,
                got: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::from_raw(width, height, pixels)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Panics if `(x, y)` is out of bounds.
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y as usize * self.width as usize + x as usize] = value;
    }

    /// Sample with replicate-border extension: coordinates are clamped to the
    /// valid range, so any `(i64, i64)` point is readable.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> u8 {
        let cx = x.clamp(0, self.width as i64 - 1) as u32;
        let cy = y.clamp(0, self.height as i64 - 1) as u32;
        self.get(cx, cy)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.pixels
    }
}

/// Dense 8-bit RGB raster, interleaved row-major triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        Self::from_raw(width, height, vec![0; width as usize * height as usize * 3])
    }

    pub fn from_raw(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if pixels.len() != width as usize * height as usize * 3 {
            return Err(Error::BufferSize {
                width,
                height,
                channels: 3,
                got: pixels.len(),
            });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [u8; 3]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width as usize * height as usize * 3);
        for y in 0..height {
            for x in 0..width {
                pixels.extend_from_slice(&f(x, y));
            }
        }
        Self::from_raw(width, height, pixels)
    }

    /// Expand a grayscale image to RGB with equal channels.
    pub fn from_gray(img: &GrayImage) -> Self {
        Self::from_fn(img.width(), img.height(), |x, y| {
            let v = img.get(x, y);
            [v, v, v]
        })
        .expect("source image has valid dimensions")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    /// Panics if `(x, y)` is out of bounds.
    #[inline]
    pub fn get(&self, x: u32, y: u32) -> [u8; 3] {
        debug_assert!(x < self.width && y < self.height);
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        debug_assert!(x < self.width && y < self.height);
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.pixels[i..i + 3].copy_from_slice(&rgb);
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.pixels
    }
}

/// Boolean foreground mask with the same dimensions as its source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkinMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl SkinMask {
    pub fn from_raw(width: u32, height: u32, bits: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyImage { width, height });
        }
        if bits.len() != width as usize * height as usize {
            return Err(Error::BufferSize {
                width,
                height,
                channels: 1,
                got: bits.len(),
            });
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        debug_assert!(x < self.width && y < self.height);
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Fraction of foreground pixels in [0, 1].
    pub fn foreground_fraction(&self) -> f64 {
        self.count_true() as f64 / self.bits.len() as f64
    }

    /// 0/255 grayscale rendering, the on-disk mask representation.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_raw(
            self.width,
            self.height,
            self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        )
        .expect("mask has valid dimensions")
    }

    /// Nonzero pixels become foreground.
    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            bits: img.as_raw().iter().map(|&v| v != 0).collect(),
        }
    }
}

/// Inclusive chroma bounds delimiting the skin box in YCbCr space.
///
/// The defaults Cb ∈ [77, 127], Cr ∈ [133, 173] are a widely used skin-chroma
/// box; both ranges are fully configurable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkinThresholds {
    pub cb_min: u8,
    pub cb_max: u8,
    pub cr_min: u8,
    pub cr_max: u8,
}

impl Default for SkinThresholds {
    fn default() -> Self {
        Self {
            cb_min: 77,
            cb_max: 127,
            cr_min: 133,
            cr_max: 173,
        }
    }
}

impl SkinThresholds {
    pub fn new(cb_min: u8, cb_max: u8, cr_min: u8, cr_max: u8) -> Result<Self> {
        if cb_min > cb_max || cr_min > cr_max {
            return Err(Error::InvalidConfig(format!(
                "skin thresholds must satisfy cb_min <= cb_max and cr_min <= cr_max, \
                 got cb [{cb_min}, {cb_max}], cr [{cr_min}, {cr_max}]"
            )));
        }
        Ok(Self { cb_min, cb_max, cr_min, cr_max })
    }

    #[inline]
    pub fn contains(&self, cb: u8, cr: u8) -> bool {
        self.cb_min <= cb && cb <= self.cb_max && self.cr_min <= cr && cr <= self.cr_max
    }
}

#[inline]
fn round_clamp_u8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// BT.601 full-range luma: round(0.299 R + 0.587 G + 0.114 B).
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    round_clamp_u8(0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
}

/// Per-pixel BT.601 luma conversion; dimensions preserved.
pub fn rgb_to_gray(img: &RgbImage) -> GrayImage {
    GrayImage::from_fn(img.width(), img.height(), |x, y| {
        let [r, g, b] = img.get(x, y);
        luma(r, g, b)
    })
    .expect("source image has valid dimensions")
}

/// BT.601 full-range RGB → YCbCr, each channel rounded and clamped to [0, 255].
pub fn rgb_to_ycbcr(r: u8, g: u8, b: u8) -> (u8, u8, u8) {
    let (rf, gf, bf) = (r as f64, g as f64, b as f64);
    let y = 0.299 * rf + 0.587 * gf + 0.114 * bf;
    let cb = 128.0 - 0.168736 * rf - 0.331264 * gf + 0.5 * bf;
    let cr = 128.0 + 0.5 * rf - 0.418688 * gf - 0.081312 * bf;
    (round_clamp_u8(y), round_clamp_u8(cb), round_clamp_u8(cr))
}

/// Mask bit is true iff the pixel's (Cb, Cr) falls inside the threshold box.
pub fn skin_mask(img: &RgbImage, thresholds: &SkinThresholds) -> SkinMask {
    let mut bits = Vec::with_capacity(img.width() as usize * img.height() as usize);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let [r, g, b] = img.get(x, y);
            let (_, cb, cr) = rgb_to_ycbcr(r, g, b);
            bits.push(thresholds.contains(cb, cr));
        }
    }
    SkinMask::from_raw(img.width(), img.height(), bits).expect("source image has valid dimensions")
}

/// Copy masked pixels, replace the rest with `fill`.
pub fn apply_mask(img: &RgbImage, mask: &SkinMask, fill: [u8; 3]) -> Result<RgbImage> {
    if img.dimensions() != mask.dimensions() {
        return Err(Error::DimensionMismatch {
            left_width: img.width(),
            left_height: img.height(),
            right_width: mask.width(),
            right_height: mask.height(),
        });
    }
    RgbImage::from_fn(img.width(), img.height(), |x, y| {
        if mask.get(x, y) {
            img.get(x, y)
        } else {
            fill
        }
    })
}

/// Rounded mean over the (2r+1)² window with replicate-border extension.
/// Radius 0 is the identity.
pub fn box_blur(img: &GrayImage, radius: u32) -> GrayImage {
    if radius == 0 {
        return img.clone();
    }
    let (w, h) = (img.width() as i64, img.height() as i64);
    let r = radius as i64;
    let side = 2 * r + 1;
    let area = (side * side) as u64;

    // Horizontal replicate-extended window sums, then vertical; one division
    // with rounding at the end keeps the exact window-mean semantics.
    let mut row_sums = vec![0u64; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0u64;
            for dx in -r..=r {
                s += img.get_clamped(x + dx, y) as u64;
            }
            row_sums[(y * w + x) as usize] = s;
        }
    }
    let mut out = vec![0u8; (w * h) as usize];
    for y in 0..h {
        for x in 0..w {
            let mut s = 0u64;
            for dy in -r..=r {
                let cy = (y + dy).clamp(0, h - 1);
                s += row_sums[(cy * w + x) as usize];
            }
            out[(y * w + x) as usize] = ((s + area / 2) / area) as u8;
        }
    }
    GrayImage::from_raw(img.width(), img.height(), out).expect("source image has valid dimensions")
}
