//! 256-bit binary patch descriptors with an optional orientation-steered
//! sampling pattern, plus the Hamming metric.
//!
//! The sampling pattern is drawn once from a seeded ChaCha8 stream (isotropic
//! Gaussian, σ = patch_radius / 2, truncated to the disc of radius
//! patch_radius − 2), so identical seeds reproduce identical patterns
//! bit-exactly. Steering quantizes the keypoint angle to one of
//! [`ORIENTATION_BINS`] discrete orientations; quarter-turn bins are derived
//! from their base bin by exact integer axis swaps, which makes steering
//! commute exactly with 90° image rotations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::detect::Keypoint;
use crate::error::{Error, Result};
use crate::image::{box_blur, GrayImage};

pub const DESCRIPTOR_BITS: usize = 256;
pub const DESCRIPTOR_BYTES: usize = 32;

/// Number of discrete steering orientations (10° bins). A multiple of four,
/// so quarter turns land exactly on a bin.
pub const ORIENTATION_BINS: u32 = 36;

/// 256 packed comparison bits: bit `k` of the descriptor is bit `k % 8` of
/// octet `k / 8`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryDescriptor {
    bytes: [u8; DESCRIPTOR_BYTES],
}

impl BinaryDescriptor {
    pub fn from_bytes(bytes: [u8; DESCRIPTOR_BYTES]) -> Self {
        Self { bytes }
    }

    pub fn as_bytes(&self) -> &[u8; DESCRIPTOR_BYTES] {
        &self.bytes
    }

    #[inline]
    pub fn bit(&self, k: usize) -> bool {
        debug_assert!(k < DESCRIPTOR_BITS);
        self.bytes[k / 8] >> (k % 8) & 1 == 1
    }

    #[inline]
    fn set_bit(&mut self, k: usize) {
        self.bytes[k / 8] |= 1 << (k % 8);
    }

    pub fn complement(&self) -> Self {
        let mut bytes = self.bytes;
        for b in &mut bytes {
            *b = !*b;
        }
        Self { bytes }
    }
}

impl Default for BinaryDescriptor {
    fn default() -> Self {
        Self {
            bytes: [0; DESCRIPTOR_BYTES],
        }
    }
}

impl std::fmt::Debug for BinaryDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bytes {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

/// Number of differing bits, via XOR and popcount over 64-bit lanes.
#[inline]
pub fn hamming_distance(a: &BinaryDescriptor, b: &BinaryDescriptor) -> u32 {
    let mut total = 0u32;
    for i in 0..4 {
        let x = u64::from_le_bytes(a.bytes[i * 8..(i + 1) * 8].try_into().unwrap());
        let y = u64::from_le_bytes(b.bytes[i * 8..(i + 1) * 8].try_into().unwrap());
        total += (x ^ y).count_ones();
    }
    total
}

/// One comparison pair: two sample points relative to the patch center.
pub type PatternPair = ((i32, i32), (i32, i32));

/// An ordered list of point pairs sampled relative to the patch center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPattern {
    pairs: Vec<PatternPair>,
    seed: u64,
    patch_radius: u32,
}

impl SamplingPattern {
    pub fn pairs(&self) -> &[PatternPair] {
        &self.pairs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn patch_radius(&self) -> u32 {
        self.patch_radius
    }
}

/// Draw `n_pairs` point pairs from an isotropic Gaussian (σ = patch_radius/2)
/// truncated to the closed disc of radius patch_radius − 2. The generator is
/// ChaCha8 seeded with `seed`; identical seeds reproduce the pattern
/// bit-exactly.
pub fn generate_pattern(seed: u64, patch_radius: u32, n_pairs: usize) -> Result<SamplingPattern> {
    if patch_radius < 4 {
        return Err(Error::InvalidConfig(format!(
            "patch_radius must be >= 4 for pattern generation, got {patch_radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = patch_radius as f64 / 2.0;
    let normal = Normal::new(0.0, sigma).expect("sigma is positive and finite");
    let max_r2 = ((patch_radius - 2) * (patch_radius - 2)) as i64;
    let sample_point = |rng: &mut ChaCha8Rng| -> (i32, i32) {
        loop {
            let x = normal.sample(rng).round() as i64;
            let y = normal.sample(rng).round() as i64;
            if x * x + y * y <= max_r2 {
                return (x as i32, y as i32);
            }
        }
    };
    let pairs = (0..n_pairs)
        .map(|_| (sample_point(&mut rng), sample_point(&mut rng)))
        .collect();
    Ok(SamplingPattern {
        pairs,
        seed,
        patch_radius,
    })
}

/// Angle bin in 0..ORIENTATION_BINS for the nearest discrete orientation.
pub fn quantize_orientation(angle: f64) -> u32 {
    let bins = ORIENTATION_BINS as f64;
    let turns = angle.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU;
    ((turns * bins).round() as u32) % ORIENTATION_BINS
}

#[inline]
fn rotate_quarter_turns((x, y): (i32, i32), quarters: u32) -> (i32, i32) {
    match quarters % 4 {
        0 => (x, y),
        1 => (-y, x),
        2 => (-x, -y),
        _ => (y, -x),
    }
}

fn steer_to_bin(pattern: &SamplingPattern, bin: u32) -> SamplingPattern {
    let quarters = bin / (ORIENTATION_BINS / 4);
    let base_bin = bin % (ORIENTATION_BINS / 4);
    let rotate = |p: (i32, i32)| -> (i32, i32) {
        let rotated = if base_bin == 0 {
            p
        } else {
            let theta = base_bin as f64 * std::f64::consts::TAU / ORIENTATION_BINS as f64;
            let (s, c) = theta.sin_cos();
            let (x, y) = (p.0 as f64, p.1 as f64);
            ((c * x - s * y).round() as i32, (s * x + c * y).round() as i32)
        };
        rotate_quarter_turns(rotated, quarters)
    };
    SamplingPattern {
        pairs: pattern
            .pairs
            .iter()
            .map(|&(a, b)| (rotate(a), rotate(b)))
            .collect(),
        seed: pattern.seed,
        patch_radius: pattern.patch_radius,
    }
}

/// Rotate every pattern point by `angle` quantized to the nearest orientation
/// bin, rounding to integer pixels. Quarter-turn bins reduce to exact axis
/// swaps of a base bin, so `steer(θ + π/2)` equals the quarter-turn image of
/// `steer(θ)` point for point.
pub fn steer_pattern(pattern: &SamplingPattern, angle: f64) -> SamplingPattern {
    steer_to_bin(pattern, quantize_orientation(angle))
}

fn descriptor_from_pattern(
    blurred: &GrayImage,
    cx: i64,
    cy: i64,
    pattern: &SamplingPattern,
) -> BinaryDescriptor {
    let mut desc = BinaryDescriptor::default();
    for (k, &((ax, ay), (bx, by))) in pattern.pairs.iter().enumerate() {
        let first = blurred.get((cx + ax as i64) as u32, (cy + ay as i64) as u32);
        let second = blurred.get((cx + bx as i64) as u32, (cy + by as i64) as u32);
        if first < second {
            desc.set_bit(k);
        }
    }
    desc
}

fn check_patch(img: &GrayImage, kp: &Keypoint, radius: u32) -> Result<(i64, i64)> {
    let (w, h) = img.dimensions();
    let (cx, cy) = (kp.x.round() as i64, kp.y.round() as i64);
    let r = radius as i64;
    if cx < r || cy < r || cx + r >= w as i64 || cy + r >= h as i64 {
        return Err(Error::PatchOutOfBounds {
            x: cx,
            y: cy,
            radius,
            width: w,
            height: h,
        });
    }
    Ok((cx, cy))
}

/// Extract one descriptor. The image is pre-smoothed with
/// [`box_blur`]`(blur_radius)`; when `steered`, the pattern is rotated to the
/// keypoint's orientation bin first. Bit `k` is 1 iff the intensity at the
/// pair's first point is strictly less than at its second.
pub fn extract_descriptor(
    img: &GrayImage,
    kp: &Keypoint,
    pattern: &SamplingPattern,
    steered: bool,
    blur_radius: u32,
) -> Result<BinaryDescriptor> {
    let (cx, cy) = check_patch(img, kp, pattern.patch_radius)?;
    let blurred = box_blur(img, blur_radius);
    let steered_pattern;
    let active = if steered {
        steered_pattern = steer_pattern(pattern, kp.angle);
        &steered_pattern
    } else {
        pattern
    };
    Ok(descriptor_from_pattern(&blurred, cx, cy, active))
}

/// Batch extraction: the image is blurred once and steered patterns are
/// cached per orientation bin.
pub fn extract_descriptors(
    img: &GrayImage,
    kps: &[Keypoint],
    pattern: &SamplingPattern,
    steered: bool,
    blur_radius: u32,
) -> Result<Vec<BinaryDescriptor>> {
    let blurred = box_blur(img, blur_radius);
    let mut bin_cache: Vec<Option<SamplingPattern>> =
        vec![None; ORIENTATION_BINS as usize];
    let mut out = Vec::with_capacity(kps.len());
    for kp in kps {
        let (cx, cy) = check_patch(img, kp, pattern.patch_radius)?;
        let active = if steered {
            let bin = quantize_orientation(kp.angle);
            bin_cache[bin as usize].get_or_insert_with(|| steer_to_bin(pattern, bin))
        } else {
            pattern
        };
        out.push(descriptor_from_pattern(&blurred, cx, cy, active));
    }
    Ok(out)
}
