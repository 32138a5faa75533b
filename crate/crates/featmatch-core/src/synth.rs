//! Deterministic synthetic test images.
//!
//! Fixtures are generated from seeded ChaCha8 streams rather than shipped as
//! binary blobs; the same seed always reproduces the same image.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{GrayImage, RgbImage};

/// Corner-rich texture: high-contrast random rectangles over a noisy mid-gray
/// background. Rectangle intensities avoid the background band so their
/// corners always clear a FAST threshold of 20, while the per-pixel noise
/// (±10) keeps local patches distinct without adding spurious corners.
pub fn textured_gray(width: u32, height: u32, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = GrayImage::from_fn(width, height, |_, _| 0).expect("valid dimensions");
    for y in 0..height {
        for x in 0..width {
            img.set(x, y, rng.random_range(118..=138u8));
        }
    }
    let n_rects = (width as usize * height as usize) / 650;
    for _ in 0..n_rects {
        let rw = rng.random_range(4..=24u32).min(width);
        let rh = rng.random_range(4..=24u32).min(height);
        let x0 = rng.random_range(0..=width - rw);
        let y0 = rng.random_range(0..=height - rh);
        let value: u8 = if rng.random_bool(0.5) {
            rng.random_range(0..=95)
        } else {
            rng.random_range(160..=255)
        };
        for y in y0..y0 + rh {
            for x in x0..x0 + rw {
                img.set(x, y, value);
            }
        }
    }
    img
}

/// Regular grid of isolated bright dots on black; each dot detects as exactly
/// one FAST corner. Returns the image and the dot count.
pub fn corner_dot_grid(width: u32, height: u32, spacing: u32, margin: u32) -> (GrayImage, usize) {
    let mut img = GrayImage::from_fn(width, height, |_, _| 0).expect("valid dimensions");
    let mut count = 0;
    let mut y = margin;
    while y + margin < height {
        let mut x = margin;
        while x + margin < width {
            img.set(x, y, 255);
            count += 1;
            x += spacing;
        }
        y += spacing;
    }
    (img, count)
}

/// Left half in skin chroma ((Cb, Cr) = (100, 150)), right half green.
/// Under the default thresholds exactly the left half is classified as skin.
pub fn skin_test_rgb(width: u32, height: u32) -> RgbImage {
    RgbImage::from_fn(width, height, |x, _| {
        if x < width / 2 {
            [181, 144, 100]
        } else {
            [0, 200, 0]
        }
    })
    .expect("valid dimensions")
}
