//! FAST segment-test corner detection with score-based non-maximum
//! suppression, Harris-response ranking, and intensity-centroid orientation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Radius-3 Bresenham circle, 16 pixels, starting at 12 o'clock and running
/// clockwise. The set is closed under quarter-turn rotation (an index shift
/// of 4), which keeps detection exactly equivariant under 90° rotations.
pub const CIRCLE_OFFSETS: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

/// Window half-size for the Harris re-scoring pass (7×7 block).
pub const HARRIS_WINDOW_RADIUS: u32 = 3;

/// A detected corner: pixel location, corner strength, and orientation in
/// radians normalized to [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub response: f64,
    pub angle: f64,
}

/// Detector parameters. Defaults follow the common single-scale
/// oriented-FAST configuration: FAST-9, threshold 20, 31×31 patches, up to
/// 500 keypoints retained by Harris response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Intensity delta `t` for the segment test.
    pub fast_threshold: u8,
    /// Contiguous circle pixels required (9..=16).
    pub arc_length: u8,
    /// Keypoint budget after Harris ranking.
    pub max_keypoints: usize,
    /// Harris trace weight `k`.
    pub harris_k: f64,
    /// Patch half-size for orientation and description; keypoints closer than
    /// this to a border are discarded.
    pub patch_radius: u32,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            fast_threshold: 20,
            arc_length: 9,
            max_keypoints: 500,
            harris_k: 0.04,
            patch_radius: 15,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(9..=16).contains(&self.arc_length) {
            return Err(Error::InvalidConfig(format!(
                "arc_length must be in 9..=16, got {}",
                self.arc_length
            )));
        }
        if self.fast_threshold < 1 {
            return Err(Error::InvalidConfig("fast_threshold must be >= 1".into()));
        }
        if self.max_keypoints < 1 {
            return Err(Error::InvalidConfig("max_keypoints must be >= 1".into()));
        }
        Ok(())
    }

    /// Minimum image side length required by [`detect_fast`].
    pub fn min_image_side(&self) -> u32 {
        2 * self.patch_radius + 7
    }
}

fn check_circle_center(img: &GrayImage, x: u32, y: u32) -> Result<()> {
    let (w, h) = img.dimensions();
    if x < 3 || y < 3 || x + 3 >= w || y + 3 >= h {
        return Err(Error::OutOfBounds {
            x: x as i64,
            y: y as i64,
            width: w,
            height: h,
        });
    }
    Ok(())
}

#[inline]
fn circle_values(img: &GrayImage, x: u32, y: u32) -> [i16; 16] {
    let mut vals = [0i16; 16];
    for (i, &(dx, dy)) in CIRCLE_OFFSETS.iter().enumerate() {
        vals[i] = img.get((x as i32 + dx) as u32, (y as i32 + dy) as u32) as i16;
    }
    vals
}

/// Longest run (with wrap-around) of circle values satisfying `pred`.
#[inline]
fn has_wrapping_run(vals: &[i16; 16], arc: u8, pred: impl Fn(i16) -> bool) -> bool {
    let mut run = 0u8;
    let mut first_run = None;
    for &v in vals {
        if pred(v) {
            run += 1;
            if run >= arc {
                return true;
            }
        } else {
            if first_run.is_none() {
                first_run = Some(run);
            }
            run = 0;
        }
    }
    match first_run {
        Some(prefix) => run + prefix >= arc, // wrap the trailing run onto the leading one
        None => arc <= 16,                   // all 16 satisfy the predicate
    }
}

#[inline]
fn segment_test_inner(vals: &[i16; 16], center: i16, t: u8, arc: u8) -> bool {
    let hi = center + t as i16;
    let lo = center - t as i16;
    has_wrapping_run(vals, arc, |v| v > hi) || has_wrapping_run(vals, arc, |v| v < lo)
}

/// FAST segment test: true iff the radius-3 circle around `(x, y)` contains a
/// contiguous arc of at least `arc` pixels all brighter than `center + t` or
/// all darker than `center - t`. Contiguity wraps around the circle.
pub fn fast_segment_test(img: &GrayImage, x: u32, y: u32, t: u8, arc: u8) -> Result<bool> {
    check_circle_center(img, x, y)?;
    let center = img.get(x, y) as i16;
    let vals = circle_values(img, x, y);
    Ok(segment_test_inner(&vals, center, t, arc))
}

/// Corner score: the maximum threshold `t` for which the segment test still
/// passes, found by binary search over t ∈ [1, 255]. Returns 0 when the test
/// fails even at t = 1.
pub fn fast_score(img: &GrayImage, x: u32, y: u32, arc: u8) -> Result<u8> {
    check_circle_center(img, x, y)?;
    let center = img.get(x, y) as i16;
    let vals = circle_values(img, x, y);
    if !segment_test_inner(&vals, center, 1, arc) {
        return Ok(0);
    }
    // invariant: the test passes at lo and fails above hi
    let (mut lo, mut hi) = (1u16, 255u16);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if segment_test_inner(&vals, center, mid as u8, arc) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo as u8)
}

/// All pixels passing the segment test at `t`, scored with [`fast_score`] and
/// sorted by (y, x). This is the detection stage before non-maximum
/// suppression and border filtering.
pub fn fast_candidates(img: &GrayImage, t: u8, arc: u8) -> Vec<Keypoint> {
    let (w, h) = img.dimensions();
    let mut out = Vec::new();
    if w < 7 || h < 7 {
        return out;
    }
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let center = img.get(x, y) as i16;
            let vals = circle_values(img, x, y);
            if segment_test_inner(&vals, center, t, arc) {
                let score = {
                    let (mut lo, mut hi) = (t as u16, 255u16);
                    while lo < hi {
                        let mid = (lo + hi).div_ceil(2);
                        if segment_test_inner(&vals, center, mid as u8, arc) {
                            lo = mid;
                        } else {
                            hi = mid - 1;
                        }
                    }
                    lo as u8
                };
                out.push(Keypoint {
                    x: x as f64,
                    y: y as f64,
                    response: score as f64,
                    angle: 0.0,
                });
            }
        }
    }
    out
}

/// FAST detection: segment test at `cfg.fast_threshold`, 3×3 non-maximum
/// suppression on the max-threshold score (ties keep the lexicographically
/// smallest (y, x)), border keypoints within `patch_radius` discarded, output
/// sorted by (y, x).
pub fn detect_fast(img: &GrayImage, cfg: &DetectorConfig) -> Result<Vec<Keypoint>> {
    cfg.validate()?;
    let (w, h) = img.dimensions();
    let min_side = cfg.min_image_side();
    if w < min_side || h < min_side {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            min_side,
        });
    }

    let candidates = fast_candidates(img, cfg.fast_threshold, cfg.arc_length);

    // score grid for O(1) neighbor lookups; 0 marks non-candidates
    // (a passing candidate always scores >= 1)
    let mut grid = vec![0u8; w as usize * h as usize];
    for kp in &candidates {
        grid[kp.y as usize * w as usize + kp.x as usize] = kp.response as u8;
    }

    let margin = cfg.patch_radius;
    let mut kept = Vec::new();
    for kp in &candidates {
        let (x, y) = (kp.x as u32, kp.y as u32);
        let score = kp.response as u8;
        let mut is_max = true;
        'nms: for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let ns = grid[ny as usize * w as usize + nx as usize];
                if ns > score || (ns == score && (ny, nx) < (y as i64, x as i64)) {
                    is_max = false;
                    break 'nms;
                }
            }
        }
        if !is_max {
            continue;
        }
        if x < margin || y < margin || x + margin >= w || y + margin >= h {
            continue;
        }
        kept.push(*kp);
    }
    // candidates are produced in (y, x) order and kept preserves it
    Ok(kept)
}

fn harris_window_fits(img: &GrayImage, x: u32, y: u32, window_radius: u32) -> bool {
    let (w, h) = img.dimensions();
    let support = window_radius as i64 + 1; // central differences need one extra pixel
    let (x, y) = (x as i64, y as i64);
    x >= support && y >= support && x + support < w as i64 && y + support < h as i64
}

/// Harris corner measure at `(x, y)`: gradients by central differences, the
/// structure tensor summed over the (2r+1)² window, response
/// `det(M) - k·trace(M)²`.
///
/// Gradient products are accumulated in integers (the factor-of-two halving
/// of central differences is applied once at the end), so the response is
/// independent of summation order and exactly equal for rotated copies of the
/// same window.
pub fn harris_response(
    img: &GrayImage,
    x: u32,
    y: u32,
    window_radius: u32,
    k: f64,
) -> Result<f64> {
    if !harris_window_fits(img, x, y, window_radius) {
        return Err(Error::PatchOutOfBounds {
            x: x as i64,
            y: y as i64,
            radius: window_radius + 1,
            width: img.width(),
            height: img.height(),
        });
    }
    let r = window_radius as i64;
    let (mut sxx, mut syy, mut sxy) = (0i64, 0i64, 0i64);
    for dy in -r..=r {
        for dx in -r..=r {
            let px = (x as i64 + dx) as u32;
            let py = (y as i64 + dy) as u32;
            let gx = img.get(px + 1, py) as i64 - img.get(px - 1, py) as i64;
            let gy = img.get(px, py + 1) as i64 - img.get(px, py - 1) as i64;
            sxx += gx * gx;
            syy += gy * gy;
            sxy += gx * gy;
        }
    }
    // doubled gradients: divide the tensor entries by 4
    let a = sxx as f64 / 4.0;
    let b = syy as f64 / 4.0;
    let c = sxy as f64 / 4.0;
    let det = a * b - c * c;
    let trace = a + b;
    Ok(det - k * trace * trace)
}

/// Re-score keypoints with the Harris measure and keep the `n` strongest.
/// Ties break toward ascending (y, x); output is ordered by descending
/// response with the same tie rule. Keypoints whose Harris window does not
/// fit inside the image rank last.
pub fn select_top_n(
    kps: &[Keypoint],
    img: &GrayImage,
    n: usize,
    harris_k: f64,
) -> Vec<Keypoint> {
    let mut scored: Vec<Keypoint> = kps
        .iter()
        .map(|kp| {
            let response = harris_response(
                img,
                kp.x as u32,
                kp.y as u32,
                HARRIS_WINDOW_RADIUS,
                harris_k,
            )
            .unwrap_or(f64::MIN);
            Keypoint { response, ..*kp }
        })
        .collect();
    scored.sort_by(|a, b| {
        b.response
            .partial_cmp(&a.response)
            .expect("harris responses are finite")
            .then_with(|| (a.y as u64, a.x as u64).cmp(&(b.y as u64, b.x as u64)))
    });
    scored.truncate(n);
    scored
}

/// Intensity-centroid orientation: first-order moments over the disc of
/// radius `patch_radius` centered on the keypoint, `atan2(m01, m10)`
/// normalized to [0, 2π). A patch with vanishing moments yields 0.
pub fn compute_orientation(img: &GrayImage, kp: &Keypoint, patch_radius: u32) -> Result<f64> {
    let (w, h) = img.dimensions();
    let (cx, cy) = (kp.x.round() as i64, kp.y.round() as i64);
    let r = patch_radius as i64;
    if cx < r || cy < r || cx + r >= w as i64 || cy + r >= h as i64 {
        return Err(Error::PatchOutOfBounds {
            x: cx,
            y: cy,
            radius: patch_radius,
            width: w,
            height: h,
        });
    }
    let r2 = r * r;
    let (mut m10, mut m01) = (0i64, 0i64);
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy > r2 {
                continue;
            }
            let v = img.get((cx + dx) as u32, (cy + dy) as u32) as i64;
            m10 += dx * v;
            m01 += dy * v;
        }
    }
    if m10 == 0 && m01 == 0 {
        return Ok(0.0);
    }
    Ok((m01 as f64).atan2(m10 as f64).rem_euclid(std::f64::consts::TAU))
}

/// Assign intensity-centroid orientations to every keypoint.
pub fn orient_keypoints(
    img: &GrayImage,
    mut kps: Vec<Keypoint>,
    patch_radius: u32,
) -> Result<Vec<Keypoint>> {
    for kp in &mut kps {
        kp.angle = compute_orientation(img, kp, patch_radius)?;
    }
    Ok(kps)
}
