//! Side-by-side match visualization.

use crate::detect::Keypoint;
use crate::error::{Error, Result};
use crate::image::RgbImage;
use crate::matcher::Match;

/// Fixed palette cycled per match index, so output bytes are deterministic.
pub const MATCH_PALETTE: [[u8; 3]; 10] = [
    [230, 57, 70],
    [46, 196, 182],
    [255, 183, 3],
    [106, 76, 219],
    [67, 170, 139],
    [244, 97, 151],
    [86, 145, 227],
    [240, 113, 38],
    [144, 190, 109],
    [177, 133, 219],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawConfig {
    /// How many matches to draw, in input order.
    pub top_k: usize,
    /// Line thickness in pixels.
    pub line_thickness: u32,
    /// Radius of the circle marker at each keypoint.
    pub marker_radius: u32,
}

impl Default for DrawConfig {
    fn default() -> Self {
        Self {
            top_k: 10,
            line_thickness: 1,
            marker_radius: 3,
        }
    }
}

fn put_clipped(canvas: &mut RgbImage, x: i64, y: i64, color: [u8; 3]) {
    if x >= 0 && y >= 0 && (x as u32) < canvas.width() && (y as u32) < canvas.height() {
        canvas.set(x as u32, y as u32, color);
    }
}

fn stamp(canvas: &mut RgbImage, x: i64, y: i64, thickness: u32, color: [u8; 3]) {
    let r = thickness.saturating_sub(1) as i64;
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                put_clipped(canvas, x + dx, y + dy, color);
            }
        }
    }
}

/// Bresenham raster of the segment from `(x0, y0)` to `(x1, y1)`.
fn line_points(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<(i64, i64)> {
    let mut points = Vec::new();
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        points.push((x, y));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    points
}

fn draw_line(canvas: &mut RgbImage, x0: i64, y0: i64, x1: i64, y1: i64, thickness: u32, color: [u8; 3]) {
    for (x, y) in line_points(x0, y0, x1, y1) {
        stamp(canvas, x, y, thickness, color);
    }
}

/// Midpoint-circle outline.
fn draw_circle(canvas: &mut RgbImage, cx: i64, cy: i64, radius: u32, color: [u8; 3]) {
    if radius == 0 {
        put_clipped(canvas, cx, cy, color);
        return;
    }
    let (mut x, mut y) = (radius as i64, 0i64);
    let mut err = 1 - radius as i64;
    while x >= y {
        for &(px, py) in &[
            (cx + x, cy + y),
            (cx - x, cy + y),
            (cx + x, cy - y),
            (cx - x, cy - y),
            (cx + y, cy + x),
            (cx - y, cy + x),
            (cx + y, cy - x),
            (cx - y, cy - x),
        ] {
            put_clipped(canvas, px, py, color);
        }
        y += 1;
        if err < 0 {
            err += 2 * y + 1;
        } else {
            x -= 1;
            err += 2 * (y - x) + 1;
        }
    }
}

/// Render the first `min(top_k, len)` matches on a horizontal concatenation
/// of the two images (heights padded with black). Keypoints get circle
/// markers at both endpoints; each match uses its palette color. Callers
/// sort beforehand if "first" is to mean "best".
pub fn draw_matches(
    img1: &RgbImage,
    kps1: &[Keypoint],
    img2: &RgbImage,
    kps2: &[Keypoint],
    matches: &[Match],
    cfg: &DrawConfig,
) -> Result<RgbImage> {
    let width = img1.width() + img2.width();
    let height = img1.height().max(img2.height());
    let mut canvas = RgbImage::from_fn(width, height, |x, y| {
        if x < img1.width() {
            if y < img1.height() {
                img1.get(x, y)
            } else {
                [0, 0, 0]
            }
        } else if y < img2.height() {
            img2.get(x - img1.width(), y)
        } else {
            [0, 0, 0]
        }
    })?;

    let offset = img1.width() as i64;
    for (i, m) in matches.iter().take(cfg.top_k).enumerate() {
        let kp1 = kps1.get(m.query_idx).ok_or(Error::MatchIndexOutOfRange {
            index: m.query_idx,
            len: kps1.len(),
        })?;
        let kp2 = kps2.get(m.train_idx).ok_or(Error::MatchIndexOutOfRange {
            index: m.train_idx,
            len: kps2.len(),
        })?;
        let color = MATCH_PALETTE[i % MATCH_PALETTE.len()];
        let (x0, y0) = (kp1.x.round() as i64, kp1.y.round() as i64);
        let (x1, y1) = (kp2.x.round() as i64 + offset, kp2.y.round() as i64);
        draw_line(&mut canvas, x0, y0, x1, y1, cfg.line_thickness, color);
        draw_circle(&mut canvas, x0, y0, cfg.marker_radius, color);
        draw_circle(&mut canvas, x1, y1, cfg.marker_radius, color);
    }
    Ok(canvas)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kp(x: f64, y: f64) -> Keypoint {
        Keypoint { x, y, response: 0.0, angle: 0.0 }
    }

    fn gray_rgb(w: u32, h: u32, v: u8) -> RgbImage {
        RgbImage::from_fn(w, h, |_, _| [v, v, v]).unwrap()
    }

    #[test]
    fn zero_matches_is_plain_concatenation() {
        let a = gray_rgb(4, 3, 10);
        let b = gray_rgb(5, 6, 20);
        let canvas = draw_matches(&a, &[], &b, &[], &[], &DrawConfig::default()).unwrap();
        assert_eq!(canvas.dimensions(), (9, 6));
        assert_eq!(canvas.get(0, 0), [10, 10, 10]);
        assert_eq!(canvas.get(4, 0), [20, 20, 20]);
        // padding below the shorter image is black
        assert_eq!(canvas.get(0, 5), [0, 0, 0]);
    }

    #[test]
    fn single_match_line_follows_bresenham_oracle() {
        let a = gray_rgb(20, 20, 0);
        let b = gray_rgb(20, 20, 0);
        let kps1 = vec![kp(4.0, 5.0)];
        let kps2 = vec![kp(11.0, 16.0)];
        let m = Match { query_idx: 0, train_idx: 0, distance_bits: 0 };
        let cfg = DrawConfig { top_k: 10, line_thickness: 1, marker_radius: 0 };
        let canvas = draw_matches(&a, &kps1, &b, &kps2, &[m], &cfg).unwrap();
        // independent raster of the same segment (offset = img1 width = 20)
        for (x, y) in line_points(4, 5, 11 + 20, 16) {
            assert_eq!(
                canvas.get(x as u32, y as u32),
                MATCH_PALETTE[0],
                "missing line pixel at ({x}, {y})"
            );
        }
    }

    #[test]
    fn top_k_limits_drawn_matches() {
        let a = gray_rgb(30, 10, 0);
        let b = gray_rgb(30, 10, 0);
        // one horizontal line per match, each on its own row
        let kps: Vec<Keypoint> = (0..5).map(|i| kp(5.0 + 4.0 * i as f64, 2.0 + i as f64)).collect();
        let matches: Vec<Match> = (0..5)
            .map(|i| Match { query_idx: i, train_idx: i, distance_bits: 0 })
            .collect();
        let cfg = DrawConfig { top_k: 2, line_thickness: 1, marker_radius: 0 };
        let canvas = draw_matches(&a, &kps, &b, &kps, &matches, &cfg).unwrap();
        // the third match's row stays untouched
        assert_eq!(canvas.get(13, 4), [0, 0, 0]);
        // the first two are drawn
        assert_eq!(canvas.get(5, 2), MATCH_PALETTE[0]);
        assert_eq!(canvas.get(9, 3), MATCH_PALETTE[1]);
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let a = gray_rgb(8, 8, 0);
        let m = Match { query_idx: 3, train_idx: 0, distance_bits: 0 };
        assert!(matches!(
            draw_matches(&a, &[kp(1.0, 1.0)], &a, &[kp(1.0, 1.0)], &[m], &DrawConfig::default()),
            Err(Error::MatchIndexOutOfRange { .. })
        ));
    }

    #[test]
    fn drawing_is_deterministic() {
        let img = gray_rgb(16, 12, 50);
        let kps = vec![kp(3.0, 3.0), kp(10.0, 8.0)];
        let matches = vec![
            Match { query_idx: 0, train_idx: 1, distance_bits: 1 },
            Match { query_idx: 1, train_idx: 0, distance_bits: 2 },
        ];
        let cfg = DrawConfig::default();
        let a = draw_matches(&img, &kps, &img, &kps, &matches, &cfg).unwrap();
        let b = draw_matches(&img, &kps, &img, &kps, &matches, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
