//! Exact 90°-multiple image rotations and the matching point transforms.
//!
//! The rotation kinds are lossless pixel permutations; `transform_point`
//! tracks where a source pixel lands so that ground-truth correspondences can
//! be computed without interpolation. A general 2×3 affine form is carried
//! for point mapping only — image resampling under arbitrary affines is out
//! of scope.

use crate::error::{Error, Result};
use crate::image::{GrayImage, RgbImage};

/// Quarter-turn direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    Cw,
    Ccw,
}

/// A 2D transform: one of the exact rotation kinds, or a general 2×3 affine
/// matrix `[[a, b, c], [d, e, f]]` mapping `(x, y)` to `(ax + by + c, dx + ey + f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform2D {
    Identity,
    Rot90Cw,
    Rot90Ccw,
    Rot180,
    Affine([[f64; 3]; 2]),
}

impl Transform2D {
    /// Destination dimensions for a source of the given size. Affine
    /// transforms keep the source size (they never resample an image here).
    pub fn output_dims(&self, src_dims: (u32, u32)) -> (u32, u32) {
        match self {
            Transform2D::Rot90Cw | Transform2D::Rot90Ccw => (src_dims.1, src_dims.0),
            _ => src_dims,
        }
    }

    /// Apply the exact rotation kinds to a grayscale image. Affine transforms
    /// are point-only and return an error.
    pub fn apply_gray(&self, img: &GrayImage) -> Result<GrayImage> {
        match self {
            Transform2D::Identity => Ok(img.clone()),
            Transform2D::Rot90Cw => Ok(rotate90_gray(img, Rotation::Cw)),
            Transform2D::Rot90Ccw => Ok(rotate90_gray(img, Rotation::Ccw)),
            Transform2D::Rot180 => Ok(rotate180_gray(img)),
            Transform2D::Affine(_) => Err(Error::InvalidConfig(
                "affine transforms map points only; image warping is not supported".into(),
            )),
        }
    }

    /// RGB counterpart of [`Transform2D::apply_gray`].
    pub fn apply_rgb(&self, img: &RgbImage) -> Result<RgbImage> {
        match self {
            Transform2D::Identity => Ok(img.clone()),
            Transform2D::Rot90Cw => Ok(rotate90_rgb(img, Rotation::Cw)),
            Transform2D::Rot90Ccw => Ok(rotate90_rgb(img, Rotation::Ccw)),
            Transform2D::Rot180 => Ok(rotate180_rgb(img)),
            Transform2D::Affine(_) => Err(Error::InvalidConfig(
                "affine transforms map points only; image warping is not supported".into(),
            )),
        }
    }
}

/// Map a source-pixel coordinate to its destination coordinate.
///
/// For Rot90Cw on an image of height H: `(x, y) -> (H - 1 - y, x)`, consistent
/// with the pixel permutation of [`rotate90_gray`]. Points may map outside the
/// destination bounds for general affines; results are unclamped.
pub fn transform_point(t: &Transform2D, p: (f64, f64), src_dims: (u32, u32)) -> (f64, f64) {
    let (w, h) = (src_dims.0 as f64, src_dims.1 as f64);
    let (x, y) = p;
    match t {
        Transform2D::Identity => (x, y),
        Transform2D::Rot90Cw => (h - 1.0 - y, x),
        Transform2D::Rot90Ccw => (y, w - 1.0 - x),
        Transform2D::Rot180 => (w - 1.0 - x, h - 1.0 - y),
        Transform2D::Affine(m) => (
            m[0][0] * x + m[0][1] * y + m[0][2],
            m[1][0] * x + m[1][1] * y + m[1][2],
        ),
    }
}

fn rotate90_buf(src: &[u8], w: usize, h: usize, ch: usize, dir: Rotation) -> Vec<u8> {
    // dst is h x w; CW: dst(x', y') = src(y', H-1-x'), CCW: dst(x', y') = src(W-1-y', x')
    let (dw, dh) = (h, w);
    let mut dst = vec![0u8; src.len()];
    for dy in 0..dh {
        for dx in 0..dw {
            let (sx, sy) = match dir {
                Rotation::Cw => (dy, h - 1 - dx),
                Rotation::Ccw => (w - 1 - dy, dx),
            };
            let s = (sy * w + sx) * ch;
            let d = (dy * dw + dx) * ch;
            dst[d..d + ch].copy_from_slice(&src[s..s + ch]);
        }
    }
    dst
}

fn rotate180_buf(src: &[u8], w: usize, h: usize, ch: usize) -> Vec<u8> {
    let mut dst = vec![0u8; src.len()];
    for dy in 0..h {
        for dx in 0..w {
            let s = ((h - 1 - dy) * w + (w - 1 - dx)) * ch;
            let d = (dy * w + dx) * ch;
            dst[d..d + ch].copy_from_slice(&src[s..s + ch]);
        }
    }
    dst
}

/// Exact quarter-turn rotation; output has transposed dimensions.
pub fn rotate90_gray(img: &GrayImage, dir: Rotation) -> GrayImage {
    let (w, h) = img.dimensions();
    let buf = rotate90_buf(img.as_raw(), w as usize, h as usize, 1, dir);
    GrayImage::from_raw(h, w, buf).expect("rotation preserves pixel count")
}

/// Exact quarter-turn rotation; output has transposed dimensions.
pub fn rotate90_rgb(img: &RgbImage, dir: Rotation) -> RgbImage {
    let (w, h) = img.dimensions();
    let buf = rotate90_buf(img.as_raw(), w as usize, h as usize, 3, dir);
    RgbImage::from_raw(h, w, buf).expect("rotation preserves pixel count")
}

/// Exact half-turn rotation; dimensions preserved.
pub fn rotate180_gray(img: &GrayImage) -> GrayImage {
    let (w, h) = img.dimensions();
    let buf = rotate180_buf(img.as_raw(), w as usize, h as usize, 1);
    GrayImage::from_raw(w, h, buf).expect("rotation preserves pixel count")
}

/// Exact half-turn rotation; dimensions preserved.
pub fn rotate180_rgb(img: &RgbImage) -> RgbImage {
    let (w, h) = img.dimensions();
    let buf = rotate180_buf(img.as_raw(), w as usize, h as usize, 3);
    RgbImage::from_raw(w, h, buf).expect("rotation preserves pixel count")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_gray() -> impl Strategy<Value = GrayImage> {
        (1u32..=16, 1u32..=16)
            .prop_flat_map(|(w, h)| {
                proptest::collection::vec(0u8..=255, (w * h) as usize)
                    .prop_map(move |px| GrayImage::from_raw(w, h, px).unwrap())
            })
    }

    #[test]
    fn rotate_2x2_cw() {
        // rows [a b / c d] -> rows [c a / d b]
        let img = GrayImage::from_raw(2, 2, vec![1, 2, 3, 4]).unwrap();
        let rot = rotate90_gray(&img, Rotation::Cw);
        assert_eq!(rot.as_raw(), &[3, 1, 4, 2]);
    }

    #[test]
    fn rotate_nonsquare_dimensions_transpose() {
        let img = GrayImage::from_fn(5, 3, |x, y| (x + 10 * y) as u8).unwrap();
        let rot = rotate90_gray(&img, Rotation::Cw);
        assert_eq!(rot.dimensions(), (3, 5));
    }

    #[test]
    fn transform_point_examples() {
        assert_eq!(
            transform_point(&Transform2D::Identity, (5.0, 7.0), (100, 50)),
            (5.0, 7.0)
        );
        // corner tracking on a 100x50 image (H = 50)
        assert_eq!(
            transform_point(&Transform2D::Rot90Cw, (0.0, 0.0), (100, 50)),
            (49.0, 0.0)
        );
        assert_eq!(
            transform_point(&Transform2D::Rot90Cw, (10.0, 20.0), (100, 50)),
            (29.0, 10.0)
        );
    }

    #[test]
    fn affine_maps_points_unclamped() {
        let t = Transform2D::Affine([[2.0, 0.0, -5.0], [0.0, 1.0, 3.0]]);
        assert_eq!(transform_point(&t, (1.0, 1.0), (4, 4)), (-3.0, 4.0));
        assert!(t.apply_gray(&GrayImage::new(4, 4).unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn four_cw_rotations_are_identity(img in small_gray()) {
            let mut r = img.clone();
            for _ in 0..4 {
                r = rotate90_gray(&r, Rotation::Cw);
            }
            prop_assert_eq!(r, img);
        }

        #[test]
        fn cw_then_ccw_is_identity(img in small_gray()) {
            let r = rotate90_gray(&rotate90_gray(&img, Rotation::Cw), Rotation::Ccw);
            prop_assert_eq!(r, img);
        }

        #[test]
        fn rotation_preserves_pixel_multiset(img in small_gray()) {
            let r = rotate90_gray(&img, Rotation::Cw);
            let mut a = img.as_raw().to_vec();
            let mut b = r.as_raw().to_vec();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn transform_point_commutes_with_rotation(img in small_gray()) {
            // exhaustive per-pixel commutation check; also covers Ccw and 180
            for (t, rotated) in [
                (Transform2D::Rot90Cw, rotate90_gray(&img, Rotation::Cw)),
                (Transform2D::Rot90Ccw, rotate90_gray(&img, Rotation::Ccw)),
                (Transform2D::Rot180, rotate180_gray(&img)),
            ] {
                for y in 0..img.height() {
                    for x in 0..img.width() {
                        let (tx, ty) = transform_point(&t, (x as f64, y as f64), img.dimensions());
                        prop_assert_eq!(rotated.get(tx as u32, ty as u32), img.get(x, y));
                    }
                }
            }
        }

        #[test]
        fn quarter_turn_point_maps_form_cyclic_group(
            x in 0u32..64, y in 0u32..64, w in 64u32..128, h in 64u32..128,
        ) {
            // applying Rot90Cw four times (tracking dimension swaps) returns
            // the pixel; exact on the integer lattice
            let mut p = (x as f64, y as f64);
            let mut dims = (w, h);
            for _ in 0..4 {
                p = transform_point(&Transform2D::Rot90Cw, p, dims);
                dims = (dims.1, dims.0);
            }
            prop_assert_eq!(p, (x as f64, y as f64));
            prop_assert_eq!(dims, (w, h));
        }
    }
}
