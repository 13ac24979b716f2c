//! Classical alignment: corner matching, homography estimation and warping of
//! both images onto a shared canvas.

mod dlt;
mod features;
mod ransac;
mod warp;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, Dims, Image, SoftMask};

pub use dlt::dlt_homography;
pub use features::{detect_matches, harris_corners, MatchConfig};
pub use ransac::{ransac_homography, RansacConfig};
pub use warp::{warp_pair, WarpConfig};

/// Projective map from target pixel coordinates `(x, y)` to reference pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 9]", into = "[f64; 9]")]
pub struct Homography {
    m: [[f64; 3]; 3],
}

impl Homography {
    /// Normalises so that `h[2][2] = 1` (when non-zero) and checks invertibility.
    pub fn new(mut m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue("homography has non-finite entries".into()));
        }
        let s = m[2][2];
        if s.abs() > 1e-15 {
            for row in &mut m {
                for v in row {
                    *v /= s;
                }
            }
        }
        let h = Self { m };
        if h.det().abs() <= 1e-12 {
            return Err(Error::NotInvertible);
        }
        Ok(h)
    }

    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self {
            m: [[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]],
        }
    }

    pub fn from_row_major(v: [f64; 9]) -> Result<Self> {
        Self::new([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]])
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn det(&self) -> f64 {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Maps a point; `None` when it lands on the line at infinity.
    #[inline]
    pub fn apply(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        let m = &self.m;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        if w.abs() < 1e-12 {
            return None;
        }
        Some((
            (m[0][0] * x + m[0][1] * y + m[0][2]) / w,
            (m[1][0] * x + m[1][1] * y + m[1][2]) / w,
        ))
    }

    pub fn inverse(&self) -> Result<Self> {
        let m = &self.m;
        let det = self.det();
        if det.abs() <= 1e-12 {
            return Err(Error::NotInvertible);
        }
        let adj = [
            [
                m[1][1] * m[2][2] - m[1][2] * m[2][1],
                m[0][2] * m[2][1] - m[0][1] * m[2][2],
                m[0][1] * m[1][2] - m[0][2] * m[1][1],
            ],
            [
                m[1][2] * m[2][0] - m[1][0] * m[2][2],
                m[0][0] * m[2][2] - m[0][2] * m[2][0],
                m[0][2] * m[1][0] - m[0][0] * m[1][2],
            ],
            [
                m[1][0] * m[2][1] - m[1][1] * m[2][0],
                m[0][1] * m[2][0] - m[0][0] * m[2][1],
                m[0][0] * m[1][1] - m[0][1] * m[1][0],
            ],
        ];
        Self::new(adj.map(|row| row.map(|v| v / det)))
    }

    /// Largest absolute entry difference after normalisation.
    pub fn max_entry_diff(&self, other: &Homography) -> f64 {
        self.to_row_major()
            .iter()
            .zip(other.to_row_major())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<[f64; 9]> for Homography {
    type Error = Error;
    fn try_from(v: [f64; 9]) -> Result<Self> {
        Self::from_row_major(v)
    }
}

impl From<Homography> for [f64; 9] {
    fn from(h: Homography) -> Self {
        h.to_row_major()
    }
}

/// A putative point match between the target and the reference image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    /// `(x, y)` in target pixels.
    pub src: (f64, f64),
    /// `(x, y)` in reference pixels.
    pub dst: (f64, f64),
    /// Match quality in `[0, 1]`.
    pub score: f64,
}

impl Correspondence {
    pub fn new(src: (f64, f64), dst: (f64, f64)) -> Self {
        Self { src, dst, score: 1.0 }
    }

    pub fn reprojection_error(&self, h: &Homography) -> f64 {
        match h.apply(self.src.0, self.src.1) {
            Some((x, y)) => (x - self.dst.0).hypot(y - self.dst.1),
            None => f64::INFINITY,
        }
    }
}

/// How a pair was brought onto its canvas; kept so that source-space masks can follow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpGeometry {
    pub homography: Homography,
    /// Reference-image coordinates of canvas pixel `(0, 0)`, as `(x, y)`.
    pub origin: (i64, i64),
    pub target_dims: Dims,
    pub reference_dims: Dims,
}

/// Both images resampled onto one canvas, with validity and overlap masks.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPair {
    warped_target: Image,
    warped_reference: Image,
    valid_t: BinaryMask,
    valid_r: BinaryMask,
    overlap: BinaryMask,
    geometry: Option<WarpGeometry>,
}

impl AlignedPair {
    /// Wraps already-warped images. Pixels outside each validity mask are zeroed.
    pub fn new(
        warped_target: Image,
        warped_reference: Image,
        valid_t: BinaryMask,
        valid_r: BinaryMask,
    ) -> Result<Self> {
        let dims = warped_target.dims();
        dims.check(warped_reference.dims(), "warped reference")?;
        dims.check(valid_t.dims(), "target validity mask")?;
        dims.check(valid_r.dims(), "reference validity mask")?;
        let zero_outside = |img: Image, valid: &BinaryMask| {
            Image::from_fn(dims, |i, j| if valid.get(i, j) { img.pixel(i, j) } else { [0.0; 3] })
        };
        let warped_target = zero_outside(warped_target, &valid_t);
        let warped_reference = zero_outside(warped_reference, &valid_r);
        let overlap = valid_t.and(&valid_r)?;
        Ok(Self {
            warped_target,
            warped_reference,
            valid_t,
            valid_r,
            overlap,
            geometry: None,
        })
    }

    pub(crate) fn with_geometry(mut self, g: WarpGeometry) -> Self {
        self.geometry = Some(g);
        self
    }

    pub fn dims(&self) -> Dims {
        self.warped_target.dims()
    }

    pub fn warped_target(&self) -> &Image {
        &self.warped_target
    }

    pub fn warped_reference(&self) -> &Image {
        &self.warped_reference
    }

    pub fn valid_t(&self) -> &BinaryMask {
        &self.valid_t
    }

    pub fn valid_r(&self) -> &BinaryMask {
        &self.valid_r
    }

    pub fn overlap(&self) -> &BinaryMask {
        &self.overlap
    }

    pub fn geometry(&self) -> Option<&WarpGeometry> {
        self.geometry.as_ref()
    }

    /// Pixels covered by either image.
    pub fn union(&self) -> BinaryMask {
        self.valid_t.or(&self.valid_r).expect("same dims")
    }

    pub fn target_only(&self) -> BinaryMask {
        self.valid_t.minus(&self.valid_r).expect("same dims")
    }

    pub fn reference_only(&self) -> BinaryMask {
        self.valid_r.minus(&self.valid_t).expect("same dims")
    }

    /// Swaps rows and columns of every buffer.
    pub fn transpose(&self) -> Self {
        Self {
            warped_target: self.warped_target.transpose(),
            warped_reference: self.warped_reference.transpose(),
            valid_t: self.valid_t.transpose(),
            valid_r: self.valid_r.transpose(),
            overlap: self.overlap.transpose(),
            geometry: None,
        }
    }

    /// Bounding box `(rows, cols)` extent of the overlap, or `None` if it is empty.
    pub fn overlap_extent(&self) -> Option<(usize, usize)> {
        let d = self.dims();
        let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
        for i in 0..d.height {
            for j in 0..d.width {
                if self.overlap.get(i, j) {
                    i0 = i0.min(i);
                    i1 = i1.max(i);
                    j0 = j0.min(j);
                    j1 = j1.max(j);
                }
            }
        }
        (i0 != usize::MAX).then(|| (i1 - i0 + 1, j1 - j0 + 1))
    }

    fn geometry_or_err(&self) -> Result<WarpGeometry> {
        self.geometry
            .ok_or_else(|| Error::Config("pair has no warp geometry; supply canvas-space masks".into()))
    }

    /// For each canvas pixel, the nearest target pixel it was sampled from.
    fn target_sources(&self) -> Result<Vec<Option<usize>>> {
        let g = self.geometry_or_err()?;
        let inv = g.homography.inverse()?;
        let (ox, oy) = g.origin;
        let d = self.dims();
        Ok((0..d.len())
            .map(|k| {
                let (i, j) = (k / d.width, k % d.width);
                if !self.valid_t.at(k) {
                    return None;
                }
                let (x, y) = inv.apply(j as f64 + ox as f64, i as f64 + oy as f64)?;
                let (xi, yi) = (x.round(), y.round());
                let inside = xi >= 0.0
                    && yi >= 0.0
                    && (xi as usize) < g.target_dims.width
                    && (yi as usize) < g.target_dims.height;
                inside.then(|| g.target_dims.index(yi as usize, xi as usize))
            })
            .collect())
    }

    /// For each canvas pixel, the reference pixel it holds.
    fn reference_sources(&self) -> Result<Vec<Option<usize>>> {
        let g = self.geometry_or_err()?;
        let (ox, oy) = g.origin;
        let d = self.dims();
        Ok((0..d.len())
            .map(|k| {
                let (x, y) = ((k % d.width) as i64 + ox, (k / d.width) as i64 + oy);
                let inside =
                    x >= 0 && y >= 0 && (x as usize) < g.reference_dims.width && (y as usize) < g.reference_dims.height;
                inside.then(|| g.reference_dims.index(y as usize, x as usize))
            })
            .collect())
    }

    /// Carries a mask drawn in target-image coordinates onto the canvas
    /// (nearest-neighbour), clipped to the target's validity.
    pub fn target_mask_to_canvas(&self, m: &BinaryMask) -> Result<BinaryMask> {
        self.geometry_or_err()?.target_dims.check(m.dims(), "target mask")?;
        let src = self.target_sources()?;
        Ok(BinaryMask::from_fn(self.dims(), |i, j| {
            src[self.dims().index(i, j)].is_some_and(|s| m.at(s))
        }))
    }

    /// Places a mask drawn in reference-image coordinates onto the canvas.
    pub fn reference_mask_to_canvas(&self, m: &BinaryMask) -> Result<BinaryMask> {
        self.geometry_or_err()?
            .reference_dims
            .check(m.dims(), "reference mask")?;
        let src = self.reference_sources()?;
        Ok(BinaryMask::from_fn(self.dims(), |i, j| {
            src[self.dims().index(i, j)].is_some_and(|s| m.at(s))
        }))
    }

    /// Soft counterpart of [`AlignedPair::target_mask_to_canvas`]; 0 off the target.
    pub fn target_soft_to_canvas(&self, m: &SoftMask) -> Result<SoftMask> {
        self.geometry_or_err()?.target_dims.check(m.dims(), "target map")?;
        let src = self.target_sources()?;
        Ok(SoftMask::from_fn(self.dims(), |i, j| {
            src[self.dims().index(i, j)].map_or(0.0, |s| m.data()[s])
        }))
    }

    /// Soft counterpart of [`AlignedPair::reference_mask_to_canvas`]; 0 off the reference.
    pub fn reference_soft_to_canvas(&self, m: &SoftMask) -> Result<SoftMask> {
        self.geometry_or_err()?
            .reference_dims
            .check(m.dims(), "reference map")?;
        let src = self.reference_sources()?;
        Ok(SoftMask::from_fn(self.dims(), |i, j| {
            src[self.dims().index(i, j)].map_or(0.0, |s| m.data()[s])
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homography_normalises_and_inverts() {
        let h = Homography::new([[2.0, 0.0, 10.0], [0.0, 2.0, 4.0], [0.0, 0.0, 2.0]]).unwrap();
        assert_eq!(h.matrix()[2][2], 1.0);
        assert_eq!(h.apply(1.0, 1.0), Some((6.0, 3.0)));
        let inv = h.inverse().unwrap();
        let (x, y) = inv.apply(6.0, 3.0).unwrap();
        assert!((x - 1.0).abs() < 1e-12 && (y - 1.0).abs() < 1e-12);
        assert!(matches!(
            Homography::new([[1.0, 2.0, 0.0], [2.0, 4.0, 0.0], [0.0, 0.0, 1.0]]),
            Err(Error::NotInvertible)
        ));
    }

    #[test]
    fn pre_warped_pair_zeroes_invalid_pixels() {
        let d = Dims::new(2, 3);
        let img = Image::filled(d, [0.5; 3]);
        let vt = BinaryMask::from_fn(d, |_, j| j < 2);
        let vr = BinaryMask::from_fn(d, |_, j| j > 0);
        let p = AlignedPair::new(img.clone(), img, vt, vr).unwrap();
        assert_eq!(p.warped_target().pixel(0, 2), [0.0; 3]);
        assert_eq!(p.warped_reference().pixel(1, 0), [0.0; 3]);
        assert_eq!(p.overlap().count(), 2);
        assert_eq!(p.target_only().count(), 2);
        assert_eq!(p.reference_only().count(), 2);
        assert_eq!(p.overlap_extent(), Some((2, 1)));
    }
}
