use serde::{Deserialize, Serialize};

use super::{AlignedPair, Homography, WarpGeometry};
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, Dims, Image};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct WarpConfig {
    /// Largest canvas, in pixels, that `warp_pair` will allocate.
    pub max_area: usize,
}

impl Default for WarpConfig {
    fn default() -> Self {
        Self { max_area: 64_000_000 }
    }
}

const EDGE_EPS: f64 = 1e-9;

/// Bilinear sample at `(x, y)`, or `None` when any of the four taps would fall
/// outside the image.
fn sample(img: &Image, x: f64, y: f64) -> Option<[f64; 3]> {
    let (w, h) = (img.width() as f64, img.height() as f64);
    if !(x >= -EDGE_EPS && y >= -EDGE_EPS && x <= w - 1.0 + EDGE_EPS && y <= h - 1.0 + EDGE_EPS) {
        return None;
    }
    let x = x.clamp(0.0, w - 1.0);
    let y = y.clamp(0.0, h - 1.0);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let (p00, p01, p10, p11) = (
        img.pixel(y0, x0),
        img.pixel(y0, x1),
        img.pixel(y1, x0),
        img.pixel(y1, x1),
    );
    let mut out = [0.0; 3];
    for c in 0..3 {
        let top = (1.0 - fx) * p00[c] + fx * p01[c];
        let bottom = (1.0 - fx) * p10[c] + fx * p11[c];
        out[c] = ((1.0 - fy) * top + fy * bottom).clamp(0.0, 1.0);
    }
    Some(out)
}

/// Resamples `target` into the reference frame through `h` (target to
/// reference) and places both on the tight canvas enclosing their footprints.
pub fn warp_pair(target: &Image, reference: &Image, h: &Homography, cfg: &WarpConfig) -> Result<AlignedPair> {
    if target.dims().is_empty() || reference.dims().is_empty() {
        return Err(Error::InvalidValue("empty input image".into()));
    }
    let (tw, th) = ((target.width() - 1) as f64, (target.height() - 1) as f64);
    let mut xmin: f64 = 0.0;
    let mut ymin: f64 = 0.0;
    let mut xmax = (reference.width() - 1) as f64;
    let mut ymax = (reference.height() - 1) as f64;
    for (x, y) in [(0.0, 0.0), (tw, 0.0), (tw, th), (0.0, th)] {
        let (u, v) = h
            .apply(x, y)
            .ok_or_else(|| Error::Degenerate("target corner maps to infinity".into()))?;
        let w = {
            let m = h.matrix();
            m[2][0] * x + m[2][1] * y + m[2][2]
        };
        if w <= 0.0 || !u.is_finite() || !v.is_finite() {
            return Err(Error::Degenerate("target footprint crosses the horizon".into()));
        }
        xmin = xmin.min(u);
        ymin = ymin.min(v);
        xmax = xmax.max(u);
        ymax = ymax.max(v);
    }
    let x0 = (xmin + EDGE_EPS).floor();
    let y0 = (ymin + EDGE_EPS).floor();
    let x1 = (xmax - EDGE_EPS).ceil();
    let y1 = (ymax - EDGE_EPS).ceil();
    let width = x1 - x0 + 1.0;
    let height = y1 - y0 + 1.0;
    let area = width * height;
    if !area.is_finite() || area > cfg.max_area as f64 {
        return Err(Error::CanvasTooLarge {
            area: if area.is_finite() { area as usize } else { usize::MAX },
            max: cfg.max_area,
        });
    }
    let dims = Dims::new(height as usize, width as usize);
    let origin = (x0 as i64, y0 as i64);
    let inv = h.inverse()?;

    let mut wt = Image::filled(dims, [0.0; 3]);
    let mut wr = Image::filled(dims, [0.0; 3]);
    let mut vt = BinaryMask::zeros(dims);
    let mut vr = BinaryMask::zeros(dims);
    for i in 0..dims.height {
        for j in 0..dims.width {
            let (rx, ry) = (j as i64 + origin.0, i as i64 + origin.1);
            if rx >= 0 && ry >= 0 && (rx as usize) < reference.width() && (ry as usize) < reference.height() {
                wr.set_pixel(i, j, reference.pixel(ry as usize, rx as usize));
                vr.set(i, j, true);
            }
            if let Some((sx, sy)) = inv.apply(rx as f64, ry as f64) {
                if let Some(p) = sample(target, sx, sy) {
                    wt.set_pixel(i, j, p);
                    vt.set(i, j, true);
                }
            }
        }
    }
    let geometry = WarpGeometry {
        homography: *h,
        origin,
        target_dims: target.dims(),
        reference_dims: reference.dims(),
    };
    Ok(AlignedPair::new(wt, wr, vt, vr)?.with_geometry(geometry))
}
