//! Foreground masks: spectral-residual saliency, thresholding, and the
//! protected object set built from both views.

use std::path::Path;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{gaussian_blur, resize_bilinear, BinaryMask, Dims, GrayImage, SoftMask};
use crate::io::read_mask;

pub const MIN_SALIENCY_SIZE: usize = 16;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SaliencyConfig {
    /// Longer side of the working resolution.
    pub work_size: usize,
    /// Gaussian smoothing of the saliency map, in working-resolution pixels.
    pub blur_sigma: f64,
}

impl Default for SaliencyConfig {
    fn default() -> Self {
        Self {
            work_size: 64,
            blur_sigma: 3.0,
        }
    }
}

/// How the two per-view masks combine into the protected set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectCombine {
    #[default]
    Union,
    Intersection,
}

fn fft2(data: &mut [Complex64], d: Dims, inverse: bool) {
    let mut planner = FftPlanner::new();
    let (row, col) = if inverse {
        (planner.plan_fft_inverse(d.width), planner.plan_fft_inverse(d.height))
    } else {
        (planner.plan_fft_forward(d.width), planner.plan_fft_forward(d.height))
    };
    for r in data.chunks_exact_mut(d.width) {
        row.process(r);
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); d.height];
    for j in 0..d.width {
        for i in 0..d.height {
            buf[i] = data[d.index(i, j)];
        }
        col.process(&mut buf);
        for i in 0..d.height {
            data[d.index(i, j)] = buf[i];
        }
    }
}

fn box3(values: &[f64], d: Dims) -> Vec<f64> {
    let mut out = vec![0.0; d.len()];
    for i in 0..d.height {
        for j in 0..d.width {
            let mut s = 0.0;
            for di in -1isize..=1 {
                for dj in -1isize..=1 {
                    let a = (i as isize + di).clamp(0, d.height as isize - 1) as usize;
                    let b = (j as isize + dj).clamp(0, d.width as isize - 1) as usize;
                    s += values[d.index(a, b)];
                }
            }
            out[d.index(i, j)] = s / 9.0;
        }
    }
    out
}

/// Spectral-residual saliency normalised so the maximum is 1.
///
/// The image is downscaled (longer side `work_size`) and standardised to zero
/// mean and unit variance, so any affine intensity change leaves the map
/// unchanged. A constant image yields all zeros.
pub fn spectral_residual(gray: &GrayImage, cfg: &SaliencyConfig) -> Result<SoftMask> {
    let d = gray.dims();
    if d.height < MIN_SALIENCY_SIZE || d.width < MIN_SALIENCY_SIZE {
        return Err(Error::TooSmall {
            what: "saliency input",
            height: d.height,
            width: d.width,
            min: MIN_SALIENCY_SIZE,
        });
    }
    if cfg.work_size < 4 {
        return Err(Error::Config("saliency work_size must be at least 4".into()));
    }
    let long = d.height.max(d.width) as f64;
    let f = (cfg.work_size as f64 / long).min(1.0);
    let wd = Dims::new(
        ((d.height as f64 * f).round() as usize).max(1),
        ((d.width as f64 * f).round() as usize).max(1),
    );
    // Anti-alias before decimating.
    let pre = if f < 1.0 {
        gaussian_blur(gray.data(), d, 0.5 / f)
    } else {
        gray.data().to_vec()
    };
    let small = resize_bilinear(&pre, d, wd);
    let n = small.len() as f64;
    let mean = small.iter().sum::<f64>() / n;
    let var = small.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var.sqrt() < 1e-9 {
        return Ok(SoftMask::filled(d, 0.0));
    }
    let sd = var.sqrt();
    let mut spec: Vec<Complex64> = small.iter().map(|v| Complex64::new((v - mean) / sd, 0.0)).collect();
    fft2(&mut spec, wd, false);
    // The mean is removed, so the DC bin holds only rounding noise.
    spec[0] = Complex64::new(0.0, 0.0);
    let log_amp: Vec<f64> = spec.iter().map(|c| (c.norm() + 1e-8).ln()).collect();
    let smooth = box3(&log_amp, wd);
    for (k, c) in spec.iter_mut().enumerate() {
        let phase = c.arg();
        *c = Complex64::from_polar((log_amp[k] - smooth[k]).exp(), phase);
    }
    fft2(&mut spec, wd, true);
    let energy: Vec<f64> = spec.iter().map(|c| c.norm_sqr()).collect();
    let blurred = gaussian_blur(&energy, wd, cfg.blur_sigma);
    let full = resize_bilinear(&blurred, wd, d);
    let max = full.iter().copied().fold(0.0, f64::max);
    if !(max > 1e-300) {
        return Ok(SoftMask::filled(d, 0.0));
    }
    Ok(SoftMask::from_vec_clamped(
        d,
        full.into_iter().map(|v| v / max).collect(),
    ))
}

/// `1` where `s >= tau`.
pub fn binarize(s: &SoftMask, tau: f64) -> Result<BinaryMask> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Config(format!("threshold {tau} outside (0, 1)")));
    }
    Ok(BinaryMask::from_fn(s.dims(), |i, j| s.get(i, j) >= tau))
}

/// Removes speckle: one 3x3 opening then one 3x3 closing.
pub fn cleanup(m: &BinaryMask) -> BinaryMask {
    m.open_close()
}

pub fn object_union(m_t: &BinaryMask, m_r: &BinaryMask) -> Result<BinaryMask> {
    m_t.or(m_r)
}

pub fn object_intersection(m_t: &BinaryMask, m_r: &BinaryMask) -> Result<BinaryMask> {
    m_t.and(m_r)
}

pub fn combine_objects(m_t: &BinaryMask, m_r: &BinaryMask, how: ObjectCombine) -> Result<BinaryMask> {
    match how {
        ObjectCombine::Union => object_union(m_t, m_r),
        ObjectCombine::Intersection => object_intersection(m_t, m_r),
    }
}

/// Reads a single-channel mask file and checks it against `expected`.
pub fn load_mask(path: impl AsRef<Path>, expected: Dims) -> Result<BinaryMask> {
    let m = read_mask(path)?;
    expected.check(m.dims(), "mask file")?;
    Ok(m)
}
