//! Pixel buffers, masks and the per-pixel operations every seam finder consumes.
//!
//! All intensities are `f64` in `[0, 1]`, stored row-major. Pixel `(i, j)` is
//! row `i`, column `j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Height and width of a raster, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub height: usize,
    pub width: usize,
}

impl Dims {
    pub const fn new(height: usize, width: usize) -> Self {
        Self { height, width }
    }

    pub const fn len(&self) -> usize {
        self.height * self.width
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub const fn index(&self, i: usize, j: usize) -> usize {
        i * self.width + j
    }

    pub const fn transposed(&self) -> Self {
        Self::new(self.width, self.height)
    }

    pub(crate) fn check(&self, other: Dims, what: &'static str) -> Result<()> {
        if *self == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what,
                expected: (self.height, self.width),
                found: (other.height, other.width),
            })
        }
    }

    /// 4-neighbours of `(i, j)` that lie inside the raster.
    pub fn neighbors4(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> {
        let (h, w) = (self.height, self.width);
        let up = (i > 0).then(|| (i - 1, j));
        let down = (i + 1 < h).then(|| (i + 1, j));
        let left = (j > 0).then(|| (i, j - 1));
        let right = (j + 1 < w).then(|| (i, j + 1));
        [up, left, right, down].into_iter().flatten()
    }
}

fn check_unit(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidValue(format!("{what} value {v} outside [0, 1]")))
    }
}

fn check_len(dims: Dims, len: usize, per_pixel: usize) -> Result<()> {
    if dims.len() * per_pixel == len {
        Ok(())
    } else {
        Err(Error::InvalidValue(format!(
            "buffer of length {len} does not match {}x{}x{per_pixel}",
            dims.height, dims.width
        )))
    }
}

/// Three-channel RGB image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    dims: Dims,
    data: Vec<f64>,
}

impl Image {
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        check_len(dims, data.len(), 3)?;
        for &v in &data {
            check_unit(v, "intensity")?;
        }
        Ok(Self { dims, data })
    }

    pub fn filled(dims: Dims, rgb: [f64; 3]) -> Self {
        let rgb = rgb.map(|v| v.clamp(0.0, 1.0));
        let mut data = Vec::with_capacity(dims.len() * 3);
        for _ in 0..dims.len() {
            data.extend_from_slice(&rgb);
        }
        Self { dims, data }
    }

    /// Builds an image from a per-pixel function; values are clamped into `[0, 1]`.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(dims.len() * 3);
        for i in 0..dims.height {
            for j in 0..dims.width {
                data.extend(f(i, j).iter().map(|v| v.clamp(0.0, 1.0)));
            }
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn height(&self) -> usize {
        self.dims.height
    }

    pub fn width(&self) -> usize {
        self.dims.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, i: usize, j: usize) -> [f64; 3] {
        let k = 3 * self.dims.index(i, j);
        [self.data[k], self.data[k + 1], self.data[k + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, i: usize, j: usize, rgb: [f64; 3]) {
        let k = 3 * self.dims.index(i, j);
        for (d, v) in self.data[k..k + 3].iter_mut().zip(rgb) {
            *d = v.clamp(0.0, 1.0);
        }
    }

    pub fn transpose(&self) -> Self {
        let t = self.dims.transposed();
        Self::from_fn(t, |i, j| self.pixel(j, i))
    }

    /// Largest per-channel absolute difference between two equally sized images.
    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        self.dims.check(other.dims, "image")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Single-channel intensity image.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    dims: Dims,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        check_len(dims, data.len(), 1)?;
        for &v in &data {
            check_unit(v, "intensity")?;
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for i in 0..dims.height {
            for j in 0..dims.width {
                data.push(f(i, j).clamp(0.0, 1.0));
            }
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.dims.index(i, j)]
    }
}

/// Hard {0, 1} labels per pixel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    dims: Dims,
    data: Vec<u8>,
}

impl BinaryMask {
    pub fn new(dims: Dims, data: Vec<u8>) -> Result<Self> {
        check_len(dims, data.len(), 1)?;
        if let Some(v) = data.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidValue(format!("binary mask value {v}")));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![0; dims.len()],
        }
    }

    pub fn ones(dims: Dims) -> Self {
        Self {
            dims,
            data: vec![1; dims.len()],
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for i in 0..dims.height {
            for j in 0..dims.width {
                data.push(u8::from(f(i, j)));
            }
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[self.dims.index(i, j)] != 0
    }

    #[inline]
    pub fn at(&self, k: usize) -> bool {
        self.data[k] != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let k = self.dims.index(i, j);
        self.data[k] = u8::from(v);
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        self.dims.check(other.dims, "mask")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| u8::from(f(a != 0, b != 0)))
            .collect();
        Ok(Self { dims: self.dims, data })
    }

    pub fn and(&self, other: &BinaryMask) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    /// Pixels set in `self` but not in `other`.
    pub fn minus(&self, other: &BinaryMask) -> Result<Self> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn not(&self) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&v| 1 - v).collect(),
        }
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims == other.dims && self.data.iter().zip(&other.data).all(|(&a, &b)| a <= b)
    }

    pub fn to_soft(&self) -> SoftMask {
        SoftMask {
            dims: self.dims,
            data: self.data.iter().map(|&v| f64::from(v)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let t = self.dims.transposed();
        Self::from_fn(t, |i, j| self.get(j, i))
    }

    /// Centroid `(row, col)` of the set pixels, if any.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let (mut si, mut sj, mut n) = (0.0, 0.0, 0usize);
        for i in 0..self.dims.height {
            for j in 0..self.dims.width {
                if self.get(i, j) {
                    si += i as f64;
                    sj += j as f64;
                    n += 1;
                }
            }
        }
        (n > 0).then(|| (si / n as f64, sj / n as f64))
    }

    fn morph3(&self, dilate: bool) -> Self {
        let d = self.dims;
        Self::from_fn(d, |i, j| {
            let i0 = i.saturating_sub(1);
            let j0 = j.saturating_sub(1);
            let i1 = (i + 1).min(d.height - 1);
            let j1 = (j + 1).min(d.width - 1);
            let mut any = false;
            let mut all = true;
            for a in i0..=i1 {
                for b in j0..=j1 {
                    let v = self.get(a, b);
                    any |= v;
                    all &= v;
                }
            }
            if dilate {
                any
            } else {
                all
            }
        })
    }

    /// 3x3 erosion; pixels beyond the border are ignored.
    pub fn erode(&self) -> Self {
        self.morph3(false)
    }

    /// 3x3 dilation.
    pub fn dilate(&self) -> Self {
        self.morph3(true)
    }

    /// Morphological opening followed by closing, one 3x3 pass each.
    pub fn open_close(&self) -> Self {
        self.erode().dilate().dilate().erode()
    }
}

/// Per-pixel weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask {
    dims: Dims,
    data: Vec<f64>,
}

impl SoftMask {
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        check_len(dims, data.len(), 1)?;
        for &v in &data {
            check_unit(v, "mask")?;
        }
        Ok(Self { dims, data })
    }

    pub fn filled(dims: Dims, v: f64) -> Self {
        Self {
            dims,
            data: vec![v.clamp(0.0, 1.0); dims.len()],
        }
    }

    /// Builds a mask from a per-pixel function; values are clamped into `[0, 1]`.
    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for i in 0..dims.height {
            for j in 0..dims.width {
                data.push(f(i, j).clamp(0.0, 1.0));
            }
        }
        Self { dims, data }
    }

    pub(crate) fn from_vec_clamped(dims: Dims, mut data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims.len());
        for v in &mut data {
            *v = v.clamp(0.0, 1.0);
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.dims.index(i, j)]
    }

    pub fn transpose(&self) -> Self {
        let t = self.dims.transposed();
        Self::from_fn(t, |i, j| self.get(j, i))
    }
}

/// Anything that can be read as per-pixel weights in `[0, 1]`.
pub trait MaskWeights {
    fn dims(&self) -> Dims;
    fn weight(&self, k: usize) -> f64;
}

impl MaskWeights for BinaryMask {
    fn dims(&self) -> Dims {
        self.dims
    }
    fn weight(&self, k: usize) -> f64 {
        f64::from(self.data[k])
    }
}

impl MaskWeights for SoftMask {
    fn dims(&self) -> Dims {
        self.dims
    }
    fn weight(&self, k: usize) -> f64 {
        self.data[k]
    }
}

/// Non-negative per-pixel cost, defined on `domain` and zero elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMap {
    data: Vec<f64>,
    domain: BinaryMask,
}

impl CostMap {
    pub fn new(data: Vec<f64>, domain: BinaryMask) -> Result<Self> {
        check_len(domain.dims, data.len(), 1)?;
        for (k, &v) in data.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidValue(format!("cost {v} is negative or non-finite")));
            }
            if !domain.at(k) && v != 0.0 {
                return Err(Error::InvalidValue("cost must be zero outside its domain".into()));
            }
        }
        Ok(Self { data, domain })
    }

    pub fn zeros(domain: BinaryMask) -> Self {
        Self {
            data: vec![0.0; domain.dims.len()],
            domain,
        }
    }

    pub fn dims(&self) -> Dims {
        self.domain.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn domain(&self) -> &BinaryMask {
        &self.domain
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.domain.dims.index(i, j)]
    }

    pub fn transpose(&self) -> Self {
        let t = self.dims().transposed();
        let mut data = Vec::with_capacity(t.len());
        for i in 0..t.height {
            for j in 0..t.width {
                data.push(self.get(j, i));
            }
        }
        Self {
            data,
            domain: self.domain.transpose(),
        }
    }
}

/// Which photometric cost the classic seam finders minimise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    /// Euclidean RGB distance.
    #[default]
    Color,
    /// Magnitude of the difference between luma gradients.
    Gradient,
}

/// Rec. 601 luma.
pub fn to_grayscale(img: &Image) -> GrayImage {
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]).clamp(0.0, 1.0))
        .collect();
    GrayImage { dims: img.dims, data }
}

/// Euclidean RGB distance inside `domain`, zero outside.
pub fn color_difference_map(a: &Image, b: &Image, domain: &BinaryMask) -> Result<CostMap> {
    a.dims.check(b.dims, "image pair")?;
    a.dims.check(domain.dims, "cost domain")?;
    let data = (0..a.dims.len())
        .map(|k| {
            if !domain.at(k) {
                return 0.0;
            }
            let pa = &a.data[3 * k..3 * k + 3];
            let pb = &b.data[3 * k..3 * k + 3];
            pa.iter().zip(pb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
        })
        .collect();
    Ok(CostMap {
        data,
        domain: domain.clone(),
    })
}

/// Central-difference luma gradient, one-sided at the border.
fn luma_gradient(g: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let d = g.dims;
    let mut gx = vec![0.0; d.len()];
    let mut gy = vec![0.0; d.len()];
    for i in 0..d.height {
        for j in 0..d.width {
            let (jl, jr) = (j.saturating_sub(1), (j + 1).min(d.width - 1));
            let (iu, id) = (i.saturating_sub(1), (i + 1).min(d.height - 1));
            let k = d.index(i, j);
            if jr > jl {
                gx[k] = (g.get(i, jr) - g.get(i, jl)) / (jr - jl) as f64;
            }
            if id > iu {
                gy[k] = (g.get(id, j) - g.get(iu, j)) / (id - iu) as f64;
            }
        }
    }
    (gx, gy)
}

/// Gradient-domain cost: `|grad(a) - grad(b)|` on luma, zero outside `domain`.
pub fn gradient_difference_map(a: &Image, b: &Image, domain: &BinaryMask) -> Result<CostMap> {
    a.dims.check(b.dims, "image pair")?;
    a.dims.check(domain.dims, "cost domain")?;
    let (ax, ay) = luma_gradient(&to_grayscale(a));
    let (bx, by) = luma_gradient(&to_grayscale(b));
    let data = (0..a.dims.len())
        .map(|k| {
            if domain.at(k) {
                (ax[k] - bx[k]).hypot(ay[k] - by[k])
            } else {
                0.0
            }
        })
        .collect();
    Ok(CostMap {
        data,
        domain: domain.clone(),
    })
}

pub fn cost_map(kind: CostKind, a: &Image, b: &Image, domain: &BinaryMask) -> Result<CostMap> {
    match kind {
        CostKind::Color => color_difference_map(a, b, domain),
        CostKind::Gradient => gradient_difference_map(a, b, domain),
    }
}

/// Sum of all weights.
pub fn mask_area(m: &SoftMask) -> f64 {
    m.data.iter().sum()
}

/// Elementwise product.
pub fn mask_intersect(a: &impl MaskWeights, b: &SoftMask) -> Result<SoftMask> {
    a.dims().check(b.dims, "mask intersection")?;
    let data = (0..b.dims.len()).map(|k| a.weight(k) * b.data[k]).collect();
    Ok(SoftMask { dims: b.dims, data })
}

/// Mean over the `(2r+1)^2` window restricted to pixels where `support` is set.
/// Pixels outside `support` keep their value.
pub fn masked_box_blur(values: &[f64], dims: Dims, support: &BinaryMask, radius: usize) -> Vec<f64> {
    debug_assert_eq!(values.len(), dims.len());
    let r = radius as isize;
    let mut out = values.to_vec();
    for i in 0..dims.height {
        for j in 0..dims.width {
            if !support.get(i, j) {
                continue;
            }
            let (mut sum, mut n) = (0.0, 0usize);
            for di in -r..=r {
                for dj in -r..=r {
                    let (a, b) = (i as isize + di, j as isize + dj);
                    if a < 0 || b < 0 || a >= dims.height as isize || b >= dims.width as isize {
                        continue;
                    }
                    let (a, b) = (a as usize, b as usize);
                    if support.get(a, b) {
                        sum += values[dims.index(a, b)];
                        n += 1;
                    }
                }
            }
            out[dims.index(i, j)] = sum / n as f64;
        }
    }
    out
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let r = (3.0 * sigma).ceil().max(1.0) as usize;
    let mut k: Vec<f64> = (0..=2 * r)
        .map(|t| {
            let x = t as f64 - r as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(values: &[f64], dims: Dims, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 || dims.is_empty() {
        return values.to_vec();
    }
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    let mut tmp = vec![0.0; dims.len()];
    for i in 0..dims.height {
        for j in 0..dims.width {
            tmp[dims.index(i, j)] = k
                .iter()
                .enumerate()
                .map(|(t, w)| w * values[dims.index(i, clamp(j as isize + t as isize - r, dims.width))])
                .sum();
        }
    }
    let mut out = vec![0.0; dims.len()];
    for i in 0..dims.height {
        for j in 0..dims.width {
            out[dims.index(i, j)] = k
                .iter()
                .enumerate()
                .map(|(t, w)| w * tmp[dims.index(clamp(i as isize + t as isize - r, dims.height), j)])
                .sum();
        }
    }
    out
}

/// Bilinear resampling onto `to`, aligning pixel centres.
pub fn resize_bilinear(values: &[f64], from: Dims, to: Dims) -> Vec<f64> {
    let sy = from.height as f64 / to.height as f64;
    let sx = from.width as f64 / to.width as f64;
    let mut out = Vec::with_capacity(to.len());
    for i in 0..to.height {
        let y = ((i as f64 + 0.5) * sy - 0.5).clamp(0.0, (from.height - 1) as f64);
        let y0 = y.floor() as usize;
        let y1 = (y0 + 1).min(from.height - 1);
        let fy = y - y0 as f64;
        for j in 0..to.width {
            let x = ((j as f64 + 0.5) * sx - 0.5).clamp(0.0, (from.width - 1) as f64);
            let x0 = x.floor() as usize;
            let x1 = (x0 + 1).min(from.width - 1);
            let fx = x - x0 as f64;
            let v00 = values[from.index(y0, x0)];
            let v01 = values[from.index(y0, x1)];
            let v10 = values[from.index(y1, x0)];
            let v11 = values[from.index(y1, x1)];
            out.push((1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(h: usize, w: usize) -> Dims {
        Dims::new(h, w)
    }

    #[test]
    fn grayscale_examples() {
        let black = Image::filled(d(3, 4), [0.0; 3]);
        assert!(to_grayscale(&black).data().iter().all(|&v| v == 0.0));
        let white = Image::filled(d(3, 4), [1.0; 3]);
        assert!(to_grayscale(&white).data().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        let red = Image::filled(d(2, 2), [1.0, 0.0, 0.0]);
        assert!(to_grayscale(&red).data().iter().all(|&v| (v - 0.299).abs() < 1e-15));
    }

    #[test]
    fn color_difference_examples() {
        let dims = d(4, 5);
        let a = Image::from_fn(dims, |i, j| [i as f64 / 4.0, j as f64 / 5.0, 0.3]);
        let same = color_difference_map(&a, &a, &BinaryMask::ones(dims)).unwrap();
        assert!(same.data().iter().all(|&v| v == 0.0));

        let black = Image::filled(dims, [0.0; 3]);
        let white = Image::filled(dims, [1.0; 3]);
        let full = color_difference_map(&black, &white, &BinaryMask::ones(dims)).unwrap();
        assert!(full.data().iter().all(|&v| (v - 3f64.sqrt()).abs() < 1e-15));

        let none = color_difference_map(&black, &white, &BinaryMask::zeros(dims)).unwrap();
        assert!(none.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn color_difference_rejects_mismatch() {
        let a = Image::filled(d(2, 2), [0.0; 3]);
        let b = Image::filled(d(2, 3), [0.0; 3]);
        assert!(matches!(
            color_difference_map(&a, &b, &BinaryMask::ones(d(2, 2))),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            color_difference_map(&a, &a, &BinaryMask::ones(d(3, 2))),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn area_examples() {
        assert_eq!(mask_area(&SoftMask::filled(d(2, 2), 1.0)), 4.0);
        assert_eq!(mask_area(&SoftMask::filled(d(2, 2), 0.0)), 0.0);
        let m = SoftMask::new(d(2, 2), vec![1.0, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(mask_area(&m), 1.5);
    }

    #[test]
    fn intersect_examples() {
        let b = SoftMask::new(d(2, 2), vec![0.1, 0.7, 0.3, 0.9]).unwrap();
        assert_eq!(mask_intersect(&BinaryMask::ones(d(2, 2)), &b).unwrap(), b);
        let z = mask_intersect(&BinaryMask::zeros(d(2, 2)), &b).unwrap();
        assert!(z.data().iter().all(|&v| v == 0.0));
        let a = BinaryMask::new(d(2, 2), vec![1, 0, 0, 1]).unwrap();
        let half = SoftMask::filled(d(2, 2), 0.5);
        assert_eq!(mask_intersect(&a, &half).unwrap().data(), &[0.5, 0.0, 0.0, 0.5]);
        assert!(mask_intersect(&BinaryMask::ones(d(2, 3)), &half).is_err());
    }

    #[test]
    fn constructors_enforce_invariants() {
        assert!(Image::new(d(1, 1), vec![0.0, 1.5, 0.0]).is_err());
        assert!(Image::new(d(1, 2), vec![0.0; 3]).is_err());
        assert!(BinaryMask::new(d(1, 2), vec![0, 2]).is_err());
        assert!(SoftMask::new(d(1, 1), vec![-0.1]).is_err());
        assert!(CostMap::new(vec![1.0, 0.0], BinaryMask::new(d(1, 2), vec![0, 1]).unwrap()).is_err());
        assert!(CostMap::new(vec![-1.0], BinaryMask::ones(d(1, 1))).is_err());
    }

    #[test]
    fn open_close_removes_speckle_and_fills_pinholes() {
        let dims = d(14, 14);
        let mut m = BinaryMask::from_fn(dims, |i, j| (2..11).contains(&i) && (2..11).contains(&j));
        m.set(6, 6, false); // pinhole
        m.set(0, 13, true); // speckle
        let c = m.open_close();
        assert!(c.get(6, 6));
        assert!(!c.get(0, 13));
        assert!(c.get(2, 2) && c.get(10, 10));
    }

    #[test]
    fn gaussian_blur_preserves_constants() {
        let dims = d(7, 9);
        let v = vec![0.25; dims.len()];
        assert!(gaussian_blur(&v, dims, 1.5).iter().all(|x| (x - 0.25).abs() < 1e-12));
    }

    #[test]
    fn resize_identity_is_exact() {
        let dims = d(5, 6);
        let v: Vec<f64> = (0..dims.len()).map(|k| k as f64).collect();
        assert_eq!(resize_bilinear(&v, dims, dims), v);
    }
}
