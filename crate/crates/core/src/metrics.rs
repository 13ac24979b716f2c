//! Final composition and per-pair quality measures.

use serde::{Deserialize, Serialize};

use crate::alignment::AlignedPair;
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, CostMap, Image, SoftMask};
use crate::seams::{seam_pixels, Label, LabelMap};

/// Largest `|L1 + L2 - 1|` that `compose` tolerates on valid pixels.
pub const PARTITION_TOLERANCE: f64 = 1e-3;

/// Objects smaller than this, in pixels, are ignored when counting splits.
pub const MIN_COMPONENT: usize = 9;

/// Blends the warped images as `L1 * I_wt + L2 * I_wr` on the overlap.
/// Exclusive pixels copy their image; invalid pixels are black.
pub fn compose(pair: &AlignedPair, l1: &SoftMask, l2: &SoftMask) -> Result<Image> {
    let d = pair.dims();
    d.check(l1.dims(), "first mask")?;
    d.check(l2.dims(), "second mask")?;
    let mut worst: f64 = 0.0;
    for k in 0..d.len() {
        if pair.valid_t().at(k) || pair.valid_r().at(k) {
            worst = worst.max((l1.data()[k] + l2.data()[k] - 1.0).abs());
        }
    }
    if worst > PARTITION_TOLERANCE {
        return Err(Error::PartitionViolation { max_error: worst });
    }
    let (wt, wr) = (pair.warped_target(), pair.warped_reference());
    Ok(Image::from_fn(d, |i, j| {
        match (pair.valid_t().get(i, j), pair.valid_r().get(i, j)) {
            (true, true) => {
                let (a, b) = (l1.get(i, j), l2.get(i, j));
                let (p, q) = (wt.pixel(i, j), wr.pixel(i, j));
                [0, 1, 2].map(|c| a * p[c] + b * q[c])
            }
            (true, false) => wt.pixel(i, j),
            (false, true) => wr.pixel(i, j),
            (false, false) => [0.0; 3],
        }
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PsqConfig {
    pub patch_radius: usize,
}

impl Default for PsqConfig {
    fn default() -> Self {
        Self { patch_radius: 3 }
    }
}

/// Simplified patch seam quality (PSQ-s), in `[0, 1]`, lower is better.
///
/// For each seam pixel, the mean RGB distance between the two warped images
/// over the surrounding patch (clipped to the overlap), divided by `sqrt(3)`.
/// Seam pixels are weighted by `0.5 + 0.5 * saliency`. No seam gives 0.
pub fn psq(pair: &AlignedPair, labels: &LabelMap, saliency: &SoftMask, cfg: &PsqConfig) -> Result<f64> {
    let d = pair.dims();
    d.check(labels.dims(), "label map")?;
    d.check(saliency.dims(), "saliency")?;
    let seam = seam_pixels(labels, pair.overlap());
    if seam.is_empty() {
        return Ok(0.0);
    }
    // Integral images of the normalised difference and of the overlap count.
    let w1 = d.width + 1;
    let mut sum = vec![0.0; (d.height + 1) * w1];
    let mut cnt = vec![0.0; (d.height + 1) * w1];
    let (wt, wr) = (pair.warped_target(), pair.warped_reference());
    for i in 0..d.height {
        for j in 0..d.width {
            let (e, c) = if pair.overlap().get(i, j) {
                let (p, q) = (wt.pixel(i, j), wr.pixel(i, j));
                let dist = (0..3).map(|c| (p[c] - q[c]).powi(2)).sum::<f64>().sqrt();
                (dist / 3f64.sqrt(), 1.0)
            } else {
                (0.0, 0.0)
            };
            let k = (i + 1) * w1 + j + 1;
            sum[k] = e + sum[k - 1] + sum[k - w1] - sum[k - w1 - 1];
            cnt[k] = c + cnt[k - 1] + cnt[k - w1] - cnt[k - w1 - 1];
        }
    }
    let rect = |t: &[f64], i0: usize, j0: usize, i1: usize, j1: usize| {
        t[i1 * w1 + j1] - t[i0 * w1 + j1] - t[i1 * w1 + j0] + t[i0 * w1 + j0]
    };
    let r = cfg.patch_radius;
    let (mut num, mut den) = (0.0, 0.0);
    for &(i, j) in &seam {
        let (i0, j0) = (i.saturating_sub(r), j.saturating_sub(r));
        let (i1, j1) = ((i + r + 1).min(d.height), (j + r + 1).min(d.width));
        let n = rect(&cnt, i0, j0, i1, j1);
        let e = (rect(&sum, i0, j0, i1, j1) / n).clamp(0.0, 1.0);
        let w = 0.5 + 0.5 * saliency.get(i, j);
        num += e * w;
        den += w;
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// 8-connected components of `o` with at least [`MIN_COMPONENT`] pixels.
pub fn object_components(o: &BinaryMask) -> Vec<Vec<usize>> {
    let d = o.dims();
    let mut seen = vec![false; d.len()];
    let mut out = Vec::new();
    for start in 0..d.len() {
        if !o.at(start) || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut head = 0;
        while head < comp.len() {
            let k = comp[head];
            head += 1;
            let (i, j) = (k / d.width, k % d.width);
            for a in i.saturating_sub(1)..=(i + 1).min(d.height - 1) {
                for b in j.saturating_sub(1)..=(j + 1).min(d.width - 1) {
                    let q = d.index(a, b);
                    if o.at(q) && !seen[q] {
                        seen[q] = true;
                        comp.push(q);
                    }
                }
            }
        }
        if comp.len() >= MIN_COMPONENT {
            out.push(comp);
        }
    }
    out
}

/// `(failure, split_components, split_pixels)`: a component is split when it
/// carries both image labels; its minority-label pixels count as split.
pub fn object_integrity(o: &BinaryMask, labels: &LabelMap) -> Result<(bool, usize, usize)> {
    o.dims().check(labels.dims(), "label map")?;
    let (mut comps, mut pixels) = (0, 0);
    for comp in object_components(o) {
        let t = comp.iter().filter(|&&k| labels.data()[k] == Label::Target).count();
        let r = comp.iter().filter(|&&k| labels.data()[k] == Label::Reference).count();
        if t > 0 && r > 0 {
            comps += 1;
            pixels += t.min(r);
        }
    }
    Ok((comps > 0, comps, pixels))
}

/// Sum over 4-neighbour pairs carrying opposite image labels of the mean of
/// their costs.
pub fn seam_energy(cost: &CostMap, labels: &LabelMap) -> Result<f64> {
    let d = labels.dims();
    d.check(cost.dims(), "cost map")?;
    let opposite = |a: Label, b: Label| a != Label::Invalid && b != Label::Invalid && a != b;
    let mut e = 0.0;
    for i in 0..d.height {
        for j in 0..d.width {
            let l = labels.get(i, j);
            if j + 1 < d.width && opposite(l, labels.get(i, j + 1)) {
                e += 0.5 * (cost.get(i, j) + cost.get(i, j + 1));
            }
            if i + 1 < d.height && opposite(l, labels.get(i + 1, j)) {
                e += 0.5 * (cost.get(i, j) + cost.get(i + 1, j));
            }
        }
    }
    Ok(e)
}

/// Scores for one method on one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: String,
    pub psq: f64,
    pub failure: bool,
    pub split_components: usize,
    pub split_pixels: usize,
    pub seam_energy: f64,
    pub seam_length: usize,
    /// Wall-clock time of the seam method; 0 when timing is disabled.
    pub time_ms: f64,
}
