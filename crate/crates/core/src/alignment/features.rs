use serde::{Deserialize, Serialize};

use super::Correspondence;
use crate::error::{Error, Result};
use crate::imaging::{gaussian_blur, to_grayscale, Dims, GrayImage, Image};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    /// Half-size of the square NCC patch.
    pub patch_radius: usize,
    /// Harris sensitivity `k` in `det - k tr^2`.
    pub harris_k: f64,
    /// Structure-tensor smoothing.
    pub harris_sigma: f64,
    /// Corners must exceed this fraction of the strongest response.
    pub relative_threshold: f64,
    /// Non-maximum suppression radius.
    pub nms_radius: usize,
    pub max_corners: usize,
    /// Mutual-best pairs below this NCC are dropped.
    pub min_score: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            patch_radius: 7,
            harris_k: 0.04,
            harris_sigma: 1.5,
            relative_threshold: 0.01,
            nms_radius: 3,
            max_corners: 500,
            min_score: 0.5,
        }
    }
}

pub const MIN_MATCH_SIZE: usize = 32;

fn sobel(g: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let d = g.dims();
    let mut gx = vec![0.0; d.len()];
    let mut gy = vec![0.0; d.len()];
    let at = |i: isize, j: isize| {
        let i = i.clamp(0, d.height as isize - 1) as usize;
        let j = j.clamp(0, d.width as isize - 1) as usize;
        g.get(i, j)
    };
    for i in 0..d.height as isize {
        for j in 0..d.width as isize {
            let k = d.index(i as usize, j as usize);
            gx[k] = (at(i - 1, j + 1) + 2.0 * at(i, j + 1) + at(i + 1, j + 1))
                - (at(i - 1, j - 1) + 2.0 * at(i, j - 1) + at(i + 1, j - 1));
            gy[k] = (at(i + 1, j - 1) + 2.0 * at(i + 1, j) + at(i + 1, j + 1))
                - (at(i - 1, j - 1) + 2.0 * at(i - 1, j) + at(i - 1, j + 1));
        }
    }
    (gx, gy)
}

/// Harris corners as `(row, col)`, strongest first, at least `border` pixels
/// from every edge.
pub fn harris_corners(g: &GrayImage, cfg: &MatchConfig, border: usize) -> Vec<(usize, usize)> {
    let d = g.dims();
    let (gx, gy) = sobel(g);
    let xx: Vec<f64> = gx.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = gy.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| a * b).collect();
    let sxx = gaussian_blur(&xx, d, cfg.harris_sigma);
    let syy = gaussian_blur(&yy, d, cfg.harris_sigma);
    let sxy = gaussian_blur(&xy, d, cfg.harris_sigma);
    let response: Vec<f64> = (0..d.len())
        .map(|k| {
            let tr = sxx[k] + syy[k];
            sxx[k] * syy[k] - sxy[k] * sxy[k] - cfg.harris_k * tr * tr
        })
        .collect();
    let peak = response.iter().copied().fold(0.0, f64::max);
    if peak <= 1e-10 {
        return Vec::new();
    }
    let thr = (cfg.relative_threshold * peak).max(1e-10);
    let r = cfg.nms_radius as isize;
    if d.height <= 2 * border || d.width <= 2 * border {
        return Vec::new();
    }
    let mut corners: Vec<(f64, usize, usize)> = Vec::new();
    for i in border..d.height - border {
        for j in border..d.width - border {
            let k = d.index(i, j);
            let v = response[k];
            if v < thr {
                continue;
            }
            // Strict maximum, ties broken towards the lower raster index.
            let mut is_max = true;
            'nms: for di in -r..=r {
                for dj in -r..=r {
                    let (a, b) = (i as isize + di, j as isize + dj);
                    if (di == 0 && dj == 0) || a < 0 || b < 0 || a >= d.height as isize || b >= d.width as isize {
                        continue;
                    }
                    let o = response[d.index(a as usize, b as usize)];
                    let earlier = (a as usize, b as usize) < (i, j);
                    if o > v || (o == v && earlier) {
                        is_max = false;
                        break 'nms;
                    }
                }
            }
            if is_max {
                corners.push((v, i, j));
            }
        }
    }
    corners.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    corners.truncate(cfg.max_corners);
    corners.into_iter().map(|(_, i, j)| (i, j)).collect()
}

/// Zero-mean, unit-norm patch; `None` for flat patches.
fn patch_descriptor(g: &GrayImage, i: usize, j: usize, r: usize) -> Option<Vec<f64>> {
    let mut p = Vec::with_capacity((2 * r + 1) * (2 * r + 1));
    for a in i - r..=i + r {
        for b in j - r..=j + r {
            p.push(g.get(a, b));
        }
    }
    let mean = p.iter().sum::<f64>() / p.len() as f64;
    p.iter_mut().for_each(|v| *v -= mean);
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-9 {
        return None;
    }
    p.iter_mut().for_each(|v| *v /= norm);
    Some(p)
}

fn describe(g: &GrayImage, cfg: &MatchConfig) -> Vec<((usize, usize), Vec<f64>)> {
    harris_corners(g, cfg, cfg.patch_radius + 1)
        .into_iter()
        .filter_map(|(i, j)| patch_descriptor(g, i, j, cfg.patch_radius).map(|p| ((i, j), p)))
        .collect()
}

fn check_size(d: Dims) -> Result<()> {
    if d.height < MIN_MATCH_SIZE || d.width < MIN_MATCH_SIZE {
        return Err(Error::TooSmall {
            what: "image",
            height: d.height,
            width: d.width,
            min: MIN_MATCH_SIZE,
        });
    }
    Ok(())
}

/// Harris corners matched by mutual-best normalised cross-correlation.
/// Sorted by descending score.
pub fn detect_matches(a: &Image, b: &Image, cfg: &MatchConfig) -> Result<Vec<Correspondence>> {
    check_size(a.dims())?;
    check_size(b.dims())?;
    let da = describe(&to_grayscale(a), cfg);
    let db = describe(&to_grayscale(b), cfg);
    if da.is_empty() || db.is_empty() {
        return Ok(Vec::new());
    }
    let ncc = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| x * y).sum::<f64>();
    let mut scores = vec![0.0; da.len() * db.len()];
    for (s, (_, p)) in da.iter().enumerate() {
        for (t, (_, q)) in db.iter().enumerate() {
            scores[s * db.len() + t] = ncc(p, q);
        }
    }
    // First index wins ties.
    let argmax = |it: &mut dyn Iterator<Item = (usize, f64)>| {
        it.fold(
            (usize::MAX, f64::NEG_INFINITY),
            |best, (k, v)| if v > best.1 { (k, v) } else { best },
        )
    };
    let best_in_b: Vec<(usize, f64)> = (0..da.len())
        .map(|s| argmax(&mut (0..db.len()).map(|t| (t, scores[s * db.len() + t]))))
        .collect();
    let best_in_a: Vec<usize> = (0..db.len())
        .map(|t| argmax(&mut (0..da.len()).map(|s| (s, scores[s * db.len() + t]))).0)
        .collect();
    let mut out: Vec<Correspondence> = best_in_b
        .iter()
        .enumerate()
        .filter(|&(s, &(t, score))| best_in_a[t] == s && score >= cfg.min_score)
        .map(|(s, &(t, score))| {
            let (ia, ja) = da[s].0;
            let (ib, jb) = db[t].0;
            Correspondence {
                src: (ja as f64, ia as f64),
                dst: (jb as f64, ib as f64),
                score: score.clamp(0.0, 1.0),
            }
        })
        .collect();
    out.sort_by(|x, y| {
        y.score
            .total_cmp(&x.score)
            .then(x.src.1.total_cmp(&y.src.1))
            .then(x.src.0.total_cmp(&y.src.0))
    });
    Ok(out)
}
