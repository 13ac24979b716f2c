use super::loss::Problem;
use super::{sigmoid, Descent, InitMethod, MaskLogits, OptimConfig, TraceRecord};
use crate::alignment::AlignedPair;
use crate::error::{Error, Result};
use crate::imaging::{masked_box_blur, BinaryMask, CostMap, SoftMask};
use crate::metrics::seam_energy;
use crate::seams::{seam_pixels, voronoi_seam, Label, LabelMap, SeamResult};

/// Magnitude of the initial overlap logits before blurring.
const INIT_LOGIT: f64 = 2.0;
const INIT_BLUR_RADIUS: usize = 2;
/// Backtracking gives up below this step.
const MIN_STEP: f64 = 1e-12;

/// Starting logits for `pair`. The Voronoi start maps the Voronoi labels to
/// `±2` and box-blurs them over the valid region; it falls back to the
/// uniform start when an exclusive region is empty.
pub fn init_logits(pair: &AlignedPair, method: InitMethod) -> Result<MaskLogits> {
    if pair.overlap().is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let d = pair.dims();
    match method {
        InitMethod::Uniform => Ok(MaskLogits::for_pair(pair, |_| 0.0)),
        InitMethod::Voronoi => {
            let labels = match voronoi_seam(pair, None) {
                Ok(r) => r.labels,
                Err(Error::EmptyExclusiveRegion(side)) => {
                    log::warn!("{side} exclusive region empty; starting from uniform logits");
                    return Ok(MaskLogits::for_pair(pair, |_| 0.0));
                }
                Err(e) => return Err(e),
            };
            let field: Vec<f64> = labels
                .data()
                .iter()
                .map(|&l| match l {
                    Label::Target => INIT_LOGIT,
                    Label::Reference => -INIT_LOGIT,
                    Label::Invalid => 0.0,
                })
                .collect();
            let blurred = masked_box_blur(&field, d, &pair.union(), INIT_BLUR_RADIUS);
            Ok(MaskLogits::for_pair(pair, |k| blurred[k]))
        }
    }
}

/// Hard labels from a soft target mask: overlap pixels with `L1 >= 0.5` go
/// to the target, exclusive pixels to their own image. Also returns the
/// seam pixels in walk order.
pub fn extract_seam(l1: &SoftMask, pair: &AlignedPair) -> Result<(LabelMap, Vec<(usize, usize)>)> {
    let d = pair.dims();
    d.check(l1.dims(), "soft mask")?;
    let labels = LabelMap::from_overlap(pair, |i, j| l1.get(i, j) >= 0.5);
    let seam = seam_pixels(&labels, pair.overlap());
    Ok((labels, seam))
}

/// Gradient descent on the coverage loss.
///
/// Each epoch records the loss, then takes the step
/// `x <- clamp(x - a * dir + momentum * v)`, where `dir` is the gradient
/// (optionally divided by a per-pixel curvature estimate) and `v` the
/// previous displacement. A step that would raise the loss is retried
/// without momentum, then with the step halved until it does not, so the
/// recorded totals never increase. The base step decays every epoch.
///
/// With `assign_roles`, the image whose starting region already covers more
/// of `o` is optimised as the first mask; the result is always reported with
/// `L1` belonging to the target.
pub fn optimize_masks(pair: &AlignedPair, o: &BinaryMask, cost: &CostMap, cfg: &OptimConfig) -> Result<SeamResult> {
    cfg.validate()?;
    let d = pair.dims();
    d.check(o.dims(), "object mask")?;
    d.check(cost.dims(), "cost map")?;
    let mut state = init_logits(pair, cfg.init)?;
    let problem = Problem::new(&state, o, cost, pair.overlap(), cfg)?;
    let n = d.len();
    let mut s = vec![0.0; n];
    let mut b = problem.eval(state.data(), &mut s);
    let swapped = cfg.assign_roles && b.a_m2 > b.a_m1;
    if swapped {
        state = state.negated();
        b = problem.eval(state.data(), &mut s);
    }

    let mut x = state.data().to_vec();
    let mut v = vec![0.0; n];
    let (mut g, mut c, mut dir) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut xt, mut st) = (vec![0.0; n], vec![0.0; n]);
    let mut trace = Vec::new();
    let mut base = cfg.step;
    let mut still = 0;
    let mut converged = false;
    for epoch in 0..cfg.max_epochs {
        if !b.total.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        trace.push(TraceRecord::new(epoch, &b));
        if let Some(prev) = trace.len().checked_sub(2).map(|k| trace[k].total) {
            let rel = if prev == b.total {
                0.0
            } else {
                (prev - b.total).abs() / b.total.abs().max(f64::MIN_POSITIVE)
            };
            still = if rel < cfg.rel_tol { still + 1 } else { 0 };
            if still >= cfg.window {
                converged = true;
                break;
            }
        }
        if epoch + 1 == cfg.max_epochs {
            break;
        }

        problem.gradient(&s, b.selected_k, &mut g, Some(&mut c));
        for k in 0..n {
            dir[k] = match cfg.descent {
                Descent::Gradient => g[k],
                Descent::Scaled => {
                    if problem.free[k] {
                        g[k] / c[k].max(1e-12)
                    } else {
                        0.0
                    }
                }
            };
        }
        let mut a = base;
        let mut beta = cfg.momentum;
        let accepted = loop {
            for k in 0..n {
                xt[k] = if problem.free[k] {
                    (x[k] - a * dir[k] + beta * v[k]).clamp(-cfg.logit_bound, cfg.logit_bound)
                } else {
                    x[k]
                };
            }
            let bt = problem.eval(&xt, &mut st);
            if bt.total <= b.total {
                break Some(bt);
            }
            if beta > 0.0 {
                beta = 0.0;
            } else {
                a *= 0.5;
                if a < MIN_STEP {
                    break None;
                }
            }
        };
        match accepted {
            Some(bt) => {
                for k in 0..n {
                    v[k] = xt[k] - x[k];
                }
                std::mem::swap(&mut x, &mut xt);
                std::mem::swap(&mut s, &mut st);
                b = bt;
            }
            None => v.iter_mut().for_each(|e| *e = 0.0),
        }
        base *= cfg.step_decay;
    }

    // Report masks with L1 belonging to the target; exclusive pixels exact.
    let sign = if swapped { -1.0 } else { 1.0 };
    let mut l1 = vec![0.0; n];
    let mut l2 = vec![0.0; n];
    for k in 0..n {
        match (pair.valid_t().at(k), pair.valid_r().at(k)) {
            (true, true) => {
                l1[k] = sigmoid(sign * x[k]);
                l2[k] = 1.0 - l1[k];
            }
            (true, false) => l1[k] = 1.0,
            (false, true) => l2[k] = 1.0,
            (false, false) => {}
        }
    }
    let soft_l1 = SoftMask::from_vec_clamped(d, l1);
    let soft_l2 = SoftMask::from_vec_clamped(d, l2);
    let (labels, seam) = extract_seam(&soft_l1, pair)?;
    let energy = seam_energy(cost, &labels)?;
    Ok(SeamResult {
        labels,
        soft_l1,
        soft_l2,
        seam_pixels: seam,
        energy,
        trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{color_difference_map, Dims, Image};
    use crate::metrics::object_integrity;

    fn strips(h: usize, w: usize, t_end: usize, r_start: usize, img: impl Fn(usize, usize) -> [f64; 3]) -> AlignedPair {
        let d = Dims::new(h, w);
        let im = Image::from_fn(d, img);
        AlignedPair::new(
            im.clone(),
            im,
            BinaryMask::from_fn(d, |_, j| j < t_end),
            BinaryMask::from_fn(d, |_, j| j >= r_start),
        )
        .unwrap()
    }

    #[test]
    fn disk_in_identical_images_stays_whole() {
        let p = strips(40, 80, 56, 24, |i, j| [i as f64 / 40.0, j as f64 / 80.0, 0.5]);
        let o = BinaryMask::from_fn(p.dims(), |i, j| {
            let (di, dj) = (i as f64 - 20.0, j as f64 - 40.0);
            di * di + dj * dj <= 64.0
        });
        let cost = color_difference_map(p.warped_target(), p.warped_reference(), p.overlap()).unwrap();
        let r = optimize_masks(&p, &o, &cost, &OptimConfig::default()).unwrap();
        let (failure, splits, _) = object_integrity(&o, &r.labels).unwrap();
        assert!(!failure && splits == 0);
        assert!(r.partition_error(&p) < 1e-6);
        assert!(r.labels.is_consistent_with(&p));
    }

    #[test]
    fn trace_never_increases() {
        let p = strips(24, 48, 32, 16, |i, j| [((i * 7 + j * 3) % 11) as f64 / 11.0, 0.2, 0.7]);
        let o = BinaryMask::from_fn(p.dims(), |i, j| (8..16).contains(&i) && (20..28).contains(&j));
        let mut other = p.warped_reference().clone();
        for i in 0..24 {
            for j in 16..32 {
                other.set_pixel(i, j, [0.1 * (j % 3) as f64, 0.5, 0.5]);
            }
        }
        let cost = color_difference_map(p.warped_target(), &other, p.overlap()).unwrap();
        let r = optimize_masks(&p, &o, &cost, &OptimConfig::default()).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1].total <= w[0].total + 1e-9);
        }
        assert!(r.converged);
    }

    #[test]
    fn reruns_are_bit_identical() {
        let p = strips(16, 32, 22, 10, |i, j| [(i % 4) as f64 / 4.0, (j % 5) as f64 / 5.0, 0.3]);
        let o = BinaryMask::from_fn(p.dims(), |i, j| (5..10).contains(&i) && (12..18).contains(&j));
        let cost = color_difference_map(p.warped_target(), p.warped_reference(), p.overlap()).unwrap();
        let a = optimize_masks(&p, &o, &cost, &OptimConfig::default()).unwrap();
        let b = optimize_masks(&p, &o, &cost, &OptimConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn extract_seam_conventions() {
        let p = strips(4, 10, 8, 2, |_, _| [0.5; 3]);
        let d = p.dims();
        let (labels, seam) = extract_seam(&SoftMask::filled(d, 1.0), &p).unwrap();
        assert!((0..4).all(|i| (0..8).all(|j| labels.get(i, j) == Label::Target)));
        assert!(seam.iter().all(|&(_, j)| j == 7));
        let (labels, _) = extract_seam(&SoftMask::filled(d, 0.5), &p).unwrap();
        assert_eq!(labels.count(Label::Target), 32);
        let (_, seam) = extract_seam(&SoftMask::from_fn(d, |_, j| if j < 5 { 1.0 } else { 0.0 }), &p).unwrap();
        let mut cols: Vec<usize> = seam.iter().map(|s| s.1).collect();
        cols.sort_unstable();
        cols.dedup();
        assert_eq!(cols, vec![4, 5]);
    }

    #[test]
    fn empty_overlap_is_rejected() {
        let p = strips(4, 10, 4, 6, |_, _| [0.5; 3]);
        let cost = CostMap::zeros(p.overlap().clone());
        assert!(matches!(
            optimize_masks(&p, &BinaryMask::zeros(p.dims()), &cost, &OptimConfig::default()),
            Err(Error::EmptyOverlap)
        ));
    }
}
