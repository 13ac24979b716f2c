use super::{sigmoid, LossBreakdown, MaskLogits, OptimConfig};
use crate::error::{Error, Result};
use crate::imaging::{mask_area, mask_intersect, BinaryMask, CostMap, Dims, SoftMask};

/// Completeness term and the selected mask. `k = 1` only when `A_M1 > A_M2`;
/// ties select the second mask. Always divided by the pixel count.
pub fn comp_loss(o: &BinaryMask, l1: &SoftMask, l2: &SoftMask) -> Result<(f64, u8)> {
    let n = o.dims().len();
    if n == 0 {
        return Err(Error::DegenerateCanvas);
    }
    let m1 = mask_intersect(o, l1)?;
    let m2 = mask_intersect(o, l2)?;
    let k = if mask_area(&m1) > mask_area(&m2) { 1 } else { 2 };
    let mk = if k == 1 { &m1 } else { &m2 };
    let sum: f64 = o
        .data()
        .iter()
        .zip(mk.data())
        .map(|(&ov, &m)| {
            let e = f64::from(ov) - m;
            e * e
        })
        .sum();
    Ok((sum / n as f64, k))
}

fn scale(dims: Dims, paper_exact: bool) -> f64 {
    if paper_exact {
        1.0
    } else {
        1.0 / dims.len() as f64
    }
}

/// Exclusivity term: squared coverage of the objects by the second mask.
pub fn excl_loss(o: &BinaryMask, l2: &SoftMask, paper_exact: bool) -> Result<f64> {
    let m2 = mask_intersect(o, l2)?;
    Ok(m2.data().iter().map(|v| v * v).sum::<f64>() * scale(o.dims(), paper_exact))
}

/// Sum of squared forward differences; the difference past the last row or
/// column is zero.
pub fn smooth_loss(l: &SoftMask, paper_exact: bool) -> f64 {
    let d = l.dims();
    let mut sum = 0.0;
    for i in 0..d.height {
        for j in 0..d.width {
            let v = l.get(i, j);
            if j + 1 < d.width {
                let dx = l.get(i, j + 1) - v;
                sum += dx * dx;
            }
            if i + 1 < d.height {
                let dy = l.get(i + 1, j) - v;
                sum += dy * dy;
            }
        }
    }
    sum * scale(d, paper_exact)
}

/// Photometric term: cost weighted by `4 L1 (1 - L1)`, which is 1 at
/// `L1 = 0.5` and vanishes at 0 and 1.
pub fn photo_loss(cost: &CostMap, l1: &SoftMask, overlap: &BinaryMask, paper_exact: bool) -> Result<f64> {
    let d = l1.dims();
    d.check(cost.dims(), "cost map")?;
    d.check(overlap.dims(), "overlap")?;
    let sum: f64 = (0..d.len())
        .filter(|&k| overlap.at(k))
        .map(|k| {
            let l = l1.data()[k];
            cost.data()[k] * 4.0 * l * (1.0 - l)
        })
        .sum();
    Ok(sum * scale(d, paper_exact))
}

/// Flattened loss problem shared by evaluation, gradient and the optimiser.
pub(crate) struct Problem {
    pub dims: Dims,
    o: Vec<f64>,
    /// Photometric cost, zero off the overlap.
    cost: Vec<f64>,
    pub valid: Vec<bool>,
    pub free: Vec<bool>,
    /// Horizontal pair `(k, k + 1)` enters the smoothness term.
    right: Vec<bool>,
    /// Vertical pair `(k, k + width)` enters the smoothness term.
    down: Vec<bool>,
    /// Number of smoothness pairs touching each pixel.
    degree: Vec<f64>,
    wc: f64,
    we: f64,
    ws: f64,
    wp: f64,
}

impl Problem {
    pub fn new(
        state: &MaskLogits,
        o: &BinaryMask,
        cost: &CostMap,
        overlap: &BinaryMask,
        cfg: &OptimConfig,
    ) -> Result<Self> {
        let d = state.dims();
        d.check(o.dims(), "object mask")?;
        d.check(cost.dims(), "cost map")?;
        d.check(overlap.dims(), "overlap")?;
        if d.is_empty() {
            return Err(Error::DegenerateCanvas);
        }
        let valid: Vec<bool> = (0..d.len()).map(|k| state.valid().at(k)).collect();
        let right: Vec<bool> = (0..d.len())
            .map(|k| (k % d.width) + 1 < d.width && valid[k] && valid[k + 1])
            .collect();
        let down: Vec<bool> = (0..d.len())
            .map(|k| k + d.width < d.len() && valid[k] && valid[k + d.width])
            .collect();
        let mut degree = vec![0.0; d.len()];
        for k in 0..d.len() {
            if right[k] {
                degree[k] += 1.0;
                degree[k + 1] += 1.0;
            }
            if down[k] {
                degree[k] += 1.0;
                degree[k + d.width] += 1.0;
            }
        }
        let n = d.len() as f64;
        let nu = if cfg.paper_exact { 1.0 } else { 1.0 / n };
        Ok(Self {
            dims: d,
            o: o.data().iter().map(|&v| f64::from(v)).collect(),
            cost: (0..d.len())
                .map(|k| if overlap.at(k) { cost.data()[k] } else { 0.0 })
                .collect(),
            free: (0..d.len()).map(|k| valid[k] && !state.frozen().at(k)).collect(),
            valid,
            right,
            down,
            degree,
            wc: cfg.w_comp / n,
            we: cfg.w_excl * nu,
            ws: cfg.w_smooth * nu,
            wp: cfg.w_photo * nu,
        })
    }

    /// Evaluates the loss at `x`, leaving `L1` in `s`.
    pub fn eval(&self, x: &[f64], s: &mut [f64]) -> LossBreakdown {
        let w = self.dims.width;
        let (mut a1, mut a2, mut c1, mut c2, mut ex, mut ph) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 0..x.len() {
            let l1 = if self.valid[k] { sigmoid(x[k]) } else { 0.0 };
            let l2 = if self.valid[k] { 1.0 - l1 } else { 0.0 };
            s[k] = l1;
            let o = self.o[k];
            a1 += o * l1;
            a2 += o * l2;
            c1 += o * (1.0 - l1) * (1.0 - l1);
            c2 += o * (1.0 - l2) * (1.0 - l2);
            ex += o * l2 * l2;
            ph += self.cost[k] * 4.0 * l1 * (1.0 - l1);
        }
        let mut sm = 0.0;
        for k in 0..x.len() {
            if self.right[k] {
                let dx = s[k + 1] - s[k];
                sm += dx * dx;
            }
            if self.down[k] {
                let dy = s[k + w] - s[k];
                sm += dy * dy;
            }
        }
        let k = if a1 > a2 { 1 } else { 2 };
        let comp = self.wc * if k == 1 { c1 } else { c2 };
        let (excl, smooth, photo) = (self.we * ex, self.ws * sm, self.wp * ph);
        LossBreakdown {
            comp,
            excl,
            smooth,
            photo,
            total: comp + excl + smooth + photo,
            selected_k: k,
            a_m1: a1,
            a_m2: a2,
        }
    }

    /// Gradient with respect to the logits at `L1 = s`, with `k` held fixed.
    /// When `curv` is given it receives a positive Gauss-Newton curvature
    /// estimate per pixel. Frozen and invalid pixels get 0 in both.
    pub fn gradient(&self, s: &[f64], k: u8, g: &mut [f64], mut curv: Option<&mut [f64]>) {
        let w = self.dims.width;
        g.iter_mut().for_each(|v| *v = 0.0);
        // Smoothness contributions, d/dL1, accumulated first.
        for p in 0..s.len() {
            if self.right[p] {
                let dx = s[p + 1] - s[p];
                g[p] -= 2.0 * self.ws * dx;
                g[p + 1] += 2.0 * self.ws * dx;
            }
            if self.down[p] {
                let dy = s[p + w] - s[p];
                g[p] -= 2.0 * self.ws * dy;
                g[p + w] += 2.0 * self.ws * dy;
            }
        }
        for p in 0..s.len() {
            if !self.free[p] {
                g[p] = 0.0;
                if let Some(c) = curv.as_deref_mut() {
                    c[p] = 0.0;
                }
                continue;
            }
            let (l1, o) = (s[p], self.o[p]);
            let l2 = 1.0 - l1;
            let d_comp = if k == 1 { -2.0 * o * l2 } else { 2.0 * o * l1 };
            let d_excl = -2.0 * o * l2;
            let d_photo = 4.0 * self.cost[p] * (1.0 - 2.0 * l1);
            let dl = g[p] + self.wc * d_comp + self.we * d_excl + self.wp * d_photo;
            let sp = l1 * l2;
            g[p] = dl * sp;
            if let Some(c) = curv.as_deref_mut() {
                let sp2 = sp * sp;
                let t = 1.0 - 2.0 * l1;
                c[p] = 2.0 * o * (self.wc + self.we) * sp2
                    + 2.0 * self.ws * self.degree[p] * sp2
                    + 4.0 * self.wp * self.cost[p] * (sp * t * t + 2.0 * sp2);
            }
        }
    }
}

/// All loss terms at `state`. The first mask is `sigmoid` of the logits and
/// the second its complement, both zero off the valid region; smoothness only
/// counts pairs of valid pixels.
pub fn total_loss(
    state: &MaskLogits,
    o: &BinaryMask,
    cost: &CostMap,
    overlap: &BinaryMask,
    cfg: &OptimConfig,
) -> Result<LossBreakdown> {
    let p = Problem::new(state, o, cost, overlap, cfg)?;
    let mut s = vec![0.0; state.dims().len()];
    Ok(p.eval(state.data(), &mut s))
}

/// Exact gradient of `total_loss` with respect to every free logit, with the
/// selected mask held fixed. Frozen and invalid pixels get exactly 0.
pub fn loss_gradient(
    state: &MaskLogits,
    o: &BinaryMask,
    cost: &CostMap,
    overlap: &BinaryMask,
    cfg: &OptimConfig,
) -> Result<Vec<f64>> {
    let p = Problem::new(state, o, cost, overlap, cfg)?;
    let mut s = vec![0.0; state.dims().len()];
    let b = p.eval(state.data(), &mut s);
    let mut g = vec![0.0; s.len()];
    p.gradient(&s, b.selected_k, &mut g, None);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object_aware::C_FREEZE;
    use rand::{Rng, SeedableRng};

    fn exact() -> OptimConfig {
        OptimConfig {
            paper_exact: true,
            w_photo: 0.0,
            ..OptimConfig::default()
        }
    }

    fn soft(d: Dims, v: &[f64]) -> SoftMask {
        SoftMask::new(d, v.to_vec()).unwrap()
    }

    #[test]
    fn comp_examples() {
        let d = Dims::new(2, 2);
        let o = BinaryMask::ones(d);
        assert_eq!(
            comp_loss(&o, &SoftMask::filled(d, 1.0), &SoftMask::filled(d, 0.0)).unwrap(),
            (0.0, 1)
        );
        assert_eq!(
            comp_loss(&o, &SoftMask::filled(d, 0.5), &SoftMask::filled(d, 0.0)).unwrap(),
            (0.25, 1)
        );
        assert_eq!(
            comp_loss(&o, &SoftMask::filled(d, 0.5), &SoftMask::filled(d, 0.5))
                .unwrap()
                .1,
            2
        );
        let empty = BinaryMask::zeros(d);
        assert_eq!(
            comp_loss(&empty, &SoftMask::filled(d, 0.3), &SoftMask::filled(d, 0.7))
                .unwrap()
                .0,
            0.0
        );
        let none = Dims::new(0, 0);
        assert!(comp_loss(
            &BinaryMask::zeros(none),
            &SoftMask::filled(none, 0.0),
            &SoftMask::filled(none, 0.0)
        )
        .is_err());
    }

    #[test]
    fn excl_smooth_photo_examples() {
        let d = Dims::new(2, 2);
        assert_eq!(
            excl_loss(&BinaryMask::ones(d), &SoftMask::filled(d, 0.0), true).unwrap(),
            0.0
        );
        assert_eq!(
            excl_loss(&BinaryMask::ones(d), &SoftMask::filled(d, 1.0), true).unwrap(),
            4.0
        );
        assert_eq!(
            excl_loss(&BinaryMask::ones(d), &SoftMask::filled(d, 1.0), false).unwrap(),
            1.0
        );
        let corner = BinaryMask::new(d, vec![1, 0, 0, 0]).unwrap();
        assert_eq!(excl_loss(&corner, &SoftMask::filled(d, 0.5), true).unwrap(), 0.25);

        assert_eq!(smooth_loss(&SoftMask::filled(d, 0.3), true), 0.0);
        assert_eq!(smooth_loss(&soft(d, &[0.0, 1.0, 0.0, 1.0]), true), 2.0);
        assert_eq!(smooth_loss(&soft(d, &[0.0, 0.0, 1.0, 1.0]), true), 2.0);

        let one = Dims::new(1, 1);
        let c = CostMap::new(vec![2.0], BinaryMask::ones(one)).unwrap();
        assert_eq!(
            photo_loss(&c, &SoftMask::filled(one, 0.5), &BinaryMask::ones(one), true).unwrap(),
            2.0
        );
        assert_eq!(
            photo_loss(&c, &SoftMask::filled(one, 1.0), &BinaryMask::ones(one), true).unwrap(),
            0.0
        );
    }

    #[test]
    fn total_examples() {
        let d = Dims::new(2, 2);
        let o = BinaryMask::ones(d);
        let z = CostMap::zeros(BinaryMask::ones(d));
        let ov = BinaryMask::ones(d);
        let sat = MaskLogits::free(d, vec![C_FREEZE; 4]).unwrap();
        let b = total_loss(&sat, &o, &z, &ov, &OptimConfig::default()).unwrap();
        assert_eq!(b.selected_k, 1);
        assert!(b.comp < 1e-6 && b.excl < 1e-6 && b.smooth < 1e-6 && b.total < 1e-6);

        let mid = MaskLogits::free(d, vec![0.0; 4]).unwrap();
        let b = total_loss(&mid, &o, &z, &ov, &exact()).unwrap();
        assert_eq!(b.selected_k, 2);
        assert_eq!((b.comp, b.excl, b.smooth, b.total), (0.25, 1.0, 0.0, 1.25));

        let zero = OptimConfig {
            w_comp: 0.0,
            w_excl: 0.0,
            w_smooth: 0.0,
            w_photo: 0.0,
            ..OptimConfig::default()
        };
        assert_eq!(total_loss(&mid, &o, &z, &ov, &zero).unwrap().total, 0.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let d = Dims::new(4, 4);
        for paper_exact in [false, true] {
            let cfg = OptimConfig {
                paper_exact,
                ..OptimConfig::default()
            };
            for _ in 0..10 {
                let x: Vec<f64> = (0..16).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let o = BinaryMask::from_fn(d, |_, _| rng.gen_bool(0.5));
                let c = CostMap::new((0..16).map(|_| rng.gen_range(0.0..1.5)).collect(), BinaryMask::ones(d)).unwrap();
                let ov = BinaryMask::ones(d);
                let st = MaskLogits::free(d, x.clone()).unwrap();
                let g = loss_gradient(&st, &o, &c, &ov, &cfg).unwrap();
                for k in 0..16 {
                    let h = 1e-4;
                    let mut xp = x.clone();
                    xp[k] += h;
                    let mut xm = x.clone();
                    xm[k] -= h;
                    let fp = total_loss(&MaskLogits::free(d, xp).unwrap(), &o, &c, &ov, &cfg)
                        .unwrap()
                        .total;
                    let fm = total_loss(&MaskLogits::free(d, xm).unwrap(), &o, &c, &ov, &cfg)
                        .unwrap()
                        .total;
                    let fd = (fp - fm) / (2.0 * h);
                    let rel = (g[k] - fd).abs() / g[k].abs().max(fd.abs()).max(1e-7);
                    assert!(rel < 1e-5, "component {k}: {} vs {fd}", g[k]);
                }
            }
        }
    }

    #[test]
    fn frozen_pixels_have_zero_gradient() {
        let d = Dims::new(3, 3);
        let frozen = BinaryMask::from_fn(d, |_, j| j == 0);
        let x: Vec<f64> = (0..9)
            .map(|k| if k % 3 == 0 { C_FREEZE } else { 0.3 * k as f64 - 1.0 })
            .collect();
        let st = MaskLogits::new(d, x, frozen, BinaryMask::ones(d)).unwrap();
        let o = BinaryMask::ones(d);
        let c = CostMap::zeros(BinaryMask::ones(d));
        let g = loss_gradient(&st, &o, &c, &BinaryMask::ones(d), &OptimConfig::default()).unwrap();
        for i in 0..3 {
            assert_eq!(g[3 * i], 0.0);
        }
    }
}
