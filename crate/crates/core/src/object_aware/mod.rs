//! Object-aware seam: soft masks optimised against the coverage loss.
//!
//! A single logit field `x` parameterises both masks, `L1 = sigmoid(x)` and
//! `L2 = 1 - L1` on valid pixels, so the blend is a partition of unity by
//! construction. Pixels outside the overlap are frozen at `±C_FREEZE`.

mod loss;
mod optimize;

pub use loss::{comp_loss, excl_loss, loss_gradient, photo_loss, smooth_loss, total_loss};
pub use optimize::{extract_seam, init_logits, optimize_masks};

use serde::{Deserialize, Serialize};

use crate::alignment::AlignedPair;
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, Dims, SoftMask};

/// Magnitude of a frozen logit; `sigmoid(12)` is within 1e-5 of 1.
pub const C_FREEZE: f64 = 12.0;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-pixel logits of `L1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskLogits {
    dims: Dims,
    data: Vec<f64>,
    /// Pixels whose logit is held fixed.
    frozen: BinaryMask,
    /// Pixels covered by at least one image. Invalid pixels have `L1 = L2 = 0`.
    valid: BinaryMask,
}

impl MaskLogits {
    /// Frozen logits must be exactly `±C_FREEZE`; invalid pixels must be frozen.
    pub fn new(dims: Dims, data: Vec<f64>, frozen: BinaryMask, valid: BinaryMask) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::InvalidValue("logit buffer length does not match dims".into()));
        }
        dims.check(frozen.dims(), "frozen mask")?;
        dims.check(valid.dims(), "validity mask")?;
        for (k, &x) in data.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::InvalidValue(format!("non-finite logit at {k}")));
            }
            if frozen.at(k) && x.abs() != C_FREEZE {
                return Err(Error::InvalidValue(format!("frozen logit {x} is not ±{C_FREEZE}")));
            }
            if !valid.at(k) && !frozen.at(k) {
                return Err(Error::InvalidValue("invalid pixels must be frozen".into()));
            }
        }
        Ok(Self {
            dims,
            data,
            frozen,
            valid,
        })
    }

    /// Every pixel valid and free.
    pub fn free(dims: Dims, data: Vec<f64>) -> Result<Self> {
        Self::new(dims, data, BinaryMask::zeros(dims), BinaryMask::ones(dims))
    }

    /// Logits for `pair` with overlap values from `overlap_value`; exclusive
    /// pixels are frozen at `+C_FREEZE` (target) or `-C_FREEZE` (reference),
    /// invalid pixels at `-C_FREEZE`.
    pub fn for_pair(pair: &AlignedPair, mut overlap_value: impl FnMut(usize) -> f64) -> Self {
        let d = pair.dims();
        let frozen = pair.overlap().not();
        let valid = pair.union();
        let data = (0..d.len())
            .map(|k| {
                if pair.overlap().at(k) {
                    overlap_value(k)
                } else if pair.valid_t().at(k) {
                    C_FREEZE
                } else {
                    -C_FREEZE
                }
            })
            .collect();
        Self {
            dims: d,
            data,
            frozen,
            valid,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn frozen(&self) -> &BinaryMask {
        &self.frozen
    }

    pub fn valid(&self) -> &BinaryMask {
        &self.valid
    }

    /// `sigmoid(x)` on valid pixels, 0 elsewhere.
    pub fn l1(&self) -> SoftMask {
        SoftMask::from_vec_clamped(
            self.dims,
            (0..self.dims.len())
                .map(|k| if self.valid.at(k) { sigmoid(self.data[k]) } else { 0.0 })
                .collect(),
        )
    }

    /// `1 - sigmoid(x)` on valid pixels, 0 elsewhere.
    pub fn l2(&self) -> SoftMask {
        SoftMask::from_vec_clamped(
            self.dims,
            (0..self.dims.len())
                .map(|k| {
                    if self.valid.at(k) {
                        1.0 - sigmoid(self.data[k])
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
    }

    /// Swaps the roles of the two masks.
    pub fn negated(&self) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|v| -v).collect(),
            frozen: self.frozen.clone(),
            valid: self.valid.clone(),
        }
    }
}

/// Weighted loss components at one logit state. `total` is the sum of the
/// four weighted components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub comp: f64,
    pub excl: f64,
    pub smooth: f64,
    pub photo: f64,
    pub total: f64,
    /// Which mask the completeness term selected: 1 when `A_M1 > A_M2`, else 2.
    pub selected_k: u8,
    pub a_m1: f64,
    pub a_m2: f64,
}

/// One optimisation epoch, as written to trace files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub epoch: usize,
    pub comp: f64,
    pub excl: f64,
    pub smooth: f64,
    pub photo: f64,
    pub total: f64,
    pub k: u8,
    #[serde(rename = "A_M1")]
    pub a_m1: f64,
    #[serde(rename = "A_M2")]
    pub a_m2: f64,
}

impl TraceRecord {
    pub fn new(epoch: usize, b: &LossBreakdown) -> Self {
        Self {
            epoch,
            comp: b.comp,
            excl: b.excl,
            smooth: b.smooth,
            photo: b.photo,
            total: b.total,
            k: b.selected_k,
            a_m1: b.a_m1,
            a_m2: b.a_m2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMethod {
    /// Voronoi labels mapped to ±2 and box-blurred.
    #[default]
    Voronoi,
    /// All overlap logits 0.
    Uniform,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Descent {
    /// Plain gradient step `x - a g`.
    Gradient,
    /// Gradient divided per pixel by a Gauss-Newton curvature estimate.
    #[default]
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimConfig {
    pub max_epochs: usize,
    pub step: f64,
    /// Multiplied into the step after every epoch.
    pub step_decay: f64,
    /// An epoch whose relative change of the total is below this counts as still.
    pub rel_tol: f64,
    /// Consecutive still epochs that end the run.
    pub window: usize,
    pub w_comp: f64,
    pub w_excl: f64,
    pub w_smooth: f64,
    pub w_photo: f64,
    /// Raw sums for the exclusivity, smoothness and photometric terms instead
    /// of per-pixel means.
    pub paper_exact: bool,
    pub init: InitMethod,
    pub descent: Descent,
    /// Heavy-ball coefficient; dropped for any step that would raise the loss.
    pub momentum: f64,
    /// Free logits are kept within `±logit_bound`.
    pub logit_bound: f64,
    /// Let the image that already covers more of the objects play the role of
    /// the first mask.
    pub assign_roles: bool,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            max_epochs: 1000,
            step: 0.5,
            step_decay: 0.999,
            rel_tol: 1e-6,
            window: 10,
            w_comp: 1.0,
            w_excl: 1.0,
            w_smooth: 1.0,
            w_photo: 1.0,
            paper_exact: false,
            init: InitMethod::Voronoi,
            descent: Descent::Scaled,
            momentum: 0.8,
            logit_bound: 6.0,
            assign_roles: true,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive");
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return bad("step_decay must lie in (0, 1]");
        }
        if !(self.rel_tol >= 0.0) || self.window == 0 {
            return bad("convergence tolerance must be non-negative with a positive window");
        }
        for (name, w) in [
            ("w_comp", self.w_comp),
            ("w_excl", self.w_excl),
            ("w_smooth", self.w_smooth),
            ("w_photo", self.w_photo),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Config(format!("{name} must be non-negative")));
            }
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if !(self.logit_bound > 0.0 && self.logit_bound <= C_FREEZE) {
            return bad("logit_bound must lie in (0, 12]");
        }
        Ok(())
    }
}
