//! Hard seam partitions and the three classic seam finders.

mod dp;
mod edt;
mod graphcut;
mod maxflow;
mod voronoi;

pub use dp::{dp_seam, dp_seam_any_orientation};
pub use edt::squared_distance_transform;
pub use graphcut::graphcut_seam;
pub use maxflow::{max_flow_min_cut, FlowNetwork, MinCut};
pub use voronoi::voronoi_seam;

use serde::{Deserialize, Serialize};

use crate::alignment::AlignedPair;
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, Dims, SoftMask};
use crate::object_aware::TraceRecord;

/// Which image a canvas pixel is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Target,
    Reference,
    /// Covered by neither image.
    Invalid,
}

impl Label {
    pub fn opposite(self) -> Option<Label> {
        match self {
            Label::Target => Some(Label::Reference),
            Label::Reference => Some(Label::Target),
            Label::Invalid => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    dims: Dims,
    data: Vec<Label>,
}

impl LabelMap {
    pub fn new(dims: Dims, data: Vec<Label>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::InvalidValue(format!(
                "label buffer of length {} does not match {}x{}",
                data.len(),
                dims.height,
                dims.width
            )));
        }
        Ok(Self { dims, data })
    }

    /// Labels every valid pixel of `pair`: exclusive pixels get their own
    /// image, overlap pixels ask `in_target`.
    pub fn from_overlap(pair: &AlignedPair, mut in_target: impl FnMut(usize, usize) -> bool) -> Self {
        let d = pair.dims();
        let mut data = Vec::with_capacity(d.len());
        for i in 0..d.height {
            for j in 0..d.width {
                let (t, r) = (pair.valid_t().get(i, j), pair.valid_r().get(i, j));
                data.push(match (t, r) {
                    (false, false) => Label::Invalid,
                    (true, false) => Label::Target,
                    (false, true) => Label::Reference,
                    (true, true) => {
                        if in_target(i, j) {
                            Label::Target
                        } else {
                            Label::Reference
                        }
                    }
                });
            }
        }
        Self { dims: d, data }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[Label] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Label {
        self.data[self.dims.index(i, j)]
    }

    pub fn count(&self, l: Label) -> usize {
        self.data.iter().filter(|&&x| x == l).count()
    }

    pub fn mask_of(&self, l: Label) -> BinaryMask {
        BinaryMask::from_fn(self.dims, |i, j| self.get(i, j) == l)
    }

    pub fn transpose(&self) -> Self {
        let t = self.dims.transposed();
        let mut data = Vec::with_capacity(t.len());
        for i in 0..t.height {
            for j in 0..t.width {
                data.push(self.get(j, i));
            }
        }
        Self { dims: t, data }
    }

    /// Checks the label map against the pair's validity masks: `Invalid`
    /// exactly off the union, and each exclusive pixel carrying its own image.
    pub fn is_consistent_with(&self, pair: &AlignedPair) -> bool {
        if self.dims != pair.dims() {
            return false;
        }
        self.data
            .iter()
            .enumerate()
            .all(|(k, &l)| match (pair.valid_t().at(k), pair.valid_r().at(k)) {
                (false, false) => l == Label::Invalid,
                (true, false) => l == Label::Target,
                (false, true) => l == Label::Reference,
                (true, true) => l != Label::Invalid,
            })
    }
}

/// Output of any seam method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeamResult {
    #[serde(skip)]
    pub labels: LabelMap,
    #[serde(skip)]
    pub soft_l1: SoftMask,
    #[serde(skip)]
    pub soft_l2: SoftMask,
    /// Overlap pixels on the label boundary, `(row, col)`, in walk order.
    pub seam_pixels: Vec<(usize, usize)>,
    pub energy: f64,
    /// Per-epoch losses; empty for the classic methods.
    pub trace: Vec<TraceRecord>,
    /// False only when an iterative method stopped at its epoch limit.
    pub converged: bool,
}

impl SeamResult {
    /// Result whose soft masks are the 0/1 indicators of `labels`.
    pub fn from_labels(labels: LabelMap, pair: &AlignedPair, energy: f64) -> Self {
        let d = labels.dims();
        let soft_l1 = SoftMask::from_fn(d, |i, j| f64::from(u8::from(labels.get(i, j) == Label::Target)));
        let soft_l2 = SoftMask::from_fn(d, |i, j| f64::from(u8::from(labels.get(i, j) == Label::Reference)));
        let seam_pixels = seam_pixels(&labels, pair.overlap());
        Self {
            labels,
            soft_l1,
            soft_l2,
            seam_pixels,
            energy,
            trace: Vec::new(),
            converged: true,
        }
    }

    /// Largest `|L1 + L2 - 1|` over pixels valid in either image.
    pub fn partition_error(&self, pair: &AlignedPair) -> f64 {
        let union = pair.union();
        self.soft_l1
            .data()
            .iter()
            .zip(self.soft_l2.data())
            .enumerate()
            .filter(|(k, _)| union.at(*k))
            .map(|(_, (a, b))| (a + b - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> Self {
        Self {
            labels: self.labels.transpose(),
            soft_l1: self.soft_l1.transpose(),
            soft_l2: self.soft_l2.transpose(),
            seam_pixels: self.seam_pixels.iter().map(|&(i, j)| (j, i)).collect(),
            energy: self.energy,
            trace: self.trace.clone(),
            converged: self.converged,
        }
    }
}

/// True when `(i, j)` is in the overlap and has a 4-neighbour carrying the
/// opposite image's label.
pub fn is_seam_pixel(labels: &LabelMap, overlap: &BinaryMask, i: usize, j: usize) -> bool {
    if !overlap.get(i, j) {
        return false;
    }
    let Some(opp) = labels.get(i, j).opposite() else {
        return false;
    };
    labels.dims().neighbors4(i, j).any(|(a, b)| labels.get(a, b) == opp)
}

/// Seam pixels ordered by walking the boundary: each run starts at the
/// lowest-index pixel with the fewest seam neighbours and greedily steps to
/// an unvisited 8-neighbour, preferring edge neighbours.
pub fn seam_pixels(labels: &LabelMap, overlap: &BinaryMask) -> Vec<(usize, usize)> {
    let d = labels.dims();
    let on = BinaryMask::from_fn(d, |i, j| is_seam_pixel(labels, overlap, i, j));
    let total = on.count();
    if total == 0 {
        return Vec::new();
    }
    const STEPS: [(isize, isize); 8] = [(-1, 0), (0, -1), (0, 1), (1, 0), (-1, -1), (-1, 1), (1, -1), (1, 1)];
    let nbrs = |i: usize, j: usize| {
        STEPS.iter().filter_map(move |&(di, dj)| {
            let (a, b) = (i as isize + di, j as isize + dj);
            (a >= 0 && b >= 0 && (a as usize) < d.height && (b as usize) < d.width).then_some((a as usize, b as usize))
        })
    };
    let degree: Vec<usize> = (0..d.len())
        .map(|k| {
            let (i, j) = (k / d.width, k % d.width);
            if on.at(k) {
                nbrs(i, j).filter(|&(a, b)| on.get(a, b)).count()
            } else {
                0
            }
        })
        .collect();
    let mut starts: Vec<usize> = (0..d.len()).filter(|&k| on.at(k)).collect();
    starts.sort_by_key(|&k| (degree[k], k));
    let mut visited = vec![false; d.len()];
    let mut order = Vec::with_capacity(total);
    for start in starts {
        if visited[start] {
            continue;
        }
        let mut cur = (start / d.width, start % d.width);
        visited[start] = true;
        order.push(cur);
        while let Some(next) = nbrs(cur.0, cur.1).find(|&(a, b)| on.get(a, b) && !visited[d.index(a, b)]) {
            visited[d.index(next.0, next.1)] = true;
            order.push(next);
            cur = next;
        }
    }
    order
}

/// Which side of a vertical seam the target occupies: left unless the
/// target-only centroid lies right of the reference-only centroid.
pub(crate) fn target_on_left(pair: &AlignedPair) -> bool {
    match (pair.target_only().centroid(), pair.reference_only().centroid()) {
        (Some(t), Some(r)) => t.1 <= r.1,
        (Some(t), None) => t.1 <= (pair.dims().width as f64 - 1.0) / 2.0,
        (None, Some(r)) => r.1 > (pair.dims().width as f64 - 1.0) / 2.0,
        (None, None) => true,
    }
}
