use super::edt::squared_distance_transform;
use super::{LabelMap, SeamResult};
use crate::alignment::AlignedPair;
use crate::error::{Error, Result};
use crate::imaging::CostMap;
use crate::metrics::seam_energy;

/// Labels each overlap pixel by the nearer exclusive region (Euclidean),
/// with ties going to the target. Energy is the seam energy of the result
/// under `cost`, or 0 without one.
pub fn voronoi_seam(pair: &AlignedPair, cost: Option<&CostMap>) -> Result<SeamResult> {
    let d = pair.dims();
    if let Some(c) = cost {
        d.check(c.dims(), "cost map")?;
    }
    if pair.overlap().is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let (t_only, r_only) = (pair.target_only(), pair.reference_only());
    if t_only.is_empty() {
        return Err(Error::EmptyExclusiveRegion("target"));
    }
    if r_only.is_empty() {
        return Err(Error::EmptyExclusiveRegion("reference"));
    }
    let dt = squared_distance_transform(&t_only);
    let dr = squared_distance_transform(&r_only);
    let labels = LabelMap::from_overlap(pair, |i, j| {
        let k = d.index(i, j);
        dt[k] <= dr[k]
    });
    let energy = cost.map_or(0.0, |c| seam_energy(c, &labels).expect("dims checked"));
    Ok(SeamResult::from_labels(labels, pair, energy))
}
