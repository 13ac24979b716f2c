use super::{target_on_left, LabelMap, SeamResult};
use crate::alignment::AlignedPair;
use crate::error::{Error, Result};
use crate::imaging::CostMap;

/// Minimum-cost top-to-bottom seam through the overlap. Each step moves down
/// one row and at most one column sideways, staying inside the overlap.
///
/// Ties go to the leftmost end column, then to the leftmost predecessor at
/// every row, so a flat cost yields the leftmost straight path. The seam pixel
/// itself joins the left side.
pub fn dp_seam(cost: &CostMap, pair: &AlignedPair) -> Result<SeamResult> {
    let d = pair.dims();
    d.check(cost.dims(), "cost map")?;
    let ov = pair.overlap();
    let rows: Vec<usize> = (0..d.height).filter(|&i| (0..d.width).any(|j| ov.get(i, j))).collect();
    let (Some(&r0), Some(&r1)) = (rows.first(), rows.last()) else {
        return Err(Error::EmptyOverlap);
    };
    if rows.len() != r1 - r0 + 1 {
        let gap = (r0..=r1).find(|i| !rows.contains(i)).unwrap_or(r0);
        return Err(Error::NotTraversable(format!("overlap row {gap} is empty")));
    }
    let w = d.width;
    let n = r1 - r0 + 1;
    let mut acc = vec![f64::INFINITY; n * w];
    for (j, a) in acc[..w].iter_mut().enumerate() {
        if ov.get(r0, j) {
            *a = cost.get(r0, j);
        }
    }
    for t in 1..n {
        let i = r0 + t;
        let mut reachable = false;
        for j in 0..w {
            if !ov.get(i, j) {
                continue;
            }
            let prev = &acc[(t - 1) * w..t * w];
            let lo = j.saturating_sub(1);
            let hi = (j + 1).min(w - 1);
            let best = prev[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
            if best.is_finite() {
                acc[t * w + j] = best + cost.get(i, j);
                reachable = true;
            }
        }
        if !reachable {
            return Err(Error::NotTraversable(format!(
                "no 8-connected path through the overlap reaches row {i}"
            )));
        }
    }

    let last = &acc[(n - 1) * w..];
    let mut j = (0..w)
        .filter(|&j| last[j].is_finite())
        .min_by(|&a, &b| last[a].total_cmp(&last[b]).then(a.cmp(&b)))
        .expect("last row is reachable");
    let mut seam_col = vec![0usize; n];
    seam_col[n - 1] = j;
    for t in (1..n).rev() {
        let prev = &acc[(t - 1) * w..t * w];
        let lo = j.saturating_sub(1);
        let hi = (j + 1).min(w - 1);
        j = (lo..=hi)
            .filter(|&c| prev[c].is_finite())
            .min_by(|&a, &b| prev[a].total_cmp(&prev[b]).then(a.cmp(&b)))
            .expect("predecessor of a reachable pixel is reachable");
        seam_col[t - 1] = j;
    }
    let energy: f64 = seam_col.iter().enumerate().map(|(t, &j)| cost.get(r0 + t, j)).sum();

    let left_is_target = target_on_left(pair);
    let labels = LabelMap::from_overlap(pair, |i, j| {
        let left = i >= r0 && i <= r1 && j <= seam_col[i - r0];
        left == left_is_target
    });
    Ok(SeamResult::from_labels(labels, pair, energy))
}

/// Runs [`dp_seam`] on the transposed problem when the overlap is wider than
/// tall, so the seam always crosses the overlap's long axis.
pub fn dp_seam_any_orientation(cost: &CostMap, pair: &AlignedPair) -> Result<SeamResult> {
    let (rows, cols) = pair.overlap_extent().ok_or(Error::EmptyOverlap)?;
    if cols <= rows {
        return dp_seam(cost, pair);
    }
    let t = dp_seam(&cost.transpose(), &pair.transpose())?;
    Ok(SeamResult::from_labels(t.labels.transpose(), pair, t.energy))
}
