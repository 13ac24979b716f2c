use super::maxflow::{max_flow_min_cut, FlowNetwork};
use super::{LabelMap, SeamResult};
use crate::alignment::AlignedPair;
use crate::error::{Error, Result};
use crate::imaging::CostMap;

/// Terminal constraints of the overlap graph: `Some(true)` tied to the target
/// (source), `Some(false)` to the reference (sink).
pub(crate) fn terminal_ties(pair: &AlignedPair) -> Vec<Option<bool>> {
    let d = pair.dims();
    let (t_only, r_only) = (pair.target_only(), pair.reference_only());
    (0..d.len())
        .map(|k| {
            let (i, j) = (k / d.width, k % d.width);
            if !pair.overlap().at(k) {
                return None;
            }
            let near_t = d.neighbors4(i, j).any(|(a, b)| t_only.get(a, b));
            let near_r = d.neighbors4(i, j).any(|(a, b)| r_only.get(a, b));
            match (near_t, near_r) {
                (true, false) => Some(true),
                (false, true) => Some(false),
                // Touching both sides, or neither: left free.
                _ => None,
            }
        })
        .collect()
}

/// Min-cut seam over the 4-connected overlap graph. Neighbouring overlap
/// pixels `p`, `q` are joined both ways with capacity `cost(p) + cost(q)`.
/// Overlap pixels next to exactly one image's exclusive region are tied to
/// that image with infinite capacity. The source side is labelled target.
pub fn graphcut_seam(cost: &CostMap, pair: &AlignedPair) -> Result<SeamResult> {
    let d = pair.dims();
    d.check(cost.dims(), "cost map")?;
    let ov = pair.overlap();
    if ov.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let ties = terminal_ties(pair);
    if !ties.contains(&Some(true)) {
        return Err(Error::SeamEndpointsUndefined("target"));
    }
    if !ties.contains(&Some(false)) {
        return Err(Error::SeamEndpointsUndefined("reference"));
    }

    let mut node = vec![usize::MAX; d.len()];
    let mut n = 0;
    for (k, slot) in node.iter_mut().enumerate() {
        if ov.at(k) {
            *slot = n;
            n += 1;
        }
    }
    let (s, t) = (n, n + 1);
    let mut net = FlowNetwork::new(n + 2, s, t)?;
    for i in 0..d.height {
        for j in 0..d.width {
            let k = d.index(i, j);
            if !ov.at(k) {
                continue;
            }
            match ties[k] {
                Some(true) => net.add_edge(s, node[k], f64::INFINITY)?,
                Some(false) => net.add_edge(node[k], t, f64::INFINITY)?,
                None => {}
            }
            // Right and down neighbours; each undirected edge appears once as a pair of arcs.
            for (a, b) in [(i, j + 1), (i + 1, j)] {
                if a < d.height && b < d.width && ov.get(a, b) {
                    let q = d.index(a, b);
                    let c = cost.data()[k] + cost.data()[q];
                    net.add_edge_pair(node[k], node[q], c, c)?;
                }
            }
        }
    }
    let cut = max_flow_min_cut(&net)?;
    let labels = LabelMap::from_overlap(pair, |i, j| cut.source_side[node[d.index(i, j)]]);
    Ok(SeamResult::from_labels(labels, pair, cut.flow))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{BinaryMask, Dims, Image};
    use crate::seams::tests::strip_pair;
    use rand::{Rng, SeedableRng};

    /// Minimum cut energy over all labelings of the overlap that honour the ties.
    fn brute(cost: &CostMap, pair: &AlignedPair) -> f64 {
        let d = pair.dims();
        let ties = terminal_ties(pair);
        let cells: Vec<usize> = (0..d.len()).filter(|&k| pair.overlap().at(k)).collect();
        let mut best = f64::INFINITY;
        for bits in 0u32..(1 << cells.len()) {
            let mut lab = vec![None; d.len()];
            let mut ok = true;
            for (c, &k) in cells.iter().enumerate() {
                let v = bits >> c & 1 == 1;
                if ties[k].is_some_and(|t| t != v) {
                    ok = false;
                    break;
                }
                lab[k] = Some(v);
            }
            if !ok {
                continue;
            }
            let mut e = 0.0;
            for &k in &cells {
                let (i, j) = (k / d.width, k % d.width);
                for (a, b) in [(i, j + 1), (i + 1, j)] {
                    if a < d.height && b < d.width {
                        let q = d.index(a, b);
                        if lab[q].is_some() && lab[q] != lab[k] {
                            e += cost.data()[k] + cost.data()[q];
                        }
                    }
                }
            }
            best = best.min(e);
        }
        best
    }

    #[test]
    fn zero_cost_gives_zero_energy() {
        let p = strip_pair(5, 8, 6, 2);
        let r = graphcut_seam(&CostMap::zeros(p.overlap().clone()), &p).unwrap();
        assert_eq!(r.energy, 0.0);
        assert!(r.labels.is_consistent_with(&p));
    }

    #[test]
    fn avoids_expensive_column() {
        // Overlap columns 1..=4 with column 2 expensive: the cut runs between columns 3 and 4.
        let p = strip_pair(4, 6, 5, 1);
        let data: Vec<f64> = (0..24)
            .map(|k| match k % 6 {
                0 | 5 => 0.0,
                2 => 10.0,
                _ => 1.0,
            })
            .collect();
        let c = CostMap::new(data, p.overlap().clone()).unwrap();
        let r = graphcut_seam(&c, &p).unwrap();
        assert!((r.energy - brute(&c, &p)).abs() < 1e-9);
        assert!((r.energy - 8.0).abs() < 1e-9);
    }

    #[test]
    fn matches_exhaustive_labelings() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let h = rng.gen_range(1..=4);
            let ow = rng.gen_range(1..=4);
            let p = strip_pair(h, ow + 2, ow + 1, 1);
            let data: Vec<f64> = (0..h * (ow + 2))
                .map(|k| {
                    if p.overlap().at(k) {
                        rng.gen_range(0.0..3.0)
                    } else {
                        0.0
                    }
                })
                .collect();
            let c = CostMap::new(data, p.overlap().clone()).unwrap();
            match graphcut_seam(&c, &p) {
                Ok(r) => assert!((r.energy - brute(&c, &p)).abs() < 1e-9),
                Err(Error::SeamEndpointsUndefined(_)) => assert_eq!(ow, 1),
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn overlap_without_reference_side_is_rejected() {
        let d = Dims::new(3, 4);
        let img = Image::filled(d, [0.5; 3]);
        let p = AlignedPair::new(
            img.clone(),
            img,
            BinaryMask::ones(d),
            BinaryMask::from_fn(d, |_, j| j >= 2),
        )
        .unwrap();
        assert!(matches!(
            graphcut_seam(&CostMap::zeros(p.overlap().clone()), &p),
            Err(Error::SeamEndpointsUndefined("reference"))
        ));
    }
}
