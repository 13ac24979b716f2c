use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{dlt_homography, Correspondence, Homography};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacConfig {
    pub iterations: usize,
    /// Maximum reprojection error, in pixels, for a match to count as an inlier.
    pub inlier_threshold: f64,
    pub seed: u64,
    /// Smallest consensus set accepted as a model.
    pub min_inliers: usize,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            iterations: 2000,
            inlier_threshold: 3.0,
            seed: 0,
            min_inliers: 8,
        }
    }
}

fn inliers(h: &Homography, matches: &[Correspondence], thr: f64) -> (Vec<usize>, f64) {
    let mut idx = Vec::new();
    let mut err = 0.0;
    for (k, m) in matches.iter().enumerate() {
        let e = m.reprojection_error(h);
        if e <= thr {
            idx.push(k);
            err += e;
        }
    }
    (idx, err)
}

/// Robust homography fit. Each iteration draws its 4-sample from its own
/// stream (seed, iteration), so the outcome does not depend on scheduling.
///
/// Returns the model refit on the best consensus set, and that set's indices
/// into `matches` recomputed under the refit model.
pub fn ransac_homography(matches: &[Correspondence], cfg: &RansacConfig) -> Result<(Homography, Vec<usize>)> {
    if matches.len() < 4 {
        return Err(Error::InsufficientMatches {
            found: matches.len(),
            required: 4,
        });
    }
    if cfg.iterations == 0 || !(cfg.inlier_threshold > 0.0) {
        return Err(Error::Config(
            "ransac needs positive iterations and inlier threshold".into(),
        ));
    }
    let required = cfg.min_inliers.max(4);
    // (inlier count, error sum, indices)
    let mut best: Option<(usize, f64, Vec<usize>)> = None;
    for it in 0..cfg.iterations {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(it as u64);
        let pick: Vec<Correspondence> = sample(&mut rng, matches.len(), 4)
            .into_iter()
            .map(|k| matches[k])
            .collect();
        let Ok(h) = dlt_homography(&pick) else {
            continue;
        };
        let (idx, err) = inliers(&h, matches, cfg.inlier_threshold);
        let better = match &best {
            None => true,
            Some((n, e, _)) => idx.len() > *n || (idx.len() == *n && err < *e),
        };
        if better {
            best = Some((idx.len(), err, idx));
        }
    }
    let best_count = best.as_ref().map_or(0, |b| b.0);
    let Some((_, _, idx)) = best.filter(|b| b.0 >= required) else {
        return Err(Error::NoConsensus {
            best: best_count,
            required,
        });
    };
    let subset: Vec<Correspondence> = idx.iter().map(|&k| matches[k]).collect();
    let h = dlt_homography(&subset)?;
    let (refit_idx, _) = inliers(&h, matches, cfg.inlier_threshold);
    if refit_idx.len() >= idx.len() {
        Ok((h, refit_idx))
    } else {
        Ok((h, idx))
    }
}
