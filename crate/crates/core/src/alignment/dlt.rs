use nalgebra::{DMatrix, Matrix3};

use super::{Correspondence, Homography};
use crate::error::{Error, Result};

/// Similarity that moves the centroid to the origin and sets the mean distance to sqrt(2).
fn normalizer(pts: &[(f64, f64)]) -> Matrix3<f64> {
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_dist = pts.iter().map(|p| (p.0 - cx).hypot(p.1 - cy)).sum::<f64>() / n;
    let s = if mean_dist > 0.0 {
        std::f64::consts::SQRT_2 / mean_dist
    } else {
        1.0
    };
    Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0)
}

fn transform(t: &Matrix3<f64>, p: (f64, f64)) -> (f64, f64) {
    let w = t[(2, 0)] * p.0 + t[(2, 1)] * p.1 + t[(2, 2)];
    (
        (t[(0, 0)] * p.0 + t[(0, 1)] * p.1 + t[(0, 2)]) / w,
        (t[(1, 0)] * p.0 + t[(1, 1)] * p.1 + t[(1, 2)]) / w,
    )
}

fn twice_area(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).abs()
}

/// Rejects point sets that cannot determine a homography. Points are in
/// normalised coordinates, so the tolerance is scale-free.
fn check_configuration(pts: &[(f64, f64)], role: &str) -> Result<()> {
    const EPS: f64 = 1e-9;
    if pts.len() == 4 {
        for skip in 0..4 {
            let t: Vec<_> = (0..4).filter(|&k| k != skip).map(|k| pts[k]).collect();
            if twice_area(t[0], t[1], t[2]) < EPS {
                return Err(Error::Degenerate(format!("three collinear {role} points")));
            }
        }
        return Ok(());
    }
    // With more points, fail only if every point lies on one line.
    let far = (1..pts.len())
        .max_by(|&a, &b| {
            let da = (pts[a].0 - pts[0].0).hypot(pts[a].1 - pts[0].1);
            let db = (pts[b].0 - pts[0].0).hypot(pts[b].1 - pts[0].1);
            da.total_cmp(&db)
        })
        .unwrap();
    if pts.iter().all(|&p| twice_area(pts[0], pts[far], p) < EPS) {
        return Err(Error::Degenerate(format!("all {role} points are collinear")));
    }
    Ok(())
}

/// Least-squares direct linear transform with Hartley normalisation.
pub fn dlt_homography(matches: &[Correspondence]) -> Result<Homography> {
    if matches.len() < 4 {
        return Err(Error::InsufficientMatches {
            found: matches.len(),
            required: 4,
        });
    }
    let src: Vec<_> = matches.iter().map(|m| m.src).collect();
    let dst: Vec<_> = matches.iter().map(|m| m.dst).collect();
    let ts = normalizer(&src);
    let td = normalizer(&dst);
    let ns: Vec<_> = src.iter().map(|&p| transform(&ts, p)).collect();
    let nd: Vec<_> = dst.iter().map(|&p| transform(&td, p)).collect();
    check_configuration(&ns, "source")?;
    check_configuration(&nd, "destination")?;

    // Pad to at least 9 rows so the SVD yields the full right singular basis.
    let rows = (2 * matches.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (k, (&(x, y), &(u, v))) in ns.iter().zip(&nd).enumerate() {
        let r = 2 * k;
        a.row_mut(r)
            .copy_from_slice(&[-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v]);
    }
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Degenerate("SVD did not converge".into()))?;
    let (mut min_k, mut min_s) = (0, f64::INFINITY);
    let mut sorted: Vec<f64> = svd.singular_values.iter().copied().collect();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s < min_s {
            min_s = s;
            min_k = k;
        }
    }
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted[7] <= 1e-12 * sorted[0].max(1e-300) {
        return Err(Error::Degenerate(
            "correspondences do not determine a homography".into(),
        ));
    }
    let h = v_t.row(min_k);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let td_inv = td
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("normaliser not invertible".into()))?;
    let full = td_inv * hn * ts;
    Homography::new([
        [full[(0, 0)], full[(0, 1)], full[(0, 2)]],
        [full[(1, 0)], full[(1, 1)], full[(1, 2)]],
        [full[(2, 0)], full[(2, 1)], full[(2, 2)]],
    ])
}
