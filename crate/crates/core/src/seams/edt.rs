use crate::imaging::{BinaryMask, Dims};

/// Lower envelope of parabolas rooted at `f` (Felzenszwalb and Huttenlocher).
/// `f` holds squared distances, with `INFINITY` where there is no site.
fn envelope_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let sites: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if sites.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut k = 0;
    v[0] = sites[0];
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for &q in &sites[1..] {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
                continue;
            }
            if s <= z[k] {
                // k == 0 and the new parabola dominates everywhere.
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
            }
            break;
        }
    }
    let mut k = 0;
    for (x, o) in out.iter_mut().enumerate() {
        while z[k + 1] < x as f64 {
            k += 1;
        }
        let d = x as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance from every pixel to the nearest set pixel
/// of `sites`; `INFINITY` everywhere when `sites` is empty.
pub fn squared_distance_transform(sites: &BinaryMask) -> Vec<f64> {
    let d: Dims = sites.dims();
    let mut g: Vec<f64> = sites
        .data()
        .iter()
        .map(|&s| if s != 0 { 0.0 } else { f64::INFINITY })
        .collect();
    let n = d.height.max(d.width);
    let (mut v, mut z) = (vec![0usize; n], vec![0.0; n + 1]);
    let mut col = vec![0.0; d.height];
    let mut col_out = vec![0.0; d.height];
    for j in 0..d.width {
        for i in 0..d.height {
            col[i] = g[d.index(i, j)];
        }
        envelope_1d(&col, &mut col_out, &mut v, &mut z);
        for i in 0..d.height {
            g[d.index(i, j)] = col_out[i];
        }
    }
    let mut row_out = vec![0.0; d.width];
    for i in 0..d.height {
        let row = &g[i * d.width..(i + 1) * d.width];
        envelope_1d(row, &mut row_out, &mut v, &mut z);
        g[i * d.width..(i + 1) * d.width].copy_from_slice(&row_out);
    }
    g
}
