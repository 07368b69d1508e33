use std::ops::Range;

use blockforge::detect::{Classification, Thresholds};
use blockforge::milp::CooMatrix;

pub fn to_coo(m: usize, n: usize, dense: &[Vec<bool>]) -> CooMatrix<f64> {
    let mut a = CooMatrix::new(m, n);
    for (i, row) in dense.iter().enumerate() {
        for (j, &nz) in row.iter().enumerate() {
            if nz {
                a.push(i, j, 1.0);
            }
        }
    }
    a
}

fn scale(v: &mut [Vec<f64>]) {
    for k in 0..v[0].len() {
        let lo = v.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min);
        let hi = v.iter().map(|r| r[k]).fold(f64::NEG_INFINITY, f64::max);
        for r in v.iter_mut() {
            r[k] = if hi > lo { (r[k] - lo) / (hi - lo) } else { 0.0 };
        }
    }
}

/// Straight scan of the dense matrix, one line at a time.
pub fn dense_classify(m: usize, n: usize, d: &[Vec<bool>], t: &Thresholds, db: bool) -> Classification {
    let mut colf: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let hits: Vec<usize> = (0..m).filter(|&i| d[i][j]).collect();
            let range = if hits.is_empty() { 0 } else { hits[hits.len() - 1] - hits[0] };
            vec![range as f64 / m as f64, hits.len() as f64 / m as f64]
        })
        .collect();
    let mut rowf: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let hits: Vec<f64> = (0..n).filter(|&j| d[i][j]).map(|j| j as f64).collect();
            let k = hits.len() as f64;
            let std = if hits.len() < 2 {
                0.0
            } else {
                let mu = hits.iter().sum::<f64>() / k;
                (hits.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / k).sqrt()
            };
            let range = if hits.is_empty() { 0.0 } else { hits[hits.len() - 1] - hits[0] };
            vec![std, k / n as f64, range / n as f64]
        })
        .collect();
    scale(&mut colf);
    scale(&mut rowf);
    let mut c = Classification::default();
    let bd: Vec<bool> = colf.iter().map(|f| db && f[0] > t.phi1 && f[1] > t.phi2).collect();
    for j in 0..n {
        if bd[j] { c.bd_vars.push(j) } else { c.bl_vars.push(j) }
    }
    for i in 0..m {
        let f = &rowf[i];
        if (0..n).any(|j| d[i][j] && bd[j]) {
            c.db_cons.push(i);
        } else if f[0] > t.phi3 && f[1] > t.phi4 && f[2] > t.phi5 {
            c.m_cons.push(i);
        } else {
            c.b_cons.push(i);
        }
    }
    c
}

pub fn dense_cuts(d: &[Vec<bool>], zeta: usize) -> Vec<Range<usize>> {
    let (h, w) = (d.len() as isize, d[0].len() as isize);
    let white = |i: isize, j: isize| i >= 0 && j >= 0 && i < h && j < w && d[i as usize][j as usize];
    let black = |i: isize, j: isize| i >= 0 && j >= 0 && i < h && j < w && !d[i as usize][j as usize];
    let z = zeta as isize;
    let mut cuts = vec![];
    let mut start = 0;
    for j in 0..w {
        let hit = (0..h).any(|i| {
            white(i, j)
                && (((1..=z).all(|t| white(i - t, j - t)) && black(i + 1, j + 1))
                    || ((1..=z).all(|t| white(i - t, j)) && black(i + 1, j)))
        });
        if hit {
            cuts.push(start..j as usize + 1);
            start = j as usize + 1;
        }
    }
    if start < w as usize {
        cuts.push(start..w as usize);
    }
    cuts
}
