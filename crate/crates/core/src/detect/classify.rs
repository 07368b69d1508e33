use serde::{Deserialize, Serialize};

use super::{DetectError, Pattern};
use crate::milp::CooMatrix;
use crate::scalar::Scalar;

/// Per-row features: std of nonzero column indices, density, and index range
/// over `n`. `raw` holds the values as measured, `normalized` the per-feature
/// min-max scaled values used for classification.
#[derive(Clone, Debug, PartialEq)]
pub struct RowFeatures {
    pub raw: Vec<[f64; 3]>,
    pub normalized: Vec<[f64; 3]>,
}

/// Per-column features: index range over `m` and density.
#[derive(Clone, Debug, PartialEq)]
pub struct ColFeatures {
    pub raw: Vec<[f64; 2]>,
    pub normalized: Vec<[f64; 2]>,
}

/// Classification thresholds. `phi1`/`phi2` gate border variables on column
/// range/density; `phi3..phi5` gate master constraints on row std/density/range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
    pub phi4: f64,
    pub phi5: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { phi1: 0.75, phi2: 0.75, phi3: 0.5, phi4: 0.2, phi5: 0.5 }
    }
}

impl Thresholds {
    pub fn check(&self) -> Result<(), DetectError> {
        for (name, value) in [
            ("phi1", self.phi1),
            ("phi2", self.phi2),
            ("phi3", self.phi3),
            ("phi4", self.phi4),
            ("phi5", self.phi5),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(DetectError::BadThreshold { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub m_cons: Vec<usize>,
    pub b_cons: Vec<usize>,
    pub db_cons: Vec<usize>,
    pub bl_vars: Vec<usize>,
    pub bd_vars: Vec<usize>,
}

fn min_max_normalize<const K: usize>(raw: &[[f64; K]]) -> Vec<[f64; K]> {
    let mut lo = [f64::INFINITY; K];
    let mut hi = [f64::NEG_INFINITY; K];
    for r in raw {
        for k in 0..K {
            lo[k] = lo[k].min(r[k]);
            hi[k] = hi[k].max(r[k]);
        }
    }
    raw.iter()
        .map(|r| {
            let mut out = [0.0; K];
            for k in 0..K {
                if hi[k] > lo[k] {
                    out[k] = (r[k] - lo[k]) / (hi[k] - lo[k]);
                }
            }
            out
        })
        .collect()
}

fn index_std(idx: &[usize]) -> f64 {
    if idx.len() < 2 {
        return 0.0;
    }
    let len = idx.len() as f64;
    let mean = idx.iter().map(|&x| x as f64).sum::<f64>() / len;
    let var = idx.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / len;
    var.sqrt()
}

fn span(idx: &[usize]) -> f64 {
    match (idx.first(), idx.last()) {
        (Some(&a), Some(&b)) => (b - a) as f64,
        _ => 0.0,
    }
}

pub(crate) fn row_features(p: &Pattern) -> Result<RowFeatures, DetectError> {
    if p.nrows == 0 || p.ncols == 0 {
        return Err(DetectError::EmptyMatrix);
    }
    let n = p.ncols as f64;
    let raw: Vec<[f64; 3]> = p
        .rows
        .iter()
        .map(|r| [index_std(r), r.len() as f64 / n, span(r) / n])
        .collect();
    let normalized = min_max_normalize(&raw);
    Ok(RowFeatures { raw, normalized })
}

pub(crate) fn col_features(p: &Pattern) -> Result<ColFeatures, DetectError> {
    if p.nrows == 0 || p.ncols == 0 {
        return Err(DetectError::EmptyMatrix);
    }
    let m = p.nrows as f64;
    let raw: Vec<[f64; 2]> = p.cols.iter().map(|c| [span(c) / m, c.len() as f64 / m]).collect();
    let normalized = min_max_normalize(&raw);
    Ok(ColFeatures { raw, normalized })
}

pub fn compute_row_features<T: Scalar>(a: &CooMatrix<T>) -> Result<RowFeatures, DetectError> {
    row_features(&Pattern::new(a))
}

pub fn compute_col_features<T: Scalar>(a: &CooMatrix<T>) -> Result<ColFeatures, DetectError> {
    col_features(&Pattern::new(a))
}

pub(crate) fn classify_pattern(
    p: &Pattern,
    t: &Thresholds,
    detect_db: bool,
) -> Result<Classification, DetectError> {
    t.check()?;
    let rf = row_features(p)?;
    let cf = col_features(p)?;
    let mut out = Classification::default();
    let mut is_bd = vec![false; p.ncols];
    for (j, f) in cf.normalized.iter().enumerate() {
        if detect_db && f[0] > t.phi1 && f[1] > t.phi2 {
            is_bd[j] = true;
            out.bd_vars.push(j);
        } else {
            out.bl_vars.push(j);
        }
    }
    for (i, f) in rf.normalized.iter().enumerate() {
        if p.rows[i].iter().any(|&j| is_bd[j]) {
            out.db_cons.push(i);
        } else if f[0] > t.phi3 && f[1] > t.phi4 && f[2] > t.phi5 {
            out.m_cons.push(i);
        } else {
            out.b_cons.push(i);
        }
    }
    Ok(out)
}

/// Splits rows into master / block / doubly-block constraints and columns
/// into block / border variables.
pub fn classify<T: Scalar>(
    a: &CooMatrix<T>,
    thresholds: &Thresholds,
    detect_db: bool,
) -> Result<Classification, DetectError> {
    classify_pattern(&Pattern::new(a), thresholds, detect_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(m: usize, n: usize, pts: &[(usize, usize)]) -> CooMatrix<f64> {
        let mut a = CooMatrix::new(m, n);
        for &(i, j) in pts {
            a.push(i, j, 1.0);
        }
        a
    }

    #[test]
    fn single_full_row() {
        let n = 8;
        let a = matrix(1, n, &(0..n).map(|j| (0, j)).collect::<Vec<_>>());
        let f = compute_row_features(&a).unwrap();
        assert_eq!(f.raw[0][1], 1.0);
        assert_eq!(f.raw[0][2], (n - 1) as f64 / n as f64);
        assert_eq!(f.normalized[0], [0.0; 3]);
    }

    #[test]
    fn column_with_one_nonzero() {
        let a = matrix(4, 2, &[(2, 0), (0, 1), (3, 1)]);
        let f = compute_col_features(&a).unwrap();
        assert_eq!(f.raw[0], [0.0, 0.25]);
        assert_eq!(f.raw[1], [0.75, 0.5]);
        assert_eq!(f.normalized[0], [0.0, 0.0]);
        assert_eq!(f.normalized[1], [1.0, 1.0]);
    }

    #[test]
    fn spanning_master_row_gets_full_range() {
        // three 2x2 blocks plus one row over all six columns
        let mut pts = vec![];
        for b in 0..3 {
            for r in 0..2 {
                for c in 0..2 {
                    pts.push((2 * b + r, 2 * b + c));
                }
            }
        }
        pts.extend((0..6).map(|j| (6, j)));
        let a = matrix(7, 6, &pts);
        let f = compute_row_features(&a).unwrap();
        assert_eq!(f.normalized[6][2], 1.0);
        assert!(f.normalized.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        let c = classify(&a, &Thresholds::default(), false).unwrap();
        assert_eq!(c.m_cons, vec![6]);
        assert_eq!(c.b_cons, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn block_diagonal_is_all_block() {
        let mut pts = vec![];
        for b in 0..4 {
            for r in 0..3 {
                for c in 0..3 {
                    pts.push((3 * b + r, 3 * b + c));
                }
            }
        }
        let a = matrix(12, 12, &pts);
        let c = classify(&a, &Thresholds::default(), false).unwrap();
        assert!(c.m_cons.is_empty() && c.db_cons.is_empty() && c.bd_vars.is_empty());
        assert_eq!(c.b_cons.len(), 12);
        assert_eq!(c.bl_vars.len(), 12);
    }

    #[test]
    fn border_columns_mark_doubly_rows() {
        // four 1x2 blocks in rows 0,1,3,4 with column 8 in every block row;
        // row 2 spans the block columns
        let mut pts = vec![];
        for (b, row) in [0, 1, 3, 4].into_iter().enumerate() {
            pts.extend([(row, 2 * b), (row, 2 * b + 1), (row, 8)]);
        }
        pts.extend((0..8).map(|j| (2, j)));
        let a = matrix(5, 9, &pts);
        let c = classify(&a, &Thresholds::default(), true).unwrap();
        assert_eq!(c.bd_vars, vec![8]);
        assert_eq!(c.db_cons, vec![0, 1, 3, 4]);
        assert_eq!(c.m_cons, vec![2]);
        let off = classify(&a, &Thresholds::default(), false).unwrap();
        assert!(off.bd_vars.is_empty() && off.db_cons.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        let a = matrix(0, 3, &[]);
        assert_eq!(compute_row_features(&a), Err(DetectError::EmptyMatrix));
        let b = matrix(2, 2, &[(0, 0)]);
        let t = Thresholds { phi4: 1.5, ..Thresholds::default() };
        assert!(matches!(classify(&b, &t, false), Err(DetectError::BadThreshold { name: "phi4", .. })));
    }

    #[test]
    fn idempotent() {
        let a = matrix(3, 4, &[(0, 0), (0, 3), (1, 1), (2, 2), (2, 3)]);
        let t = Thresholds::default();
        assert_eq!(classify(&a, &t, true).unwrap(), classify(&a, &t, true).unwrap());
    }
}
