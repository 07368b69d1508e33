use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{DetectError, DetectorParams};
use crate::graph::CcmImage;
use crate::milp::MilpInstance;
use crate::scalar::Scalar;

/// One block unit of a partition, in original instance indices (ascending).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionUnit {
    /// Block rows without border entries (the `D` strip, or the secondary
    /// strip of a composite unit).
    pub rows: Vec<usize>,
    /// Block rows that also touch border columns (the strip next to `F`).
    pub doubly_rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl PartitionUnit {
    /// All block rows, ascending.
    pub fn all_rows(&self) -> Vec<usize> {
        let mut r: Vec<usize> = self.rows.iter().chain(&self.doubly_rows).copied().collect();
        r.sort_unstable();
        r
    }

    pub fn width(&self) -> usize {
        self.cols.len()
    }

    pub fn is_composite(&self) -> bool {
        !self.rows.is_empty() && !self.doubly_rows.is_empty()
    }
}

/// Block decomposition of an instance.
///
/// Rows split into unit rows and `master_rows`; columns into unit columns and
/// `border_cols`. Master rows × border columns form the coupling block that
/// stays with the host instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    pub units: Vec<PartitionUnit>,
    pub master_rows: Vec<usize>,
    pub border_cols: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<DetectorParams>,
}

impl BlockPartition {
    /// Single unit holding every row and column.
    pub fn trivial<T: Scalar>(inst: &MilpInstance<T>) -> Self {
        Self {
            units: vec![PartitionUnit {
                rows: (0..inst.num_rows()).collect(),
                doubly_rows: vec![],
                cols: (0..inst.num_cols()).collect(),
            }],
            master_rows: vec![],
            border_cols: vec![],
            params: None,
        }
    }

    pub fn block_var_count(&self) -> usize {
        self.units.iter().map(PartitionUnit::width).sum()
    }

    pub fn max_unit_width(&self) -> usize {
        self.units.iter().map(PartitionUnit::width).max().unwrap_or(0)
    }

    /// Same partition with sorted index lists and units ordered by their
    /// smallest column; parameters dropped.
    pub fn canonical(&self) -> Self {
        let mut units: Vec<PartitionUnit> = self
            .units
            .iter()
            .map(|u| {
                let mut u = u.clone();
                u.rows.sort_unstable();
                u.doubly_rows.sort_unstable();
                u.cols.sort_unstable();
                u
            })
            .collect();
        units.sort_by_key(|u| (u.cols.first().copied(), u.all_rows().first().copied()));
        let mut master_rows = self.master_rows.clone();
        master_rows.sort_unstable();
        let mut border_cols = self.border_cols.clone();
        border_cols.sort_unstable();
        Self { units, master_rows, border_cols, params: None }
    }

    /// `canonical` that keeps the detector parameters.
    pub fn canonical_with_params(&self) -> Self {
        Self { params: self.params, ..self.canonical() }
    }

    /// Equality up to unit order and parameters.
    pub fn same_blocks(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }

    /// Checks cover/disjointness of rows and columns and that no unit row has
    /// a nonzero in another unit's columns.
    pub fn check<T: Scalar>(&self, inst: &MilpInstance<T>) -> Result<(), DetectError> {
        let (m, n) = (inst.num_rows(), inst.num_cols());
        let bad = |msg: String| Err(DetectError::InvalidPartition(msg));

        let mut col_owner = vec![usize::MAX; n];
        let border = usize::MAX - 1;
        for (u, unit) in self.units.iter().enumerate() {
            for &j in &unit.cols {
                if j >= n {
                    return bad(format!("unit {u} column {j} out of range"));
                }
                if col_owner[j] != usize::MAX {
                    return bad(format!("column {j} assigned twice"));
                }
                col_owner[j] = u;
            }
        }
        for &j in &self.border_cols {
            if j >= n {
                return bad(format!("border column {j} out of range"));
            }
            if col_owner[j] != usize::MAX {
                return bad(format!("column {j} assigned twice"));
            }
            col_owner[j] = border;
        }
        if let Some(j) = col_owner.iter().position(|&o| o == usize::MAX) {
            return bad(format!("column {j} not covered"));
        }

        let mut row_owner = vec![usize::MAX; m];
        let master = usize::MAX - 1;
        for (u, unit) in self.units.iter().enumerate() {
            for &i in unit.rows.iter().chain(&unit.doubly_rows) {
                if i >= m {
                    return bad(format!("unit {u} row {i} out of range"));
                }
                if row_owner[i] != usize::MAX {
                    return bad(format!("row {i} assigned twice"));
                }
                row_owner[i] = u;
            }
        }
        for &i in &self.master_rows {
            if i >= m {
                return bad(format!("master row {i} out of range"));
            }
            if row_owner[i] != usize::MAX {
                return bad(format!("row {i} assigned twice"));
            }
            row_owner[i] = master;
        }
        if let Some(i) = row_owner.iter().position(|&o| o == usize::MAX) {
            return bad(format!("row {i} not covered"));
        }

        for e in &inst.ccm.entries {
            if e.value == T::zero() {
                continue;
            }
            let (ro, co) = (row_owner[e.row], col_owner[e.col]);
            if ro != master && co != border && ro != co {
                return bad(format!(
                    "entry ({}, {}) links unit {ro} rows with unit {co} columns",
                    e.row, e.col
                ));
            }
        }
        Ok(())
    }
}

fn white_or_false(img: &CcmImage, i: isize, j: isize) -> bool {
    i >= 0
        && j >= 0
        && (i as usize) < img.height
        && (j as usize) < img.width
        && img.is_white(i as usize, j as usize)
}

fn black_in_image(img: &CcmImage, i: usize, j: usize) -> bool {
    i < img.height && j < img.width && !img.is_white(i, j)
}

/// Line-endpoint column partition of a reordered block image.
///
/// Columns are scanned left to right and each column top to bottom. A cut is
/// placed after column `j` at the first white pixel `(i, j)` that ends a
/// diagonal run (the `zeta` pixels up-left are white and `(i+1, j+1)` is
/// black) or a vertical run (the `zeta` pixels above are white and `(i+1, j)`
/// is black). Pixels outside the image are neither white nor black. Trailing
/// columns after the last cut form the final range.
pub fn partition_columns(img: &CcmImage, zeta: usize) -> Result<Vec<Range<usize>>, DetectError> {
    if zeta < 1 {
        return Err(DetectError::BadZeta);
    }
    let z = zeta as isize;
    let mut out = Vec::new();
    let mut p = 0;
    for j in 0..img.width {
        let jj = j as isize;
        for i in 0..img.height {
            if !img.is_white(i, j) {
                continue;
            }
            let ii = i as isize;
            let diagonal = (1..=z).all(|t| white_or_false(img, ii - t, jj - t))
                && black_in_image(img, i + 1, j + 1);
            let vertical = (1..=z).all(|t| white_or_false(img, ii - t, jj))
                && black_in_image(img, i + 1, j);
            if diagonal || vertical {
                out.push(p..j + 1);
                p = j + 1;
                break;
            }
        }
    }
    if p < img.width {
        out.push(p..img.width);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `widths.len()` blocks; block b is a diagonal line of length w followed by
    /// one horizontal line row under it.
    fn diagonal_blocks(widths: &[usize]) -> CcmImage {
        let height: usize = widths.iter().map(|w| w + 1).sum();
        let width: usize = widths.iter().sum();
        let mut pts = vec![];
        let (mut r0, mut c0) = (0, 0);
        for &w in widths {
            for t in 0..w {
                pts.push((r0 + t, c0 + t));
                pts.push((r0 + w, c0 + t));
            }
            r0 += w + 1;
            c0 += w;
        }
        CcmImage::from_points(height, width, pts)
    }

    #[test]
    fn equal_diagonal_blocks() {
        let w = 5;
        let cuts = partition_columns(&diagonal_blocks(&[w, w, w]), 3).unwrap();
        assert_eq!(cuts, vec![0..w, w..2 * w, 2 * w..3 * w]);
    }

    #[test]
    fn unequal_diagonal_blocks() {
        let cuts = partition_columns(&diagonal_blocks(&[5, 7, 6, 9]), 4).unwrap();
        assert_eq!(cuts, vec![0..5, 5..12, 12..18, 18..27]);
    }

    #[test]
    fn solid_block_is_one_range() {
        let pts: Vec<_> = (0..6).flat_map(|i| (0..4).map(move |j| (i, j))).collect();
        let img = CcmImage::from_points(6, 4, pts);
        assert_eq!(partition_columns(&img, 3).unwrap(), vec![0..4]);
    }

    #[test]
    fn short_lines_do_not_cut() {
        // diagonal of length zeta has only zeta-1 predecessors
        let cuts = partition_columns(&diagonal_blocks(&[3, 3]), 3).unwrap();
        assert_eq!(cuts, vec![0..6]);
    }

    #[test]
    fn vertical_run_cuts() {
        let mut pts: Vec<_> = (0..4).map(|i| (i, 0)).collect();
        pts.push((5, 1));
        let img = CcmImage::from_points(6, 2, pts);
        assert_eq!(partition_columns(&img, 3).unwrap(), vec![0..1, 1..2]);
    }

    #[test]
    fn zero_zeta_rejected() {
        assert_eq!(partition_columns(&CcmImage::blank(1, 1), 0), Err(DetectError::BadZeta));
    }

    #[test]
    fn empty_image_gives_no_ranges() {
        assert!(partition_columns(&CcmImage::blank(0, 0), 3).unwrap().is_empty());
    }
}
