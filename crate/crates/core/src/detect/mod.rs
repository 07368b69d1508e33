//! Constraint/variable classification, CCM reordering and block decomposition.

mod classify;
mod decompose;
mod partition;
mod reorder;

pub use classify::{
    classify, compute_col_features, compute_row_features, Classification, ColFeatures, RowFeatures,
    Thresholds,
};
pub use decompose::{decompose, decompose_detailed, Decomposition, DetectorParams, LineRefine};
pub use partition::{partition_columns, BlockPartition, PartitionUnit};
pub use reorder::{reorder, Group, Reordering};

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailReason {
    /// More than the allowed fraction of rows ended up as master constraints.
    TooManyMasterRows,
    /// Fewer than two block units were found.
    NoBlocks,
}

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("matrix has no rows or no columns")]
    EmptyMatrix,
    #[error("threshold {name} = {value} outside [0, 1]")]
    BadThreshold { name: &'static str, value: f64 },
    #[error("detection horizon must be at least 1")]
    BadZeta,
    #[error("decomposition failed ({reason:?}): {master_rows} of {total_rows} rows are master rows, {units} units")]
    DecompositionFailed {
        reason: FailReason,
        master_rows: usize,
        total_rows: usize,
        units: usize,
    },
    #[error("partition does not fit the instance: {0}")]
    InvalidPartition(String),
}

/// Nonzero pattern with row and column adjacency, indices ascending.
pub(crate) struct Pattern {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<Vec<usize>>,
    pub cols: Vec<Vec<usize>>,
}

impl Pattern {
    pub fn new<T: crate::Scalar>(a: &crate::milp::CooMatrix<T>) -> Self {
        let mut rows = vec![Vec::new(); a.nrows];
        let mut cols = vec![Vec::new(); a.ncols];
        for e in &a.entries {
            if e.value != T::zero() {
                rows[e.row].push(e.col);
                cols[e.col].push(e.row);
            }
        }
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
        }
        for c in &mut cols {
            c.sort_unstable();
            c.dedup();
        }
        Self { nrows: a.nrows, ncols: a.ncols, rows, cols }
    }
}
