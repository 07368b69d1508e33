use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::{Classification, Pattern};
use crate::milp::CooMatrix;
use crate::scalar::Scalar;

/// One connected group of block rows and block columns, as position ranges
/// in the reordered matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub rows: Range<usize>,
    pub cols: Range<usize>,
}

/// Row and column permutations exposing the block structure.
///
/// `row_perm[p]` is the original row shown at position `p` (same for
/// columns). Layout: grouped block rows, then block rows without any block
/// column, then master rows; grouped block columns, then border columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reordering {
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub method: String,
    pub groups: Vec<Group>,
    /// Number of leading rows that are not master rows.
    pub block_rows: usize,
    /// Number of leading columns that are not border columns.
    pub block_cols: usize,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

pub(crate) fn reorder_pattern(p: &Pattern, cls: &Classification) -> Reordering {
    let (m, n) = (p.nrows, p.ncols);
    let mut is_master = vec![false; m];
    for &i in &cls.m_cons {
        is_master[i] = true;
    }
    let mut is_border = vec![false; n];
    for &j in &cls.bd_vars {
        is_border[j] = true;
    }

    let mut uf = UnionFind((0..m + n).collect());
    for i in 0..m {
        if is_master[i] {
            continue;
        }
        for &j in &p.rows[i] {
            if !is_border[j] {
                uf.union(i, m + j);
            }
        }
    }

    // components ordered by their smallest column index
    let mut comp_of_root: std::collections::HashMap<usize, usize> = Default::default();
    let mut comp_cols: Vec<Vec<usize>> = Vec::new();
    for j in (0..n).filter(|&j| !is_border[j]) {
        let r = uf.find(m + j);
        let c = *comp_of_root.entry(r).or_insert_with(|| {
            comp_cols.push(Vec::new());
            comp_cols.len() - 1
        });
        comp_cols[c].push(j);
    }
    let mut comp_rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); comp_cols.len()];
    let mut orphans = Vec::new();
    for i in (0..m).filter(|&i| !is_master[i]) {
        match p.rows[i].iter().find(|&&j| !is_border[j]) {
            Some(&first) => {
                let c = comp_of_root[&uf.find(i)];
                comp_rows[c].push((first, i));
            }
            None => orphans.push(i),
        }
    }

    let mut row_perm = Vec::with_capacity(m);
    let mut col_perm = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(comp_cols.len());
    for (cols, mut rows) in comp_cols.into_iter().zip(comp_rows) {
        rows.sort_unstable();
        let (r0, c0) = (row_perm.len(), col_perm.len());
        row_perm.extend(rows.into_iter().map(|(_, i)| i));
        col_perm.extend(cols);
        groups.push(Group { rows: r0..row_perm.len(), cols: c0..col_perm.len() });
    }
    row_perm.extend(orphans);
    let block_rows = row_perm.len();
    let block_cols = col_perm.len();
    row_perm.extend(cls.m_cons.iter().copied());
    col_perm.extend(cls.bd_vars.iter().copied());

    Reordering {
        row_perm,
        col_perm,
        method: "component-grouping".into(),
        groups,
        block_rows,
        block_cols,
    }
}

/// Groups block rows/columns into connected components of the incidence
/// graph with master rows and border columns removed.
pub fn reorder<T: Scalar>(a: &CooMatrix<T>, cls: &Classification) -> Reordering {
    reorder_pattern(&Pattern::new(a), cls)
}
