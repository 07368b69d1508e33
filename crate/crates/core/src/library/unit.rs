use serde::{Deserialize, Serialize};

use super::LibraryError;
use crate::detect::BlockPartition;
use crate::milp::{MilpInstance, Sense, Triplet, VarKind};
use crate::scalar::{ext_real, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitRow<T> {
    pub name: String,
    pub sense: Sense,
    pub rhs: T,
    /// Row of the strip that touches border columns.
    #[serde(default)]
    pub doubly: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct UnitCol<T> {
    pub name: String,
    pub objective: T,
    pub kind: VarKind,
    #[serde(with = "ext_real")]
    pub lower: T,
    #[serde(with = "ext_real")]
    pub upper: T,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub unit: usize,
    /// Original row / column indices in the source instance, in local order.
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// A detached block: its own rows and columns plus the coupling strips.
///
/// `entries` use local (row, col) indices. `mcons_strip` entries are
/// (master ordinal, local col) and `border_strip` entries are
/// (local row, border ordinal), where ordinals are positions in the source
/// partition's sorted master-row / border-column lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BlockUnit<T> {
    pub rows: Vec<UnitRow<T>>,
    pub cols: Vec<UnitCol<T>>,
    pub entries: Vec<Triplet<T>>,
    pub mcons_strip: Vec<Triplet<T>>,
    pub border_strip: Vec<Triplet<T>>,
    pub provenance: Provenance,
}

impl<T: Scalar> BlockUnit<T> {
    pub fn width(&self) -> usize {
        self.cols.len()
    }

    pub fn height(&self) -> usize {
        self.rows.len()
    }

    /// Span of master ordinals used by the coupling strip (largest ordinal + 1).
    pub fn m1(&self) -> usize {
        self.mcons_strip.iter().map(|t| t.row + 1).max().unwrap_or(0)
    }

    /// Span of border ordinals used by the border strip.
    pub fn border_arity(&self) -> usize {
        self.border_strip.iter().map(|t| t.col + 1).max().unwrap_or(0)
    }

    /// Stored entries across the diagonal block and both strips.
    pub fn nnz(&self) -> usize {
        self.entries.len() + self.mcons_strip.len() + self.border_strip.len()
    }

    pub fn check(&self) -> Result<(), LibraryError> {
        let (h, w) = (self.height(), self.width());
        let bad = |m: String| Err(LibraryError::Mismatch(m));
        if let Some(t) = self.entries.iter().find(|t| t.row >= h || t.col >= w) {
            return bad(format!("block entry ({}, {}) outside {h}x{w}", t.row, t.col));
        }
        if let Some(t) = self.mcons_strip.iter().find(|t| t.col >= w) {
            return bad(format!("coupling entry column {} outside width {w}", t.col));
        }
        if let Some(t) = self.border_strip.iter().find(|t| t.row >= h) {
            return bad(format!("border entry row {} outside height {h}", t.row));
        }
        Ok(())
    }
}

/// Parts of a decomposed instance that stay with the host: master rows,
/// border columns and their coupling block.
#[derive(Clone, Debug, PartialEq)]
pub struct HostFrame<T> {
    pub name: String,
    pub nrows: usize,
    pub ncols: usize,
    pub master_rows: Vec<usize>,
    pub master: Vec<UnitRow<T>>,
    pub border_cols: Vec<usize>,
    pub border: Vec<UnitCol<T>>,
    /// (master ordinal, border ordinal, value).
    pub coupling: Vec<Triplet<T>>,
}

pub(crate) fn row_meta<T: Scalar>(inst: &MilpInstance<T>, i: usize, doubly: bool) -> UnitRow<T> {
    UnitRow { name: inst.row_names[i].clone(), sense: inst.senses[i], rhs: inst.rhs[i], doubly }
}

pub(crate) fn col_meta<T: Scalar>(inst: &MilpInstance<T>, j: usize) -> UnitCol<T> {
    UnitCol {
        name: inst.col_names[j].clone(),
        objective: inst.objective[j],
        kind: inst.kinds[j],
        lower: inst.lower[j],
        upper: inst.upper[j],
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Unit(usize, usize),
    Shared(usize),
}

/// Splits an instance into one `BlockUnit` per partition unit.
pub fn extract_block_units<T: Scalar>(
    inst: &MilpInstance<T>,
    partition: &BlockPartition,
) -> Result<Vec<BlockUnit<T>>, LibraryError> {
    partition.check(inst).map_err(|e| LibraryError::Mismatch(e.to_string()))?;
    let (m, n) = (inst.num_rows(), inst.num_cols());
    let mut row_slot = vec![Slot::Shared(0); m];
    let mut col_slot = vec![Slot::Shared(0); n];
    let mut units: Vec<BlockUnit<T>> = Vec::with_capacity(partition.units.len());
    let mut doubly = vec![false; m];
    for u in &partition.units {
        for &i in &u.doubly_rows {
            doubly[i] = true;
        }
    }
    for (k, pu) in partition.units.iter().enumerate() {
        let rows = pu.all_rows();
        let mut cols = pu.cols.clone();
        cols.sort_unstable();
        for (l, &i) in rows.iter().enumerate() {
            row_slot[i] = Slot::Unit(k, l);
        }
        for (l, &j) in cols.iter().enumerate() {
            col_slot[j] = Slot::Unit(k, l);
        }
        units.push(BlockUnit {
            rows: rows.iter().map(|&i| row_meta(inst, i, doubly[i])).collect(),
            cols: cols.iter().map(|&j| col_meta(inst, j)).collect(),
            entries: vec![],
            mcons_strip: vec![],
            border_strip: vec![],
            provenance: Provenance { source: inst.name.clone(), unit: k, rows, cols },
        });
    }
    let mut master = partition.master_rows.clone();
    master.sort_unstable();
    for (o, &i) in master.iter().enumerate() {
        row_slot[i] = Slot::Shared(o);
    }
    let mut border = partition.border_cols.clone();
    border.sort_unstable();
    for (o, &j) in border.iter().enumerate() {
        col_slot[j] = Slot::Shared(o);
    }

    for e in &inst.ccm.entries {
        match (row_slot[e.row], col_slot[e.col]) {
            (Slot::Unit(u, r), Slot::Unit(v, c)) if u == v => {
                units[u].entries.push(Triplet { row: r, col: c, value: e.value })
            }
            // cross-unit entries can only be stored zeros here
            (Slot::Unit(..), Slot::Unit(..)) => {}
            (Slot::Shared(o), Slot::Unit(u, c)) => {
                units[u].mcons_strip.push(Triplet { row: o, col: c, value: e.value })
            }
            (Slot::Unit(u, r), Slot::Shared(o)) => {
                units[u].border_strip.push(Triplet { row: r, col: o, value: e.value })
            }
            (Slot::Shared(_), Slot::Shared(_)) => {}
        }
    }
    for u in &mut units {
        u.entries.sort_by_key(|t| (t.row, t.col));
        u.mcons_strip.sort_by_key(|t| (t.row, t.col));
        u.border_strip.sort_by_key(|t| (t.row, t.col));
    }
    Ok(units)
}

/// The host-side remainder of a decomposition.
pub fn extract_frame<T: Scalar>(
    inst: &MilpInstance<T>,
    partition: &BlockPartition,
) -> Result<HostFrame<T>, LibraryError> {
    partition.check(inst).map_err(|e| LibraryError::Mismatch(e.to_string()))?;
    let mut master_rows = partition.master_rows.clone();
    master_rows.sort_unstable();
    let mut border_cols = partition.border_cols.clone();
    border_cols.sort_unstable();
    let mut mo = vec![None; inst.num_rows()];
    for (o, &i) in master_rows.iter().enumerate() {
        mo[i] = Some(o);
    }
    let mut bo = vec![None; inst.num_cols()];
    for (o, &j) in border_cols.iter().enumerate() {
        bo[j] = Some(o);
    }
    let mut coupling: Vec<Triplet<T>> = inst
        .ccm
        .entries
        .iter()
        .filter_map(|e| match (mo[e.row], bo[e.col]) {
            (Some(r), Some(c)) => Some(Triplet { row: r, col: c, value: e.value }),
            _ => None,
        })
        .collect();
    coupling.sort_by_key(|t| (t.row, t.col));
    Ok(HostFrame {
        name: inst.name.clone(),
        nrows: inst.num_rows(),
        ncols: inst.num_cols(),
        master: master_rows.iter().map(|&i| row_meta(inst, i, false)).collect(),
        border: border_cols.iter().map(|&j| col_meta(inst, j)).collect(),
        master_rows,
        border_cols,
        coupling,
    })
}

/// Puts units back at their provenance positions inside the frame.
pub fn reassemble<T: Scalar>(
    frame: &HostFrame<T>,
    units: &[BlockUnit<T>],
) -> Result<MilpInstance<T>, LibraryError> {
    let (m, n) = (frame.nrows, frame.ncols);
    let mut rows: Vec<Option<UnitRow<T>>> = vec![None; m];
    let mut cols: Vec<Option<UnitCol<T>>> = vec![None; n];
    let mut place_row = |i: usize, r: &UnitRow<T>| -> Result<(), LibraryError> {
        match rows.get_mut(i) {
            Some(slot @ None) => {
                *slot = Some(r.clone());
                Ok(())
            }
            _ => Err(LibraryError::Mismatch(format!("row position {i} invalid or taken"))),
        }
    };
    for (&i, r) in frame.master_rows.iter().zip(&frame.master) {
        place_row(i, r)?;
    }
    for u in units {
        u.check()?;
        if u.provenance.rows.len() != u.height() || u.provenance.cols.len() != u.width() {
            return Err(LibraryError::Mismatch("unit provenance does not match its shape".into()));
        }
        for (&i, r) in u.provenance.rows.iter().zip(&u.rows) {
            place_row(i, r)?;
        }
    }
    let mut place_col = |j: usize, c: &UnitCol<T>| -> Result<(), LibraryError> {
        match cols.get_mut(j) {
            Some(slot @ None) => {
                *slot = Some(c.clone());
                Ok(())
            }
            _ => Err(LibraryError::Mismatch(format!("column position {j} invalid or taken"))),
        }
    };
    for (&j, c) in frame.border_cols.iter().zip(&frame.border) {
        place_col(j, c)?;
    }
    for u in units {
        for (&j, c) in u.provenance.cols.iter().zip(&u.cols) {
            place_col(j, c)?;
        }
    }

    let mut inst = MilpInstance::new(frame.name.clone());
    for (j, c) in cols.into_iter().enumerate() {
        let c = c.ok_or_else(|| LibraryError::Mismatch(format!("column {j} not provided")))?;
        inst.add_col(c.name, c.objective, c.kind, c.lower, c.upper);
    }
    for (i, r) in rows.into_iter().enumerate() {
        let r = r.ok_or_else(|| LibraryError::Mismatch(format!("row {i} not provided")))?;
        inst.add_row(r.name, r.sense, r.rhs, &[]);
    }
    let out_of = |what: &str, o: usize| LibraryError::Mismatch(format!("{what} ordinal {o} out of range"));
    for t in &frame.coupling {
        let i = *frame.master_rows.get(t.row).ok_or_else(|| out_of("master", t.row))?;
        let j = *frame.border_cols.get(t.col).ok_or_else(|| out_of("border", t.col))?;
        inst.ccm.push(i, j, t.value);
    }
    for u in units {
        let (pr, pc) = (&u.provenance.rows, &u.provenance.cols);
        for t in &u.entries {
            inst.ccm.push(pr[t.row], pc[t.col], t.value);
        }
        for t in &u.mcons_strip {
            let i = *frame.master_rows.get(t.row).ok_or_else(|| out_of("master", t.row))?;
            inst.ccm.push(i, pc[t.col], t.value);
        }
        for t in &u.border_strip {
            let j = *frame.border_cols.get(t.col).ok_or_else(|| out_of("border", t.col))?;
            inst.ccm.push(pr[t.row], j, t.value);
        }
    }
    inst.ccm.canonicalize();
    Ok(inst)
}
