use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::scalar::Scalar;

/// Relation of a constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn mps_code(self) -> &'static str {
        match self {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarKind {
    Binary,
    Integer,
    ImplicitInteger,
    Continuous,
}

impl VarKind {
    pub const ALL: [VarKind; 4] = [
        VarKind::Binary,
        VarKind::Integer,
        VarKind::ImplicitInteger,
        VarKind::Continuous,
    ];

    /// True for every kind that carries an integrality requirement.
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }

    pub fn ordinal(self) -> usize {
        match self {
            VarKind::Binary => 0,
            VarKind::Integer => 1,
            VarKind::ImplicitInteger => 2,
            VarKind::Continuous => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triplet<T> {
    pub row: usize,
    pub col: usize,
    pub value: T,
}

/// Coordinate-form sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CooMatrix<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub entries: Vec<Triplet<T>>,
}

impl<T: Scalar> CooMatrix<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) {
        self.entries.push(Triplet { row, col, value });
    }

    /// Number of stored entries with a nonzero value.
    pub fn nnz(&self) -> usize {
        self.entries.iter().filter(|e| e.value != T::zero()).count()
    }

    /// Sorts entries by (row, col).
    pub fn canonicalize(&mut self) {
        self.entries.sort_by_key(|e| (e.row, e.col));
    }

    pub fn drop_zeros(&mut self) {
        self.entries.retain(|e| e.value != T::zero());
    }

    /// Nonzeros of each row as (col, value), columns ascending.
    pub fn row_lists(&self) -> Vec<Vec<(usize, T)>> {
        let mut rows = vec![Vec::new(); self.nrows];
        for e in &self.entries {
            if e.value != T::zero() && e.row < self.nrows {
                rows[e.row].push((e.col, e.value));
            }
        }
        for r in &mut rows {
            r.sort_by_key(|&(c, _)| c);
        }
        rows
    }

    /// Nonzeros of each column as (row, value), rows ascending.
    pub fn col_lists(&self) -> Vec<Vec<(usize, T)>> {
        let mut cols = vec![Vec::new(); self.ncols];
        for e in &self.entries {
            if e.value != T::zero() && e.col < self.ncols {
                cols[e.col].push((e.row, e.value));
            }
        }
        for c in &mut cols {
            c.sort_by_key(|&(r, _)| r);
        }
        cols
    }
}

/// A mixed-integer linear program `min c'x  s.t. Ax (<=,>=,=) b, l <= x <= u`.
#[derive(Clone, Debug, PartialEq)]
pub struct MilpInstance<T> {
    pub name: String,
    pub objective: Vec<T>,
    pub ccm: CooMatrix<T>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<T>,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub kinds: Vec<VarKind>,
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasicStats {
    pub m: usize,
    pub n: usize,
    pub nnz: usize,
    pub integer_count: usize,
}

impl<T: Scalar> MilpInstance<T> {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            objective: Vec::new(),
            ccm: CooMatrix::new(0, 0),
            senses: Vec::new(),
            rhs: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            kinds: Vec::new(),
            row_names: Vec::new(),
            col_names: Vec::new(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.ccm.nrows
    }

    pub fn num_cols(&self) -> usize {
        self.ccm.ncols
    }

    /// Appends a variable and returns its index.
    pub fn add_col(
        &mut self,
        name: impl Into<String>,
        objective: T,
        kind: VarKind,
        lower: T,
        upper: T,
    ) -> usize {
        self.objective.push(objective);
        self.kinds.push(kind);
        self.lower.push(lower);
        self.upper.push(upper);
        self.col_names.push(name.into());
        self.ccm.ncols += 1;
        self.ccm.ncols - 1
    }

    /// Appends a binary variable with bounds [0, 1].
    pub fn add_binary(&mut self, name: impl Into<String>, objective: T) -> usize {
        self.add_col(name, objective, VarKind::Binary, T::zero(), T::one())
    }

    /// Appends a constraint and returns its index.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        sense: Sense,
        rhs: T,
        coefs: &[(usize, T)],
    ) -> usize {
        let row = self.ccm.nrows;
        self.ccm.nrows += 1;
        self.senses.push(sense);
        self.rhs.push(rhs);
        self.row_names.push(name.into());
        for &(col, value) in coefs {
            self.ccm.push(row, col, value);
        }
        row
    }

    pub fn basic_stats(&self) -> BasicStats {
        BasicStats {
            m: self.num_rows(),
            n: self.num_cols(),
            nnz: self.ccm.nnz(),
            integer_count: self.kinds.iter().filter(|k| k.is_integral()).count(),
        }
    }

    /// Copy with entries sorted by (row, col).
    pub fn canonical(&self) -> Self {
        let mut c = self.clone();
        c.ccm.canonicalize();
        c
    }

    /// Equality of names, metadata and sparse entries (up to entry order),
    /// with values compared bit-for-bit.
    pub fn structurally_eq(&self, other: &Self) -> bool {
        fn bits_eq<T: Scalar>(a: &[T], b: &[T]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.bits() == y.bits())
        }
        if self.name != other.name
            || self.ccm.nrows != other.ccm.nrows
            || self.ccm.ncols != other.ccm.ncols
            || self.senses != other.senses
            || self.kinds != other.kinds
            || self.row_names != other.row_names
            || self.col_names != other.col_names
            || !bits_eq(&self.objective, &other.objective)
            || !bits_eq(&self.rhs, &other.rhs)
            || !bits_eq(&self.lower, &other.lower)
            || !bits_eq(&self.upper, &other.upper)
        {
            return false;
        }
        let a = self.canonical();
        let b = other.canonical();
        a.ccm.entries.len() == b.ccm.entries.len()
            && a.ccm
                .entries
                .iter()
                .zip(&b.ccm.entries)
                .all(|(x, y)| x.row == y.row && x.col == y.col && x.value.bits() == y.value.bits())
    }

    /// SHA-256 over the numeric content (not the names), hex encoded.
    pub fn coefficient_hash(&self) -> String {
        let c = self.canonical();
        let mut h = Sha256::new();
        h.update((c.num_rows() as u64).to_le_bytes());
        h.update((c.num_cols() as u64).to_le_bytes());
        for e in &c.ccm.entries {
            h.update((e.row as u64).to_le_bytes());
            h.update((e.col as u64).to_le_bytes());
            h.update(e.value.bits().to_le_bytes());
        }
        for v in c.objective.iter().chain(&c.rhs).chain(&c.lower).chain(&c.upper) {
            h.update(v.bits().to_le_bytes());
        }
        for s in &c.senses {
            h.update([*s as u8]);
        }
        for k in &c.kinds {
            h.update([*k as u8]);
        }
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_instance_stats() {
        let inst = MilpInstance::<f64>::new("empty");
        assert_eq!(
            inst.basic_stats(),
            BasicStats { m: 0, n: 0, nnz: 0, integer_count: 0 }
        );
    }

    #[test]
    fn structural_equality_ignores_entry_order() {
        let mut a = MilpInstance::<f64>::new("a");
        let x = a.add_binary("x", 1.0);
        let y = a.add_binary("y", 2.0);
        a.add_row("r", Sense::Le, 1.0, &[(x, 1.0), (y, 3.0)]);
        let mut b = a.clone();
        b.ccm.entries.reverse();
        assert!(a.structurally_eq(&b));
        b.ccm.entries[0].value = 3.0000000000000004;
        assert!(!a.structurally_eq(&b));
    }

    #[test]
    fn stored_zeros_do_not_count() {
        let mut a = MilpInstance::<f64>::new("z");
        let x = a.add_binary("x", 0.0);
        a.add_row("r", Sense::Le, 1.0, &[(x, 0.0)]);
        assert_eq!(a.basic_stats().nnz, 0);
        assert!(a.ccm.row_lists()[0].is_empty());
    }
}
