use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::model::{MilpInstance, VarKind};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    /// Two stored entries share a (row, col) position.
    DupEntry,
    /// A per-row or per-column vector does not match the matrix shape.
    LenMismatch,
    /// An entry references a row or column outside the matrix.
    IndexOutOfRange,
    /// Coefficient, objective or rhs value is NaN or infinite, or a bound is NaN.
    NonFinite,
    /// Binary variable whose bounds leave [0, 1].
    BinaryBounds,
    /// Empty or whitespace-containing name (warning; blocks MPS output).
    BadName,
    /// Two rows or two columns with the same name (warning; blocks MPS output).
    DupName,
    /// Lower bound above upper bound (warning; the instance is trivially infeasible).
    BoundOrder,
}

impl IssueCode {
    fn blocks_mps(self) -> bool {
        matches!(self, IssueCode::BadName | IssueCode::DupName)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "index")]
pub enum Location {
    Row(usize),
    Col(usize),
    Entry(usize),
    Instance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Issue {
    pub code: IssueCode,
    pub message: String,
    pub location: Location,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    /// Valid and free of naming problems that would corrupt an MPS file.
    pub fn is_writable(&self) -> bool {
        self.is_valid() && !self.warnings.iter().any(|w| w.code.blocks_mps())
    }

    fn error(&mut self, code: IssueCode, location: Location, message: String) {
        self.errors.push(Issue { code, message, location });
    }

    fn warn(&mut self, code: IssueCode, location: Location, message: String) {
        self.warnings.push(Issue { code, message, location });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (tag, list) in [("error", &self.errors), ("warning", &self.warnings)] {
            for i in list {
                writeln!(f, "{tag} {:?} at {:?}: {}", i.code, i.location, i.message)?;
            }
        }
        Ok(())
    }
}

/// Lists every violated instance invariant.
pub fn validate<T: Scalar>(inst: &MilpInstance<T>) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let m = inst.ccm.nrows;
    let n = inst.ccm.ncols;

    let lens = [
        ("objective", inst.objective.len(), n),
        ("lower bounds", inst.lower.len(), n),
        ("upper bounds", inst.upper.len(), n),
        ("variable kinds", inst.kinds.len(), n),
        ("column names", inst.col_names.len(), n),
        ("rhs", inst.rhs.len(), m),
        ("senses", inst.senses.len(), m),
        ("row names", inst.row_names.len(), m),
    ];
    for (what, got, want) in lens {
        if got != want {
            rep.error(
                IssueCode::LenMismatch,
                Location::Instance,
                format!("{what} has length {got}, expected {want}"),
            );
        }
    }

    let mut seen = HashSet::with_capacity(inst.ccm.entries.len());
    for (k, e) in inst.ccm.entries.iter().enumerate() {
        if e.row >= m || e.col >= n {
            rep.error(
                IssueCode::IndexOutOfRange,
                Location::Entry(k),
                format!("entry ({}, {}) outside {m}x{n}", e.row, e.col),
            );
        }
        if !seen.insert((e.row, e.col)) {
            rep.error(
                IssueCode::DupEntry,
                Location::Entry(k),
                format!("duplicate entry at ({}, {})", e.row, e.col),
            );
        }
        if !e.value.is_finite() {
            rep.error(
                IssueCode::NonFinite,
                Location::Entry(k),
                format!("coefficient at ({}, {}) is {}", e.row, e.col, e.value),
            );
        }
    }

    for (j, c) in inst.objective.iter().enumerate() {
        if !c.is_finite() {
            rep.error(IssueCode::NonFinite, Location::Col(j), format!("objective is {c}"));
        }
    }
    for (i, b) in inst.rhs.iter().enumerate() {
        if !b.is_finite() {
            rep.error(IssueCode::NonFinite, Location::Row(i), format!("rhs is {b}"));
        }
    }
    let cols = n.min(inst.lower.len()).min(inst.upper.len());
    for j in 0..cols {
        let (l, u) = (inst.lower[j], inst.upper[j]);
        if l.is_nan() || u.is_nan() {
            rep.error(IssueCode::NonFinite, Location::Col(j), "bound is NaN".into());
            continue;
        }
        if l > u {
            rep.warn(IssueCode::BoundOrder, Location::Col(j), format!("lower {l} > upper {u}"));
        }
        if inst.kinds.get(j) == Some(&VarKind::Binary) && (l < T::zero() || u > T::one()) {
            rep.error(
                IssueCode::BinaryBounds,
                Location::Col(j),
                format!("binary variable has bounds [{l}, {u}]"),
            );
        }
    }

    check_names(&inst.row_names, Location::Row, &mut rep);
    check_names(&inst.col_names, Location::Col, &mut rep);
    rep
}

fn check_names(names: &[String], loc: fn(usize) -> Location, rep: &mut ValidationReport) {
    let mut first: HashMap<&str, usize> = HashMap::new();
    for (i, name) in names.iter().enumerate() {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            rep.warn(IssueCode::BadName, loc(i), format!("unusable name {name:?}"));
        }
        if let Some(prev) = first.insert(name, i) {
            rep.warn(IssueCode::DupName, loc(i), format!("name {name:?} already used by {prev}"));
            first.insert(name, prev);
        }
    }
}
