use std::collections::HashSet;

use super::OpError;
use crate::detect::{BlockPartition, PartitionUnit};
use crate::library::BlockUnit;
use crate::milp::{MilpInstance, Sense};
use crate::scalar::Scalar;

/// How a unit's master-row ordinals map onto the host's master rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchPlan {
    /// `targets[o]` is the host master ordinal for unit ordinal `o`, or
    /// `None` when that coupling row is dropped.
    pub targets: Vec<Option<usize>>,
}

impl MatchPlan {
    pub fn dropped(&self) -> usize {
        self.targets.iter().filter(|t| t.is_none()).count()
    }

    pub fn is_identity(&self) -> bool {
        self.targets.iter().enumerate().all(|(o, t)| *t == Some(o))
    }
}

/// Ordinal-preserving matching of `m1` unit coupling rows onto `m2` host
/// master rows. Ordinals at or beyond `m2` are dropped; host rows beyond
/// `m1` receive nothing.
pub fn match_mcons(m1: usize, m2: usize) -> MatchPlan {
    MatchPlan { targets: (0..m1).map(|o| (o < m2).then_some(o)).collect() }
}

/// Edits a host instance unit by unit: removed units are only marked, new
/// units are appended, and `finish` compacts everything at the end.
pub struct InstanceBuilder<T> {
    inst: MilpInstance<T>,
    row_gone: Vec<bool>,
    col_gone: Vec<bool>,
    master_rows: Vec<usize>,
    border_cols: Vec<usize>,
    units: Vec<Option<PartitionUnit>>,
    original_units: usize,
    names: HashSet<String>,
    inserted: usize,
    strict_border: bool,
    partition: BlockPartition,
}

impl<T: Scalar> InstanceBuilder<T> {
    pub fn new(inst: &MilpInstance<T>, partition: &BlockPartition) -> Result<Self, OpError> {
        partition.check(inst)?;
        let mut master_rows = partition.master_rows.clone();
        master_rows.sort_unstable();
        let mut border_cols = partition.border_cols.clone();
        border_cols.sort_unstable();
        let names = inst.row_names.iter().chain(&inst.col_names).cloned().collect();
        Ok(Self {
            inst: inst.clone(),
            row_gone: vec![false; inst.num_rows()],
            col_gone: vec![false; inst.num_cols()],
            master_rows,
            border_cols,
            units: partition.units.iter().cloned().map(Some).collect(),
            original_units: partition.units.len(),
            names,
            inserted: 0,
            strict_border: false,
            partition: partition.clone(),
        })
    }

    /// Fail on border ordinals the host cannot serve instead of dropping them.
    pub fn strict_border(mut self, strict: bool) -> Self {
        self.strict_border = strict;
        self
    }

    pub fn master_count(&self) -> usize {
        self.master_rows.len()
    }

    pub fn border_count(&self) -> usize {
        self.border_cols.len()
    }

    /// Units currently present (kept originals and insertions).
    pub fn unit_count(&self) -> usize {
        self.units.iter().filter(|u| u.is_some()).count()
    }

    pub fn unit_width(&self, k: usize) -> Option<usize> {
        self.units.get(k).and_then(|u| u.as_ref()).map(|u| u.width())
    }

    /// Drops unit `k` with its rows, columns and coupling entries.
    pub fn remove_unit(&mut self, k: usize) -> Result<usize, OpError> {
        let u = self
            .units
            .get_mut(k)
            .and_then(Option::take)
            .ok_or(OpError::NoSuchUnit(k))?;
        for &i in u.rows.iter().chain(&u.doubly_rows) {
            self.row_gone[i] = true;
        }
        for &j in &u.cols {
            self.col_gone[j] = true;
        }
        Ok(u.width())
    }

    fn fresh_name(&mut self, base: &str) -> String {
        let mut name = format!("{base}_g{}", self.inserted);
        let mut k = 0;
        while self.names.contains(&name) {
            k += 1;
            name = format!("{base}_g{}_{k}", self.inserted);
        }
        self.names.insert(name.clone());
        name
    }

    /// Appends a unit: new columns and block rows, couplings into master rows
    /// per `plan`, border entries onto host border columns by ordinal.
    pub fn insert_unit(&mut self, unit: &BlockUnit<T>, plan: &MatchPlan) -> Result<usize, OpError> {
        unit.check()?;
        if plan.targets.len() < unit.m1() {
            return Err(OpError::PlanTooShort { plan: plan.targets.len(), needed: unit.m1() });
        }
        if let Some(t) = plan.targets.iter().flatten().find(|&&t| t >= self.master_rows.len()) {
            return Err(OpError::PlanTarget(*t));
        }
        let arity = unit.border_arity();
        if self.strict_border && arity > self.border_cols.len() {
            return Err(OpError::BorderArity { unit: arity, host: self.border_cols.len() });
        }
        let col0 = self.inst.num_cols();
        for c in &unit.cols {
            let name = self.fresh_name(&c.name);
            self.inst.add_col(name, c.objective, c.kind, c.lower, c.upper);
            self.col_gone.push(false);
        }
        let row0 = self.inst.num_rows();
        let mut part = PartitionUnit { cols: (col0..col0 + unit.width()).collect(), ..Default::default() };
        for (l, r) in unit.rows.iter().enumerate() {
            let name = self.fresh_name(&r.name);
            self.inst.add_row(name, r.sense, r.rhs, &[]);
            self.row_gone.push(false);
            if r.doubly {
                part.doubly_rows.push(row0 + l);
            } else {
                part.rows.push(row0 + l);
            }
        }
        for t in &unit.entries {
            self.inst.ccm.push(row0 + t.row, col0 + t.col, t.value);
        }
        for t in &unit.mcons_strip {
            if let Some(target) = plan.targets[t.row] {
                self.inst.ccm.push(self.master_rows[target], col0 + t.col, t.value);
            }
        }
        for t in &unit.border_strip {
            if let Some(&j) = self.border_cols.get(t.col) {
                self.inst.ccm.push(row0 + t.row, j, t.value);
            }
        }
        self.units.push(Some(part));
        self.inserted += 1;
        Ok(unit.width())
    }

    /// Multiplies every master rhs by `factor`; integral values are rounded
    /// toward the feasible side of their row.
    pub fn scale_master_rhs(&mut self, factor: f64) {
        for &i in &self.master_rows {
            let b = self.inst.rhs[i].to_f64_lossy();
            if !b.is_finite() {
                continue;
            }
            let mut v = b * factor;
            if b.fract() == 0.0 {
                v = match self.inst.senses[i] {
                    Sense::Le => (v - 1e-9).ceil(),
                    Sense::Ge => (v + 1e-9).floor(),
                    Sense::Eq => v.round(),
                };
            }
            self.inst.rhs[i] = T::from_f64_lossy(v);
        }
    }

    pub fn original_unit_count(&self) -> usize {
        self.original_units
    }

    /// Compacts removed rows/columns away and returns the instance with its
    /// updated partition. Kept rows and columns retain their relative order.
    pub fn finish(self) -> (MilpInstance<T>, BlockPartition) {
        fn remap(gone: &[bool]) -> Vec<Option<usize>> {
            let mut next = 0;
            gone.iter()
                .map(|&g| {
                    (!g).then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        }
        let rmap = remap(&self.row_gone);
        let cmap = remap(&self.col_gone);
        let src = self.inst;
        let mut out = MilpInstance::new(src.name.clone());
        for j in 0..src.num_cols() {
            if cmap[j].is_some() {
                out.add_col(src.col_names[j].clone(), src.objective[j], src.kinds[j], src.lower[j], src.upper[j]);
            }
        }
        for i in 0..src.num_rows() {
            if rmap[i].is_some() {
                out.add_row(src.row_names[i].clone(), src.senses[i], src.rhs[i], &[]);
            }
        }
        for e in &src.ccm.entries {
            if let (Some(r), Some(c)) = (rmap[e.row], cmap[e.col]) {
                out.ccm.push(r, c, e.value);
            }
        }
        out.ccm.canonicalize();
        let map_all = |v: &[usize], m: &[Option<usize>]| -> Vec<usize> { v.iter().filter_map(|&x| m[x]).collect() };
        let partition = BlockPartition {
            units: self
                .units
                .iter()
                .flatten()
                .map(|u| PartitionUnit {
                    rows: map_all(&u.rows, &rmap),
                    doubly_rows: map_all(&u.doubly_rows, &rmap),
                    cols: map_all(&u.cols, &cmap),
                })
                .collect(),
            master_rows: map_all(&self.master_rows, &rmap),
            border_cols: map_all(&self.border_cols, &cmap),
            params: self.partition.params,
        };
        (out, partition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_plans() {
        assert_eq!(match_mcons(5, 3).targets, vec![Some(0), Some(1), Some(2), None, None]);
        assert_eq!(match_mcons(5, 3).dropped(), 2);
        assert!(match_mcons(4, 4).is_identity());
        assert!(match_mcons(0, 7).targets.is_empty());
        assert!(match_mcons(2, 6).is_identity());
    }
}
