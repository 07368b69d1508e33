//! Synthetic instance families with planted block structure.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{BlockPartition, DetectorParams, PartitionUnit};
use crate::milp::{MilpInstance, Sense};
use crate::ops::stream_rng;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Independent knapsack blocks, no coupling.
    BdKnapsack,
    /// Set-packing blocks tied together by dense capacity rows.
    BbdAuction,
    /// Packing blocks sharing border columns, plus capacity rows.
    DbbdAssignment,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::BdKnapsack, Family::BbdAuction, Family::DbbdAssignment];

    pub fn name(self) -> &'static str {
        match self {
            Family::BdKnapsack => "bd-knapsack",
            Family::BbdAuction => "bbd-auction",
            Family::DbbdAssignment => "dbbd-assignment",
        }
    }

    /// Detector settings under which the family is recovered exactly.
    pub fn detector(self) -> DetectorParams {
        DetectorParams { detect_db: self == Family::DbbdAssignment, ..Default::default() }
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family {s:?} (bd-knapsack, bbd-auction, dbbd-assignment)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedSpec {
    pub family: Family,
    /// Number of block units.
    pub units: usize,
    /// Inclusive width range; equal bounds give equal widths.
    pub width_min: usize,
    pub width_max: usize,
    /// Knapsack rows per block.
    pub rows_per_block: usize,
    pub master_rows: usize,
    pub border_cols: usize,
    /// Integer coefficients are drawn from 1..=coef_max.
    pub coef_max: u32,
    /// When set, the unit count is drawn per instance from this inclusive range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units_range: Option<(usize, usize)>,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            family: Family::BdKnapsack,
            units: 4,
            width_min: 5,
            width_max: 5,
            rows_per_block: 2,
            master_rows: 0,
            border_cols: 0,
            coef_max: 10,
            units_range: None,
        }
    }
}

impl PlantedSpec {
    /// Family defaults used by the CLI and the test corpora.
    pub fn for_family(family: Family) -> Self {
        match family {
            Family::BdKnapsack => Self::default(),
            Family::BbdAuction => Self {
                family,
                width_min: 3,
                width_max: 7,
                master_rows: 2,
                ..Self::default()
            },
            Family::DbbdAssignment => Self {
                family,
                width_min: 4,
                width_max: 6,
                master_rows: 1,
                border_cols: 1,
                ..Self::default()
            },
        }
    }

    pub fn check(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Inconsistent(m.to_string()));
        let (kmin, kmax) = self.units_range.unwrap_or((self.units, self.units));
        if kmin < 1 || kmin > kmax {
            return bad("unit count must be at least 1");
        }
        if self.width_min < 1 || self.width_min > self.width_max {
            return bad("width range must satisfy 1 <= min <= max");
        }
        if self.coef_max < 1 {
            return bad("coef_max must be at least 1");
        }
        let block_rows_min = kmin * (self.width_min - 1);
        match self.family {
            Family::BdKnapsack => {
                if self.width_min != self.width_max {
                    return bad("bd-knapsack needs equal widths");
                }
                if self.rows_per_block < 1 {
                    return bad("bd-knapsack needs at least one row per block");
                }
                if self.master_rows + self.border_cols > 0 {
                    return bad("bd-knapsack has no master rows or border columns");
                }
            }
            Family::BbdAuction => {
                if self.width_min < 2 {
                    return bad("bbd-auction needs widths of at least 2");
                }
                if self.border_cols > 0 {
                    return bad("bbd-auction has no border columns");
                }
                if self.master_rows > block_rows_min {
                    return bad("bbd-auction needs more block rows than master rows");
                }
            }
            Family::DbbdAssignment => {
                if self.width_min < 2 || self.border_cols < 1 {
                    return bad("dbbd-assignment needs widths of at least 2 and a border column");
                }
                if block_rows_min < self.master_rows + 3 {
                    return bad("dbbd-assignment needs at least master_rows + 3 block rows");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("inconsistent planted spec: {0}")]
    Inconsistent(String),
}

/// Ground truth for one emitted instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub family: Family,
    pub partition: BlockPartition,
    /// A feasible point, when the family guarantees one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

fn draw<R: Rng + ?Sized>(rng: &mut R, max: u32) -> f64 {
    f64::from(rng.random_range(1..=max))
}

/// Builds one instance of the family, then shuffles rows and columns.
pub fn gen_planted<T: Scalar, R: Rng + ?Sized>(
    spec: &PlantedSpec,
    name: &str,
    rng: &mut R,
) -> Result<(MilpInstance<T>, PlantedTruth), BenchError> {
    spec.check()?;
    let k = match spec.units_range {
        Some((lo, hi)) => rng.random_range(lo..=hi),
        None => spec.units,
    };
    let widths: Vec<usize> = (0..k).map(|_| rng.random_range(spec.width_min..=spec.width_max)).collect();
    let n_block: usize = widths.iter().sum();
    let nb = spec.border_cols;

    // natural layout: block columns unit by unit, then border columns
    let mut objective = Vec::with_capacity(n_block + nb);
    let mut col_names = Vec::with_capacity(n_block + nb);
    let mut unit_cols = Vec::with_capacity(k);
    for (u, &w) in widths.iter().enumerate() {
        unit_cols.push((objective.len()..objective.len() + w).collect::<Vec<_>>());
        for l in 0..w {
            objective.push(-draw(rng, spec.coef_max));
            col_names.push(format!("x{u}_{l}"));
        }
    }
    let border: Vec<usize> = (n_block..n_block + nb).collect();
    for t in 0..nb {
        objective.push(-draw(rng, spec.coef_max));
        col_names.push(format!("y{t}"));
    }

    struct Row {
        name: String,
        rhs: f64,
        coefs: Vec<(usize, f64)>,
        unit: Option<usize>,
    }
    let mut rows: Vec<Row> = Vec::new();
    for (u, cols) in unit_cols.iter().enumerate() {
        match spec.family {
            Family::BdKnapsack => {
                for r in 0..spec.rows_per_block {
                    let coefs: Vec<(usize, f64)> = cols.iter().map(|&j| (j, draw(rng, spec.coef_max))).collect();
                    let total: f64 = coefs.iter().map(|c| c.1).sum();
                    rows.push(Row { name: format!("b{u}_{r}"), rhs: (total / 2.0).floor(), coefs, unit: Some(u) });
                }
            }
            Family::BbdAuction | Family::DbbdAssignment => {
                for p in 0..cols.len() - 1 {
                    let mut coefs = vec![(cols[p], 1.0), (cols[p + 1], 1.0)];
                    coefs.extend(border.iter().map(|&j| (j, 1.0)));
                    rows.push(Row { name: format!("b{u}_{p}"), rhs: 1.0, coefs, unit: Some(u) });
                }
            }
        }
    }
    for t in 0..spec.master_rows {
        let coefs: Vec<(usize, f64)> = (0..n_block).map(|j| (j, draw(rng, spec.coef_max))).collect();
        let total: f64 = coefs.iter().map(|c| c.1).sum();
        rows.push(Row { name: format!("m{t}"), rhs: (0.3 * total).floor(), coefs, unit: None });
    }

    let n = n_block + nb;
    let mut col_order: Vec<usize>;
    if spec.family == Family::BdKnapsack {
        col_order = (0..n).collect();
        col_order.shuffle(rng);
    } else {
        // unit-level shuffle keeps packing rows narrow next to the dense master rows
        let mut unit_order: Vec<usize> = (0..k).collect();
        unit_order.shuffle(rng);
        col_order = Vec::with_capacity(n);
        for u in unit_order {
            let mut cols = unit_cols[u].clone();
            cols.shuffle(rng);
            col_order.extend(cols);
        }
        for &b in &border {
            let p = rng.random_range(0..=col_order.len());
            col_order.insert(p, b);
        }
    }
    let mut row_order: Vec<usize> = (0..rows.len()).collect();
    row_order.shuffle(rng);
    if spec.family == Family::DbbdAssignment {
        // border columns must span the full row range
        let first = row_order.iter().position(|&r| rows[r].unit.is_some()).expect("block rows exist");
        row_order.swap(0, first);
        let last = row_order.iter().rposition(|&r| rows[r].unit.is_some()).expect("block rows exist");
        let end = row_order.len() - 1;
        row_order.swap(last, end);
    }
    let mut new_col = vec![0; n];
    for (p, &j) in col_order.iter().enumerate() {
        new_col[j] = p;
    }

    let mut inst = MilpInstance::new(name);
    for &j in &col_order {
        inst.add_binary(col_names[j].clone(), T::from_f64_lossy(objective[j]));
    }
    let mut units = vec![PartitionUnit::default(); k];
    let mut master_rows = Vec::new();
    for (i, &r) in row_order.iter().enumerate() {
        let row = &rows[r];
        let coefs: Vec<(usize, T)> =
            row.coefs.iter().map(|&(j, v)| (new_col[j], T::from_f64_lossy(v))).collect();
        inst.add_row(row.name.clone(), Sense::Le, T::from_f64_lossy(row.rhs), &coefs);
        match row.unit {
            Some(u) if nb > 0 => units[u].doubly_rows.push(i),
            Some(u) => units[u].rows.push(i),
            None => master_rows.push(i),
        }
    }
    inst.ccm.canonicalize();
    for (u, cols) in unit_cols.iter().enumerate() {
        units[u].cols = cols.iter().map(|&j| new_col[j]).collect();
        units[u].cols.sort_unstable();
    }
    let mut border_cols: Vec<usize> = border.iter().map(|&j| new_col[j]).collect();
    border_cols.sort_unstable();
    let partition =
        BlockPartition { units, master_rows, border_cols, params: Some(spec.family.detector()) }.canonical_with_params();
    Ok((inst, PlantedTruth { family: spec.family, partition, witness: Some(vec![0.0; n]) }))
}

/// `count` instances, instance `i` drawn from its own random stream.
pub fn gen_corpus<T: Scalar>(
    spec: &PlantedSpec,
    count: usize,
    seed: u64,
) -> Result<Vec<(MilpInstance<T>, PlantedTruth)>, BenchError> {
    spec.check()?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            gen_planted(spec, &format!("{}-{seed}-{i:04}", spec.family.name()), &mut rng)
        })
        .collect()
}

/// Exact-match precision and recall of detected units against the truth.
/// A unit matches when its rows and columns coincide with a truth unit.
pub fn unit_recovery(truth: &BlockPartition, found: &BlockPartition) -> (f64, f64) {
    let t = truth.canonical();
    let f = found.canonical();
    let key = |u: &PartitionUnit| (u.all_rows(), u.cols.clone());
    let tk: Vec<_> = t.units.iter().map(key).collect();
    let fk: Vec<_> = f.units.iter().map(key).collect();
    let hits = fk.iter().filter(|u| tk.contains(u)).count();
    let ratio = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    (ratio(hits, fk.len()), ratio(hits, tk.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::decompose;
    use crate::milp::validate;

    #[test]
    fn knapsack_shape() {
        let spec = PlantedSpec { units: 3, ..Default::default() };
        let mut rng = stream_rng(1, 0);
        let (inst, truth) = gen_planted::<f64, _>(&spec, "k", &mut rng).unwrap();
        assert_eq!(inst.num_cols(), 15);
        assert_eq!(inst.num_rows(), 6);
        assert_eq!(truth.partition.units.len(), 3);
        assert!(truth.partition.master_rows.is_empty());
        assert!(validate(&inst).is_valid());
        truth.partition.check(&inst).unwrap();
    }

    #[test]
    fn families_are_recovered() {
        for family in Family::ALL {
            let spec = PlantedSpec { units: 4, ..PlantedSpec::for_family(family) };
            for (inst, truth) in gen_corpus::<f64>(&spec, 5, 9).unwrap() {
                truth.partition.check(&inst).unwrap();
                let found = decompose(&inst, &family.detector()).unwrap_or_else(|e| panic!("{family:?} {}: {e}", inst.name));
                assert_eq!(unit_recovery(&truth.partition, &found), (1.0, 1.0), "{}", inst.name);
                assert!(found.same_blocks(&truth.partition));
            }
        }
    }

    #[test]
    fn spec_checks() {
        let s = PlantedSpec { width_max: 7, ..Default::default() };
        assert!(s.check().is_err());
        let s = PlantedSpec { units: 1, ..PlantedSpec::for_family(Family::DbbdAssignment) };
        assert!(s.check().is_err());
        assert_eq!("bbd-auction".parse::<Family>(), Ok(Family::BbdAuction));
    }
}
