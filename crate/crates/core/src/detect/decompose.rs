use serde::{Deserialize, Serialize};

use super::classify::classify_pattern;
use super::partition::partition_columns;
use super::reorder::reorder_pattern;
use super::{BlockPartition, Classification, DetectError, FailReason, Pattern, PartitionUnit, Reordering, Thresholds};
use crate::graph::{CcmImage, WHITE_PIXEL};
use crate::milp::MilpInstance;
use crate::scalar::Scalar;

/// When the line-endpoint column partition is applied on top of the
/// component grouping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineRefine {
    /// Components are final.
    Never,
    /// Only when the block region collapses into a single component.
    MergedOnly,
    /// Every component is split at line endpoints.
    Always,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    pub thresholds: Thresholds,
    pub zeta: usize,
    pub detect_db: bool,
    pub line_refine: LineRefine,
    /// Decomposition fails when more than this fraction of rows are master rows.
    pub max_master_fraction: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            zeta: 3,
            detect_db: false,
            line_refine: LineRefine::MergedOnly,
            max_master_fraction: 0.5,
        }
    }
}

/// Everything `decompose` computed on the way to the partition.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub partition: BlockPartition,
    pub classification: Classification,
    pub reordering: Reordering,
}

pub fn decompose<T: Scalar>(
    inst: &MilpInstance<T>,
    params: &DetectorParams,
) -> Result<BlockPartition, DetectError> {
    decompose_detailed(inst, params).map(|d| d.partition)
}

/// classify → reorder → column partition → row assignment with repair.
pub fn decompose_detailed<T: Scalar>(
    inst: &MilpInstance<T>,
    params: &DetectorParams,
) -> Result<Decomposition, DetectError> {
    if params.zeta < 1 {
        return Err(DetectError::BadZeta);
    }
    let pat = Pattern::new(&inst.ccm);
    let cls = classify_pattern(&pat, &params.thresholds, params.detect_db)?;
    let reo = reorder_pattern(&pat, &cls);

    let refine = match params.line_refine {
        LineRefine::Never => false,
        LineRefine::MergedOnly => reo.groups.len() == 1,
        LineRefine::Always => true,
    };
    let mut col_pos = vec![0; pat.ncols];
    for (p, &j) in reo.col_perm.iter().enumerate() {
        col_pos[j] = p;
    }

    // column ranges (in reordered positions) of the units
    let mut ranges = Vec::new();
    for g in &reo.groups {
        if refine && g.cols.len() > 1 {
            let mut img = CcmImage::blank(g.rows.len(), g.cols.len());
            for (li, &i) in reo.row_perm[g.rows.clone()].iter().enumerate() {
                for &j in &pat.rows[i] {
                    let p = col_pos[j];
                    if g.cols.contains(&p) {
                        img.set(li, p - g.cols.start, WHITE_PIXEL);
                    }
                }
            }
            for r in partition_columns(&img, params.zeta)? {
                ranges.push(g.cols.start + r.start..g.cols.start + r.end);
            }
        } else {
            ranges.push(g.cols.clone());
        }
    }

    let mut owner = vec![usize::MAX; pat.ncols];
    let mut units: Vec<PartitionUnit> = ranges
        .iter()
        .enumerate()
        .map(|(u, r)| {
            let mut cols: Vec<usize> = reo.col_perm[r.clone()].to_vec();
            cols.sort_unstable();
            for &j in &cols {
                owner[j] = u;
            }
            PartitionUnit { rows: vec![], doubly_rows: vec![], cols }
        })
        .collect();

    let mut is_db = vec![false; pat.nrows];
    for &i in &cls.db_cons {
        is_db[i] = true;
    }
    let mut master_rows = cls.m_cons.clone();
    for &i in cls.b_cons.iter().chain(&cls.db_cons) {
        let mut target = None;
        let mut spans = false;
        for &j in &pat.rows[i] {
            let u = owner[j];
            if u == usize::MAX {
                continue;
            }
            match target {
                None => target = Some(u),
                Some(t) if t != u => spans = true,
                _ => {}
            }
        }
        match (target, spans) {
            (Some(u), false) => {
                if is_db[i] {
                    units[u].doubly_rows.push(i);
                } else {
                    units[u].rows.push(i);
                }
            }
            _ => master_rows.push(i),
        }
    }
    for u in &mut units {
        u.rows.sort_unstable();
        u.doubly_rows.sort_unstable();
    }
    master_rows.sort_unstable();

    let total = pat.nrows;
    let fail = |reason| DetectError::DecompositionFailed {
        reason,
        master_rows: master_rows.len(),
        total_rows: total,
        units: units.len(),
    };
    if master_rows.len() as f64 > params.max_master_fraction * total as f64 {
        return Err(fail(FailReason::TooManyMasterRows));
    }
    if units.len() < 2 {
        return Err(fail(FailReason::NoBlocks));
    }

    let partition = BlockPartition {
        units,
        master_rows,
        border_cols: cls.bd_vars.clone(),
        params: Some(*params),
    };
    partition.check(inst)?;
    Ok(Decomposition { partition, classification: cls, reordering: reo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::Sense;

    fn bbd(k: usize, w: usize, masters: usize) -> MilpInstance<f64> {
        let mut inst = MilpInstance::new("bbd");
        for j in 0..k * w {
            inst.add_binary(format!("x{j}"), -1.0);
        }
        for b in 0..k {
            for t in 0..w - 1 {
                let c = b * w + t;
                inst.add_row(format!("p{b}_{t}"), Sense::Le, 1.0, &[(c, 1.0), (c + 1, 1.0)]);
            }
        }
        for r in 0..masters {
            let coefs: Vec<_> = (0..k * w).map(|j| (j, 1.0 + (j % 3) as f64)).collect();
            inst.add_row(format!("m{r}"), Sense::Le, 10.0, &coefs);
        }
        inst
    }

    #[test]
    fn bordered_structure_recovered() {
        let inst = bbd(4, 5, 2);
        let p = decompose(&inst, &DetectorParams::default()).unwrap();
        assert_eq!(p.units.len(), 4);
        assert_eq!(p.master_rows, vec![16, 17]);
        assert!(p.border_cols.is_empty());
        for (b, u) in p.units.iter().enumerate() {
            assert_eq!(u.cols, (b * 5..b * 5 + 5).collect::<Vec<_>>());
            assert_eq!(u.rows, (b * 4..b * 4 + 4).collect::<Vec<_>>());
        }
    }

    #[test]
    fn spanning_block_row_is_promoted() {
        let mut inst = bbd(3, 4, 1);
        // a sparse row linking unit 0 and unit 1 keeps B-Con features
        inst.add_row("link", Sense::Le, 1.0, &[(3, 1.0), (4, 1.0)]);
        let params = DetectorParams { line_refine: LineRefine::Never, ..Default::default() };
        let p = decompose(&inst, &params).unwrap();
        // the link merges units 0 and 1 into one component
        assert_eq!(p.units.len(), 2);
        p.check(&inst).unwrap();
    }

    #[test]
    fn dense_matrix_fails() {
        let mut inst = MilpInstance::<f64>::new("dense");
        for j in 0..12 {
            inst.add_binary(format!("x{j}"), 1.0);
        }
        let mut state = 12345u64;
        for i in 0..12 {
            let mut coefs = vec![];
            for j in 0..12 {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if (state >> 33) % 10 < 8 {
                    coefs.push((j, 1.0));
                }
            }
            inst.add_row(format!("r{i}"), Sense::Le, 3.0, &coefs);
        }
        assert!(matches!(
            decompose(&inst, &DetectorParams::default()),
            Err(DetectError::DecompositionFailed { .. })
        ));
    }
}
