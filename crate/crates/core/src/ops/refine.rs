use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::OpError;
use crate::detect::BlockPartition;
use crate::library::{extract_block_units, BlockUnit};
use crate::milp::MilpInstance;
use crate::scalar::Scalar;

/// Per-ordinal mean and standard deviation of non-trivial row coefficients,
/// pooled over the units of one instance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RefineStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Set when units disagree on their number of non-trivial rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl RefineStats {
    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Local indices of unit rows holding a block coefficient outside {0, -1, 1}.
pub fn nontrivial_rows<T: Scalar>(unit: &BlockUnit<T>) -> Vec<usize> {
    let mut flag = vec![false; unit.height()];
    for t in &unit.entries {
        let a = t.value.abs();
        if a != T::zero() && a != T::one() {
            flag[t.row] = true;
        }
    }
    (0..flag.len()).filter(|&r| flag[r]).collect()
}

pub fn compute_refine_stats<T: Scalar>(
    inst: &MilpInstance<T>,
    partition: &BlockPartition,
) -> Result<RefineStats, OpError> {
    let units = extract_block_units(inst, partition)?;
    let per_unit: Vec<Vec<usize>> = units.iter().map(nontrivial_rows).collect();
    let counts: Vec<usize> = per_unit.iter().map(Vec::len).collect();
    let common = counts.iter().copied().min().unwrap_or(0);
    let warning = (counts.iter().any(|&c| c != common)).then(|| {
        format!(
            "units have between {common} and {} non-trivial rows; using the first {common}",
            counts.iter().max().unwrap_or(&0)
        )
    });
    let mut pools: Vec<Vec<f64>> = vec![Vec::new(); common];
    for (u, rows) in units.iter().zip(&per_unit) {
        for (k, &r) in rows.iter().take(common).enumerate() {
            pools[k].extend(
                u.entries
                    .iter()
                    .filter(|t| t.row == r && t.value != T::zero())
                    .map(|t| t.value.to_f64_lossy()),
            );
        }
    }
    let mut mean = Vec::with_capacity(common);
    let mut std = Vec::with_capacity(common);
    for p in &pools {
        let n = p.len() as f64;
        let mu = p.iter().sum::<f64>() / n;
        let var = p.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
        mean.push(mu);
        std.push(var.sqrt());
    }
    Ok(RefineStats { mean, std, warning })
}

/// Redraws the coefficients of the unit's k-th non-trivial row from
/// Normal(mean[k], std[k]) for every k covered by `stats`.
pub fn refine_unit<T: Scalar, R: Rng + ?Sized>(
    unit: &BlockUnit<T>,
    stats: &RefineStats,
    rng: &mut R,
) -> BlockUnit<T> {
    let mut out = unit.clone();
    let mut ordinal = vec![None; unit.height()];
    for (k, r) in nontrivial_rows(unit).into_iter().enumerate().take(stats.mean.len()) {
        ordinal[r] = Some(k);
    }
    for t in &mut out.entries {
        if t.value == T::zero() {
            continue;
        }
        if let Some(k) = ordinal[t.row] {
            let z: f64 = rng.sample(StandardNormal);
            t.value = T::from_f64_lossy(stats.mean[k] + stats.std[k] * z);
        }
    }
    out
}
