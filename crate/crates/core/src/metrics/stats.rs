use serde::{Deserialize, Serialize};

use super::community::{greedy_communities, modularity, square_clustering, Graph};
use super::MetricsError;
use crate::milp::MilpInstance;
use crate::scalar::Scalar;

/// The eleven per-instance statistics compared between corpora.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub coef_dens: f64,
    pub cons_degree_mean: f64,
    pub cons_degree_std: f64,
    pub var_degree_mean: f64,
    pub var_degree_std: f64,
    pub lhs_mean: f64,
    pub lhs_std: f64,
    pub rhs_mean: f64,
    pub rhs_std: f64,
    pub clustering_coef: f64,
    pub modularity: f64,
}

impl GraphStats {
    pub const NAMES: [&'static str; 11] = [
        "coef_dens",
        "cons_degree_mean",
        "cons_degree_std",
        "var_degree_mean",
        "var_degree_std",
        "lhs_mean",
        "lhs_std",
        "rhs_mean",
        "rhs_std",
        "clustering_coef",
        "modularity",
    ];

    pub fn values(&self) -> [f64; 11] {
        [
            self.coef_dens,
            self.cons_degree_mean,
            self.cons_degree_std,
            self.var_degree_mean,
            self.var_degree_std,
            self.lhs_mean,
            self.lhs_std,
            self.rhs_mean,
            self.rhs_std,
            self.clustering_coef,
            self.modularity,
        ]
    }
}

/// Mean and population standard deviation, summed in sorted order so the
/// result does not depend on the order of the input.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (dev.iter().sum::<f64>() / n).sqrt())
}

/// Constraint nodes `0..m`, variable nodes `m..m+n`, one edge per nonzero.
pub fn bipartite_graph<T: Scalar>(inst: &MilpInstance<T>) -> Graph {
    let m = inst.num_rows();
    Graph::new(
        m + inst.num_cols(),
        inst.ccm.entries.iter().filter(|e| e.value != T::zero()).map(|e| (e.row, m + e.col)),
    )
}

pub fn compute_stats<T: Scalar>(inst: &MilpInstance<T>) -> Result<GraphStats, MetricsError> {
    let (m, n) = (inst.num_rows(), inst.num_cols());
    if m == 0 || n == 0 {
        return Err(MetricsError::EmptyInstance);
    }
    let g = bipartite_graph(inst);
    let degrees = |r: std::ops::Range<usize>| -> Vec<f64> { r.map(|v| g.adj[v].len() as f64).collect() };
    let (cons_degree_mean, cons_degree_std) = mean_std(&degrees(0..m));
    let (var_degree_mean, var_degree_std) = mean_std(&degrees(m..m + n));
    let lhs: Vec<f64> = inst
        .ccm
        .entries
        .iter()
        .filter(|e| e.value != T::zero())
        .map(|e| e.value.to_f64_lossy())
        .collect();
    let (lhs_mean, lhs_std) = mean_std(&lhs);
    let rhs: Vec<f64> = inst.rhs.iter().map(|b| b.to_f64_lossy()).filter(|b| b.is_finite()).collect();
    let (rhs_mean, rhs_std) = mean_std(&rhs);
    let (clustering_coef, _) = mean_std(&square_clustering(&g));
    let side: Vec<u8> = (0..m + n).map(|v| u8::from(v >= m)).collect();
    let comm = greedy_communities(&g, &g.canonical_ranks(&side));
    Ok(GraphStats {
        coef_dens: g.edge_count() as f64 / (m as f64 * n as f64),
        cons_degree_mean,
        cons_degree_std,
        var_degree_mean,
        var_degree_std,
        lhs_mean,
        lhs_std,
        rhs_mean,
        rhs_std,
        clustering_coef,
        modularity: modularity(&g, &comm),
    })
}
