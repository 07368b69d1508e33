use serde::Serialize;

use super::GraphError;
use crate::milp::{MilpInstance, VarKind};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstraintFeature<T> {
    /// Right-hand side divided by the L2 norm of the row (0 for empty rows).
    pub bias: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VariableFeature<T> {
    pub objective: T,
    pub kind: VarKind,
    pub has_lower: bool,
    pub has_upper: bool,
    /// Without a solver state these two flag fixed variables (finite lower == upper).
    pub at_lower: bool,
    pub at_upper: bool,
}

impl<T: Scalar> VariableFeature<T> {
    /// One-hot encoding over binary / integer / implicit-integer / continuous.
    pub fn kind_one_hot(&self) -> [T; 4] {
        let mut v = [T::zero(); 4];
        v[self.kind.ordinal()] = T::one();
        v
    }

    /// The nine-entry feature row: objective, kind one-hot, bound flags.
    pub fn to_vec(&self) -> Vec<T> {
        let flag = |b: bool| if b { T::one() } else { T::zero() };
        let mut out = vec![self.objective];
        out.extend(self.kind_one_hot());
        out.extend([
            flag(self.has_lower),
            flag(self.has_upper),
            flag(self.at_lower),
            flag(self.at_upper),
        ]);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge<T> {
    pub cons: usize,
    pub var: usize,
    pub coef: T,
}

/// Weighted constraint/variable bipartite graph.
///
/// `cons_origin` / `var_origin` map node positions back to row and column
/// indices of the instance the graph was built from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BipartiteGraph<T> {
    pub cons_nodes: Vec<ConstraintFeature<T>>,
    pub var_nodes: Vec<VariableFeature<T>>,
    pub edges: Vec<Edge<T>>,
    pub cons_origin: Vec<usize>,
    pub var_origin: Vec<usize>,
}

impl<T: Scalar> BipartiteGraph<T> {
    pub fn num_cons(&self) -> usize {
        self.cons_nodes.len()
    }

    pub fn num_vars(&self) -> usize {
        self.var_nodes.len()
    }
}

pub fn to_bipartite<T: Scalar>(inst: &MilpInstance<T>) -> BipartiteGraph<T> {
    let rows = inst.ccm.row_lists();
    let cons_nodes = rows
        .iter()
        .zip(&inst.rhs)
        .map(|(row, &b)| {
            let norm = row.iter().map(|&(_, v)| v * v).sum::<T>().sqrt();
            let bias = if norm > T::zero() { b / norm } else { T::zero() };
            ConstraintFeature { bias }
        })
        .collect();
    let var_nodes = (0..inst.num_cols())
        .map(|j| {
            let (l, u) = (inst.lower[j], inst.upper[j]);
            let fixed = l.is_finite() && l == u;
            VariableFeature {
                objective: inst.objective[j],
                kind: inst.kinds[j],
                has_lower: l.is_finite(),
                has_upper: u.is_finite(),
                at_lower: fixed,
                at_upper: fixed,
            }
        })
        .collect();
    let edges = rows
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |&(j, v)| Edge { cons: i, var: j, coef: v }))
        .collect();
    BipartiteGraph {
        cons_nodes,
        var_nodes,
        edges,
        cons_origin: (0..inst.num_rows()).collect(),
        var_origin: (0..inst.num_cols()).collect(),
    }
}

fn local_index(
    set: &[usize],
    len: usize,
    what: &'static str,
) -> Result<Vec<Option<usize>>, GraphError> {
    let mut map = vec![None; len];
    for (k, &i) in set.iter().enumerate() {
        if i >= len {
            return Err(GraphError::IndexOutOfRange { what, index: i, len });
        }
        if map[i].replace(k).is_some() {
            return Err(GraphError::DuplicateIndex { what, index: i });
        }
    }
    Ok(map)
}

/// Induced subgraph on the given node sets; nodes are renumbered in the order
/// the sets list them.
pub fn extract_subgraph<T: Scalar>(
    g: &BipartiteGraph<T>,
    cons_set: &[usize],
    var_set: &[usize],
) -> Result<BipartiteGraph<T>, GraphError> {
    let cmap = local_index(cons_set, g.num_cons(), "constraint")?;
    let vmap = local_index(var_set, g.num_vars(), "variable")?;
    let edges = g
        .edges
        .iter()
        .filter_map(|e| match (cmap[e.cons], vmap[e.var]) {
            (Some(c), Some(v)) => Some(Edge { cons: c, var: v, coef: e.coef }),
            _ => None,
        })
        .collect();
    Ok(BipartiteGraph {
        cons_nodes: cons_set.iter().map(|&i| g.cons_nodes[i]).collect(),
        var_nodes: var_set.iter().map(|&j| g.var_nodes[j]).collect(),
        edges,
        cons_origin: cons_set.iter().map(|&i| g.cons_origin[i]).collect(),
        var_origin: var_set.iter().map(|&j| g.var_origin[j]).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::Sense;

    #[test]
    fn single_coefficient() {
        let mut inst = MilpInstance::<f64>::new("one");
        let x = inst.add_col("x", 3.0, VarKind::Integer, 0.0, f64::INFINITY);
        inst.add_row("r", Sense::Le, 4.0, &[(x, 2.0)]);
        let g = to_bipartite(&inst);
        assert_eq!(g.edges, vec![Edge { cons: 0, var: 0, coef: 2.0 }]);
        assert_eq!(g.cons_nodes[0].bias, 2.0);
        let f = g.var_nodes[0];
        assert_eq!(f.to_vec(), vec![3.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_coefficients_are_not_edges() {
        let mut inst = MilpInstance::<f64>::new("z");
        let x = inst.add_binary("x", 0.0);
        let y = inst.add_col("y", 0.0, VarKind::Continuous, 2.0, 2.0);
        inst.add_row("r", Sense::Le, 1.0, &[(x, 0.0), (y, 1.0)]);
        inst.add_row("empty", Sense::Le, 5.0, &[]);
        let g = to_bipartite(&inst);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.cons_nodes[1].bias, 0.0);
        assert!(g.var_nodes[1].at_lower && g.var_nodes[1].at_upper);
        assert!(!g.var_nodes[0].at_lower);
    }

    fn grid() -> BipartiteGraph<f64> {
        let mut inst = MilpInstance::<f64>::new("g");
        for j in 0..4 {
            inst.add_binary(format!("x{j}"), j as f64);
        }
        inst.add_row("a", Sense::Le, 1.0, &[(0, 1.0), (1, 1.0)]);
        inst.add_row("b", Sense::Le, 1.0, &[(2, 1.0), (3, 1.0)]);
        inst.add_row("c", Sense::Le, 1.0, &[(1, 1.0), (2, 1.0)]);
        to_bipartite(&inst)
    }

    #[test]
    fn subgraph_identity_and_empty() {
        let g = grid();
        let all = extract_subgraph(&g, &[0, 1, 2], &[0, 1, 2, 3]).unwrap();
        assert_eq!(all, g);
        let none = extract_subgraph(&g, &[], &[]).unwrap();
        assert_eq!((none.num_cons(), none.num_vars(), none.edges.len()), (0, 0, 0));
    }

    #[test]
    fn subgraph_reindexes_and_keeps_origins() {
        let g = grid();
        let s = extract_subgraph(&g, &[1], &[3, 2]).unwrap();
        assert_eq!(s.cons_origin, vec![1]);
        assert_eq!(s.var_origin, vec![3, 2]);
        let mut e: Vec<_> = s.edges.iter().map(|e| (e.cons, e.var)).collect();
        e.sort();
        assert_eq!(e, vec![(0, 0), (0, 1)]);
        assert_eq!(s.var_nodes[0].objective, 3.0);
        let nested = extract_subgraph(&s, &[0], &[1]).unwrap();
        assert_eq!(nested.var_origin, vec![2]);
    }

    #[test]
    fn subgraph_rejects_bad_indices() {
        let g = grid();
        assert_eq!(
            extract_subgraph(&g, &[3], &[]),
            Err(GraphError::IndexOutOfRange { what: "constraint", index: 3, len: 3 })
        );
        assert!(matches!(
            extract_subgraph(&g, &[], &[1, 1]),
            Err(GraphError::DuplicateIndex { .. })
        ));
    }
}
