use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::milp::{MilpInstance, Sense};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum FeasStatus {
    Feasible { witness: Vec<f64> },
    Infeasible,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasVerdict {
    #[serde(flatten)]
    pub status: FeasStatus,
    pub nodes: u64,
}

impl FeasVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, FeasStatus::Feasible { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Length { expected: usize, found: usize },
    Bound { col: usize },
    Integrality { col: usize },
    Row { row: usize, activity: f64, rhs: f64 },
}

pub fn row_tolerance(rhs: f64) -> f64 {
    1e-9 * rhs.abs().max(1.0)
}

/// Checks bounds, integrality and every row of `x`.
pub fn check_solution<T: Scalar>(inst: &MilpInstance<T>, x: &[f64]) -> Result<(), Violation> {
    if x.len() != inst.num_cols() {
        return Err(Violation::Length { expected: inst.num_cols(), found: x.len() });
    }
    for (j, &v) in x.iter().enumerate() {
        let (l, u) = (inst.lower[j].to_f64_lossy(), inst.upper[j].to_f64_lossy());
        if !v.is_finite() || v < l - 1e-9 || v > u + 1e-9 {
            return Err(Violation::Bound { col: j });
        }
        if inst.kinds[j].is_integral() && (v - v.round()).abs() > 1e-9 {
            return Err(Violation::Integrality { col: j });
        }
    }
    let mut act = vec![0.0; inst.num_rows()];
    for e in &inst.ccm.entries {
        act[e.row] += e.value.to_f64_lossy() * x[e.col];
    }
    for (i, &a) in act.iter().enumerate() {
        let b = inst.rhs[i].to_f64_lossy();
        let tol = row_tolerance(b);
        let ok = match inst.senses[i] {
            Sense::Le => a <= b + tol,
            Sense::Ge => a >= b - tol,
            Sense::Eq => (a - b).abs() <= tol,
        };
        if !ok {
            return Err(Violation::Row { row: i, activity: a, rhs: b });
        }
    }
    Ok(())
}

struct Search<'a> {
    cols: Vec<Vec<(usize, f64)>>,
    senses: &'a [Sense],
    rhs: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    min_act: Vec<f64>,
    max_act: Vec<f64>,
    x: Vec<f64>,
    nodes: u64,
    budget: u64,
}

enum Outcome {
    Found,
    Exhausted,
    OutOfBudget,
}

impl Search<'_> {
    fn row_possible(&self, i: usize) -> bool {
        let tol = row_tolerance(self.rhs[i]);
        match self.senses[i] {
            Sense::Le => self.min_act[i] <= self.rhs[i] + tol,
            Sense::Ge => self.max_act[i] >= self.rhs[i] - tol,
            Sense::Eq => self.min_act[i] <= self.rhs[i] + tol && self.max_act[i] >= self.rhs[i] - tol,
        }
    }

    /// Fixes column `j` to `v` (delta sign +1) or releases it (sign -1).
    fn shift(&mut self, j: usize, v: f64, sign: f64) {
        for &(i, a) in &self.cols[j] {
            let (lo, hi) = if a >= 0.0 { (a * self.lo[j], a * self.hi[j]) } else { (a * self.hi[j], a * self.lo[j]) };
            self.min_act[i] += sign * (a * v - lo);
            self.max_act[i] += sign * (a * v - hi);
        }
    }

    fn dfs(&mut self, j: usize) -> Outcome {
        if j == self.x.len() {
            return Outcome::Found;
        }
        let (lo, hi) = (self.lo[j], self.hi[j]);
        let mut v = lo;
        while v <= hi {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Outcome::OutOfBudget;
            }
            self.shift(j, v, 1.0);
            let ok = self.cols[j].iter().all(|&(i, _)| self.row_possible(i));
            if ok {
                self.x[j] = v;
                match self.dfs(j + 1) {
                    Outcome::Exhausted => {}
                    done => {
                        self.shift(j, v, -1.0);
                        return done;
                    }
                }
            }
            self.shift(j, v, -1.0);
            v += 1.0;
        }
        Outcome::Exhausted
    }
}

/// Depth-first enumeration of integer assignments with activity-interval
/// pruning. Every integer variable needs finite bounds; continuous
/// variables must be fixed.
pub fn feasibility_bruteforce<T: Scalar>(
    inst: &MilpInstance<T>,
    budget: u64,
) -> Result<FeasVerdict, MetricsError> {
    let n = inst.num_cols();
    let (mut lo, mut hi) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for j in 0..n {
        let (l, u) = (inst.lower[j].to_f64_lossy(), inst.upper[j].to_f64_lossy());
        if inst.kinds[j].is_integral() {
            if !l.is_finite() || !u.is_finite() {
                return Err(MetricsError::OutOfScope(format!("integer column {} is unbounded", inst.col_names[j])));
            }
            lo.push(l.ceil());
            hi.push(u.floor());
        } else {
            if !(l.is_finite() && l == u) {
                return Err(MetricsError::OutOfScope(format!("continuous column {} is not fixed", inst.col_names[j])));
            }
            lo.push(l);
            hi.push(u);
        }
    }
    let mut cols = vec![Vec::new(); n];
    let mut min_act = vec![0.0; inst.num_rows()];
    let mut max_act = vec![0.0; inst.num_rows()];
    for e in &inst.ccm.entries {
        let a = e.value.to_f64_lossy();
        if a == 0.0 {
            continue;
        }
        cols[e.col].push((e.row, a));
        let j = e.col;
        let (p, q) = (a * lo[j], a * hi[j]);
        min_act[e.row] += p.min(q);
        max_act[e.row] += p.max(q);
    }
    let mut s = Search {
        cols,
        senses: &inst.senses,
        rhs: inst.rhs.iter().map(|b| b.to_f64_lossy()).collect(),
        lo,
        hi,
        min_act,
        max_act,
        x: vec![0.0; n],
        nodes: 0,
        budget,
    };
    // rows without any variable are decided up front
    if (0..inst.num_rows()).any(|i| !s.row_possible(i)) {
        return Ok(FeasVerdict { status: FeasStatus::Infeasible, nodes: 0 });
    }
    let status = match s.dfs(0) {
        Outcome::Found => {
            let x = s.x.clone();
            debug_assert!(check_solution(inst, &x).is_ok());
            FeasStatus::Feasible { witness: x }
        }
        Outcome::Exhausted => FeasStatus::Infeasible,
        Outcome::OutOfBudget => FeasStatus::Unknown,
    };
    Ok(FeasVerdict { status, nodes: s.nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::VarKind;

    fn two_binaries(sense: Sense, rhs: f64) -> MilpInstance<f64> {
        let mut inst = MilpInstance::new("t");
        inst.add_binary("a", 0.0);
        inst.add_binary("b", 0.0);
        inst.add_row("r", sense, rhs, &[(0, 1.0), (1, 1.0)]);
        inst
    }

    #[test]
    fn small_cases() {
        let v = feasibility_bruteforce(&two_binaries(Sense::Le, 1.0), 100).unwrap();
        assert_eq!(v.status, FeasStatus::Feasible { witness: vec![0.0, 0.0] });
        let v = feasibility_bruteforce(&two_binaries(Sense::Ge, 2.0), 100).unwrap();
        assert_eq!(v.status, FeasStatus::Feasible { witness: vec![1.0, 1.0] });
        let v = feasibility_bruteforce(&two_binaries(Sense::Eq, 3.0), 100).unwrap();
        assert_eq!(v.status, FeasStatus::Infeasible);
        let mut neg = MilpInstance::<f64>::new("n");
        neg.add_binary("x", 0.0);
        neg.add_row("r", Sense::Le, -1.0, &[(0, 1.0)]);
        assert_eq!(feasibility_bruteforce(&neg, 100).unwrap().status, FeasStatus::Infeasible);
    }

    #[test]
    fn budget_and_scope() {
        let mut inst = MilpInstance::<f64>::new("b");
        for j in 0..12 {
            inst.add_binary(format!("x{j}"), 0.0);
        }
        // parity-style infeasibility the interval test cannot see early
        let coefs: Vec<_> = (0..12).map(|j| (j, 2.0)).collect();
        inst.add_row("odd", Sense::Eq, 7.0, &coefs);
        let v = feasibility_bruteforce(&inst, 50).unwrap();
        assert_eq!((v.status, v.nodes), (FeasStatus::Unknown, 51));
        inst.add_col("c", 0.0, VarKind::Continuous, 0.0, 1.0);
        assert!(matches!(feasibility_bruteforce(&inst, 50), Err(MetricsError::OutOfScope(_))));
        inst.kinds[12] = VarKind::Integer;
        inst.upper[12] = f64::INFINITY;
        assert!(matches!(feasibility_bruteforce(&inst, 50), Err(MetricsError::OutOfScope(_))));
    }

    #[test]
    fn violations_reported() {
        let inst = two_binaries(Sense::Le, 1.0);
        assert!(matches!(check_solution(&inst, &[1.0, 1.0]), Err(Violation::Row { row: 0, .. })));
        assert!(matches!(check_solution(&inst, &[0.5, 0.0]), Err(Violation::Integrality { col: 0 })));
        assert!(matches!(check_solution(&inst, &[2.0, 0.0]), Err(Violation::Bound { col: 0 })));
        assert!(check_solution(&inst, &[0.0, 1.0]).is_ok());
    }
}
