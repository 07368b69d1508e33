use std::f64::consts::LN_2;

use blockforge::benchgen::{gen_corpus, gen_planted, Family, PlantedSpec};
use blockforge::metrics::{
    bipartite_graph, check_solution, compute_stats, feasibility_bruteforce, jsd, jsd_mass, modularity,
    similarity_score, solve_external, FeasStatus, GraphStats, MetricsError, SolveStatus, SolverConfig,
};
use blockforge::milp::{MilpInstance, Sense};
use blockforge::ops::stream_rng;
use rand::seq::SliceRandom;
use rand::Rng;

fn permuted(inst: &MilpInstance<f64>, seed: u64) -> MilpInstance<f64> {
    let mut rng = stream_rng(seed, 0);
    let mut rp: Vec<usize> = (0..inst.num_rows()).collect();
    let mut cp: Vec<usize> = (0..inst.num_cols()).collect();
    rp.shuffle(&mut rng);
    cp.shuffle(&mut rng);
    let mut out = MilpInstance::new(inst.name.clone());
    let mut new_col = vec![0; cp.len()];
    for (p, &j) in cp.iter().enumerate() {
        new_col[j] = p;
        out.add_col(inst.col_names[j].clone(), inst.objective[j], inst.kinds[j], inst.lower[j], inst.upper[j]);
    }
    let rows = inst.ccm.row_lists();
    for &i in &rp {
        let coefs: Vec<(usize, f64)> = rows[i].iter().map(|&(j, v)| (new_col[j], v)).collect();
        out.add_row(inst.row_names[i].clone(), inst.senses[i], inst.rhs[i], &coefs);
    }
    out
}

#[test]
fn stats_are_permutation_invariant() {
    for family in Family::ALL {
        for (inst, _) in gen_corpus::<f64>(&PlantedSpec::for_family(family), 4, 3).unwrap() {
            let a = compute_stats(&inst).unwrap();
            for s in 0..3 {
                let b = compute_stats(&permuted(&inst, s)).unwrap();
                for (x, y) in a.values().iter().zip(b.values()) {
                    assert!((x - y).abs() < 1e-12, "{}: {a:?} vs {b:?}", inst.name);
                }
            }
        }
    }
}

#[test]
fn stats_ranges_and_planted_modularity() {
    let spec = PlantedSpec { units: 6, ..PlantedSpec::for_family(Family::BdKnapsack) };
    let (inst, truth) = gen_planted::<f64, _>(&spec, "m", &mut stream_rng(2, 0)).unwrap();
    let s = compute_stats(&inst).unwrap();
    assert!((0.0..=1.0).contains(&s.coef_dens));
    assert!((-0.5..=1.0).contains(&s.modularity));
    let g = bipartite_graph(&inst);
    let m = inst.num_rows();
    let mut planted = vec![0; g.adj.len()];
    for (u, unit) in truth.partition.units.iter().enumerate() {
        for &i in &unit.all_rows() {
            planted[i] = u;
        }
        for &j in &unit.cols {
            planted[m + j] = u;
        }
    }
    let q_planted = modularity(&g, &planted);
    assert!(q_planted >= modularity(&g, &vec![0; g.adj.len()]));
    assert!(s.modularity >= q_planted - 1e-12);
    let mut flat = MilpInstance::<f64>::new("c");
    for j in 0..3 {
        flat.add_binary(format!("x{j}"), 0.0);
    }
    flat.add_row("a", Sense::Le, 2.0, &[(0, 4.0), (1, 4.0)]);
    flat.add_row("b", Sense::Le, 2.0, &[(1, 4.0), (2, 4.0)]);
    let s = compute_stats(&flat).unwrap();
    assert_eq!((s.lhs_mean, s.lhs_std), (4.0, 0.0));
}

#[test]
fn two_bin_jsd_matches_definition() {
    let kl = |p: [f64; 2], q: [f64; 2]| -> f64 {
        p.iter().zip(q).filter(|(a, _)| **a > 0.0).map(|(a, b)| a * (a / b).ln()).sum()
    };
    let expect = 0.5 * kl([1.0, 0.0], [0.75, 0.25]) + 0.5 * kl([0.5, 0.5], [0.75, 0.25]);
    assert!((jsd_mass(&[1.0, 0.0], &[0.5, 0.5]) - expect).abs() < 1e-12);
    // the same masses through the histogram path: pooled range [0, 1], two bins
    let got = jsd(&[0.0, 0.0], &[0.0, 1.0], 2).unwrap();
    assert!((got - expect).abs() < 1e-12);
    assert!((jsd(&[1.0, 2.0], &[10.0, 11.0], 100).unwrap() - LN_2).abs() < 1e-12);
}

#[test]
fn similarity_properties() {
    let spec = PlantedSpec::for_family(Family::BbdAuction);
    let a: Vec<GraphStats> = gen_corpus::<f64>(&spec, 20, 1).unwrap().iter().map(|(i, _)| compute_stats(i).unwrap()).collect();
    let b: Vec<GraphStats> = gen_corpus::<f64>(&spec, 20, 2).unwrap().iter().map(|(i, _)| compute_stats(i).unwrap()).collect();
    assert!((similarity_score(&a, &a, 100).unwrap().score - 1.0).abs() < 1e-12);
    let ab = similarity_score(&a, &b, 100).unwrap();
    let ba = similarity_score(&b, &a, 100).unwrap();
    assert_eq!(ab.score, ba.score);
    assert!((0.0..=1.0).contains(&ab.score));
    let shifted: Vec<GraphStats> = a
        .iter()
        .map(|s| {
            let mut t = *s;
            t.coef_dens += 10.0;
            t.cons_degree_mean += 1e3;
            t
        })
        .collect();
    let r = similarity_score(&a, &shifted, 100).unwrap();
    assert_eq!(r.stats[0].standardized, 0.0);
    assert!(matches!(similarity_score(&a, &[], 100), Err(MetricsError::EmptyCorpus)));
}

fn exhaustive(inst: &MilpInstance<f64>) -> bool {
    let n = inst.num_cols();
    (0u32..1 << n).any(|mask| {
        let x: Vec<f64> = (0..n).map(|j| f64::from((mask >> j) & 1)).collect();
        check_solution(inst, &x).is_ok()
    })
}

#[test]
fn oracle_agrees_with_exhaustive_enumeration() {
    let mut rng = stream_rng(77, 0);
    let mut seen = [0usize; 2];
    for t in 0..120 {
        let mut inst = if t % 2 == 0 {
            let spec = PlantedSpec { units: 3, ..PlantedSpec::default() };
            gen_planted::<f64, _>(&spec, "p", &mut rng).unwrap().0
        } else {
            let mut inst = MilpInstance::new("r");
            for j in 0..15 {
                inst.add_binary(format!("x{j}"), 0.0);
            }
            inst
        };
        // extra random rows, some of them demanding
        for r in 0..3 {
            let mut coefs = Vec::new();
            for j in 0..15 {
                if rng.random_bool(0.4) {
                    coefs.push((j, f64::from(rng.random_range(-3..=5))));
                }
            }
            let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.random_range(0..3)];
            let rhs = f64::from(rng.random_range(-2..=8));
            inst.add_row(format!("extra{r}"), sense, rhs, &coefs);
        }
        let v = feasibility_bruteforce(&inst, u64::MAX).unwrap();
        let truth = exhaustive(&inst);
        match &v.status {
            FeasStatus::Feasible { witness } => {
                assert!(truth);
                check_solution(&inst, witness).unwrap();
            }
            FeasStatus::Infeasible => assert!(!truth),
            FeasStatus::Unknown => unreachable!(),
        }
        seen[usize::from(truth)] += 1;
    }
    assert!(seen[0] > 5 && seen[1] > 5, "{seen:?}");
}

fn tiny() -> MilpInstance<f64> {
    let mut inst = MilpInstance::new("tiny");
    inst.add_binary("x", 1.0);
    inst.add_row("r", Sense::Le, 1.0, &[(0, 1.0)]);
    inst
}

#[test]
fn external_solver_stub_reports_optimal() {
    let cfg = SolverConfig { command: "test -s {input} && echo 'optimal 42'".into(), time_limit: 5.0, ..Default::default() };
    let r = solve_external(&tiny(), &cfg).unwrap();
    assert_eq!((r.status, r.objective), (SolveStatus::Optimal, Some(42.0)));
    assert!(r.wall_seconds < 1.0);
}

#[test]
fn external_solver_is_killed_at_the_limit() {
    let cfg = SolverConfig { command: "sleep 30 # {input} {timelimit}".into(), time_limit: 2.0, grace: 0.2, profile: None };
    let r = solve_external(&tiny(), &cfg).unwrap();
    assert_eq!(r.status, SolveStatus::Timeout);
    assert!(r.wall_seconds >= 2.0 && r.wall_seconds < 3.0, "{}", r.wall_seconds);
}

#[test]
fn external_solver_failures() {
    let missing = SolverConfig { command: "no-such-solver-xyz {input}".into(), ..Default::default() };
    assert!(matches!(solve_external(&tiny(), &missing), Err(MetricsError::SolverNotFound(_))));
    let chatty = SolverConfig { command: "echo 'hello {timelimit}' # {input}".into(), time_limit: 3.0, ..Default::default() };
    let r = solve_external(&tiny(), &chatty).unwrap();
    assert_eq!(r.status, SolveStatus::Unknown);
    assert_eq!(r.log.as_deref(), Some("hello 3\n"));
    let no_input = SolverConfig { command: "echo".into(), ..Default::default() };
    assert!(solve_external(&tiny(), &no_input).is_err());
}
