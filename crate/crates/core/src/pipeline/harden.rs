use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::BlockPartition;
use crate::library::StructureLibrary;
use crate::metrics::{feasibility_bruteforce, solve_external, SolverConfig};
use crate::milp::MilpInstance;
use crate::ops::{expand, mixup, stream_rng, GenConfig, GenOutput, OpError};
use crate::scalar::Scalar;

/// Scores how hard an instance is; larger is harder.
pub trait Evaluator<T>: Sync {
    fn hardness(&self, inst: &MilpInstance<T>) -> Result<f64, String>;
}

impl<T, F> Evaluator<T> for F
where
    F: Fn(&MilpInstance<T>) -> Result<f64, String> + Sync,
{
    fn hardness(&self, inst: &MilpInstance<T>) -> Result<f64, String> {
        self(inst)
    }
}

/// Node count of the brute-force oracle.
pub struct OracleNodes {
    pub budget: u64,
}

impl<T: Scalar> Evaluator<T> for OracleNodes {
    fn hardness(&self, inst: &MilpInstance<T>) -> Result<f64, String> {
        feasibility_bruteforce(inst, self.budget).map(|v| v.nodes as f64).map_err(|e| e.to_string())
    }
}

/// Wall time of an external solver run.
pub struct SolverTime {
    pub config: SolverConfig,
}

impl<T: Scalar> Evaluator<T> for SolverTime {
    fn hardness(&self, inst: &MilpInstance<T>) -> Result<f64, String> {
        solve_external(inst, &self.config).map(|r| r.wall_seconds).map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct PoolSlot<T> {
    pub instance: MilpInstance<T>,
    pub partition: BlockPartition,
    pub hardness: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HardenLog {
    /// Mean pool hardness, starting with the initial pool.
    pub trajectory: Vec<f64>,
    /// Per iteration, the slots whose incumbent was replaced.
    pub replaced: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
}

/// Fixed-size pool of instances with cached hardness scores.
#[derive(Clone, Debug)]
pub struct HardPool<T> {
    pub slots: Vec<PoolSlot<T>>,
    pub iteration: usize,
    pub log: HardenLog,
}

fn score<T: Scalar>(eval: &dyn Evaluator<T>, inst: &MilpInstance<T>, warnings: &mut Vec<String>) -> f64 {
    match eval.hardness(inst) {
        Ok(h) => h,
        Err(e) => {
            warnings.push(format!("{}: hardness evaluation failed, scored 0: {e}", inst.name));
            0.0
        }
    }
}

impl<T: Scalar> HardPool<T> {
    pub fn new(entries: Vec<(MilpInstance<T>, BlockPartition)>, eval: &dyn Evaluator<T>) -> Self {
        let mut log = HardenLog::default();
        let scored: Vec<(PoolSlot<T>, Vec<String>)> = entries
            .into_par_iter()
            .map(|(instance, partition)| {
                let mut w = Vec::new();
                let hardness = score(eval, &instance, &mut w);
                (PoolSlot { instance, partition, hardness }, w)
            })
            .collect();
        let mut slots = Vec::with_capacity(scored.len());
        for (s, w) in scored {
            log.warnings.extend(w);
            slots.push(s);
        }
        let mut pool = Self { slots, iteration: 0, log };
        let m = pool.mean_hardness();
        pool.log.trajectory.push(m);
        pool
    }

    pub fn mean_hardness(&self) -> f64 {
        if self.slots.is_empty() {
            return 0.0;
        }
        self.slots.iter().map(|s| s.hardness).sum::<f64>() / self.slots.len() as f64
    }

    /// One round: every slot spawns a mix-up and an expansion child and keeps
    /// the hardest of the three; ties keep the incumbent.
    pub fn step(&mut self, lib: &StructureLibrary<T>, eval: &dyn Evaluator<T>, gen: &GenConfig) {
        let it = self.iteration;
        let cap = self.slots.len();
        let results: Vec<(Option<(GenOutput<T>, f64)>, Vec<String>)> = self
            .slots
            .par_iter()
            .enumerate()
            .map(|(k, slot)| {
                let mut warnings = Vec::new();
                let stream = ((it * cap + k) as u64) * 2;
                let children: [Result<GenOutput<T>, OpError>; 2] = [
                    mixup(&slot.instance, &slot.partition, lib, gen, &mut stream_rng(gen.seed, stream)),
                    expand(&slot.instance, &slot.partition, lib, gen, &mut stream_rng(gen.seed, stream + 1)),
                ];
                let mut best: Option<(GenOutput<T>, f64)> = None;
                for child in children {
                    match child {
                        Ok(mut out) => {
                            out.instance.name = format!("pool{k:02}_it{}_{}", it + 1, out.record.operator.name());
                            let h = score(eval, &out.instance, &mut warnings);
                            let incumbent = best.as_ref().map_or(slot.hardness, |b| b.1);
                            if h > incumbent {
                                best = Some((out, h));
                            }
                        }
                        Err(e) => warnings.push(format!("slot {k}: child generation failed: {e}")),
                    }
                }
                (best, warnings)
            })
            .collect();
        let mut replaced = Vec::new();
        for (k, (best, warnings)) in results.into_iter().enumerate() {
            self.log.warnings.extend(warnings);
            if let Some((out, h)) = best {
                self.slots[k] = PoolSlot { instance: out.instance, partition: out.partition, hardness: h };
                replaced.push(k);
            }
        }
        self.iteration += 1;
        self.log.replaced.push(replaced);
        let m = self.mean_hardness();
        self.log.trajectory.push(m);
    }
}

/// Runs `iterations` rounds of `HardPool::step`.
pub fn harden<T: Scalar>(
    pool: &mut HardPool<T>,
    lib: &StructureLibrary<T>,
    eval: &dyn Evaluator<T>,
    iterations: usize,
    gen: &GenConfig,
) {
    for _ in 0..iterations {
        pool.step(lib, eval, gen);
    }
}
