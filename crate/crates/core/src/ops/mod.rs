//! Generation operators: reduction, mix-up and expansion of block units.

mod builder;
mod refine;

pub use builder::{match_mcons, InstanceBuilder, MatchPlan};
pub use refine::{compute_refine_stats, nontrivial_rows, refine_unit, RefineStats};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{BlockPartition, DetectError};
use crate::library::{LibraryError, StructureLibrary, UnitFilter};
use crate::milp::MilpInstance;
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum OpError {
    #[error("modification ratio {0} outside (0, 1]")]
    BadEta(f64),
    #[error("partition has no block units")]
    EmptyPartition,
    #[error("cannot reduce an instance with a single block unit")]
    SingleUnit,
    #[error("modification ratio {eta} unreachable: stopped at {achieved:.4}")]
    EtaUnreachable { eta: f64, achieved: f64 },
    #[error("no unit {0} in the instance")]
    NoSuchUnit(usize),
    #[error("matching plan covers {plan} coupling rows, unit needs {needed}")]
    PlanTooShort { plan: usize, needed: usize },
    #[error("matching plan targets master ordinal {0} which the host lacks")]
    PlanTarget(usize),
    #[error("unit uses {unit} border columns, host has {host}")]
    BorderArity { unit: usize, host: usize },
    #[error(transparent)]
    Partition(#[from] DetectError),
    #[error(transparent)]
    Library(#[from] LibraryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Reduce,
    Mixup,
    Expand,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::Reduce => "reduce",
            Operator::Mixup => "mixup",
            Operator::Expand => "expand",
        }
    }
}

/// Operator selection for batch generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpMode {
    Reduce,
    Mixup,
    Expand,
    /// Reduce, mix-up and expand in rotation; leftovers use mix-up.
    BalancedThirds,
}

impl std::str::FromStr for OpMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reduce" => Ok(OpMode::Reduce),
            "mixup" => Ok(OpMode::Mixup),
            "expand" => Ok(OpMode::Expand),
            "balanced-thirds" | "balanced" => Ok(OpMode::BalancedThirds),
            _ => Err(format!("unknown operator {s:?} (reduce, mixup, expand, balanced-thirds)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub eta: f64,
    pub op: OpMode,
    /// Redraw non-trivial coefficients of inserted units from host statistics.
    pub refine: bool,
    pub seed: u64,
    /// Let mix-up/expansion draw units that came from the host itself.
    pub allow_same_source: bool,
    /// Scale master rhs by the ratio of new to old unit counts.
    pub scale_master_rhs: bool,
    /// Reject units whose border strip needs more border columns than the host has.
    pub strict_border: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            eta: 0.05,
            op: OpMode::BalancedThirds,
            refine: false,
            seed: 0,
            allow_same_source: true,
            scale_master_rhs: false,
            strict_border: false,
        }
    }
}

impl GenConfig {
    pub fn check(&self) -> Result<(), OpError> {
        if self.eta > 0.0 && self.eta <= 1.0 {
            Ok(())
        } else {
            Err(OpError::BadEta(self.eta))
        }
    }

    fn filter<'a>(&self, host: &'a str) -> UnitFilter<'a> {
        UnitFilter {
            exclude_source: (!self.allow_same_source).then_some(host),
            max_border_arity: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsertedUnit {
    pub source: String,
    pub unit: usize,
    pub width: usize,
    pub refined: bool,
    /// Coupling rows dropped by the matching plan.
    pub dropped_couplings: usize,
    /// Border entries with no host border column to land on.
    #[serde(default)]
    pub dropped_border: usize,
}

/// What an operator did to one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenRecord {
    pub source: String,
    pub operator: Operator,
    pub seed: u64,
    pub stream: u64,
    pub eta: f64,
    /// Block variables of the source instance.
    pub n_block: usize,
    /// Source unit ordinals removed (or replaced, for mix-up), in order.
    pub removed: Vec<usize>,
    pub inserted: Vec<InsertedUnit>,
    pub modified_vars: usize,
    pub achieved: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct GenOutput<T> {
    pub instance: MilpInstance<T>,
    pub partition: BlockPartition,
    pub record: GenRecord,
}

struct Run<'a, T> {
    cfg: &'a GenConfig,
    builder: InstanceBuilder<T>,
    record: GenRecord,
    target: usize,
}

impl<'a, T: Scalar> Run<'a, T> {
    fn start(
        inst: &MilpInstance<T>,
        partition: &BlockPartition,
        cfg: &'a GenConfig,
        op: Operator,
    ) -> Result<Self, OpError> {
        cfg.check()?;
        let builder = InstanceBuilder::new(inst, partition)?.strict_border(cfg.strict_border);
        let n_block = partition.block_var_count();
        if partition.units.is_empty() || n_block == 0 {
            return Err(OpError::EmptyPartition);
        }
        let target = ((cfg.eta * n_block as f64 - 1e-9).ceil() as usize).max(1);
        Ok(Self {
            cfg,
            builder,
            target,
            record: GenRecord {
                source: inst.name.clone(),
                operator: op,
                seed: cfg.seed,
                stream: 0,
                eta: cfg.eta,
                n_block,
                removed: vec![],
                inserted: vec![],
                modified_vars: 0,
                achieved: 0.0,
                rhs_scale: None,
                warnings: vec![],
            },
        })
    }

    fn reached(&self) -> bool {
        self.record.modified_vars >= self.target
    }

    fn unreachable(&self) -> OpError {
        OpError::EtaUnreachable { eta: self.cfg.eta, achieved: self.fraction() }
    }

    fn fraction(&self) -> f64 {
        self.record.modified_vars as f64 / self.record.n_block as f64
    }

    fn insert_from<R: Rng + ?Sized>(
        &mut self,
        lib: &StructureLibrary<T>,
        stats: Option<&RefineStats>,
        rng: &mut R,
    ) -> Result<usize, OpError> {
        let unit = lib.sample_unit(rng, &self.cfg.filter(&self.record.source))?;
        let refined = stats.map(|s| refine_unit(unit, s, rng));
        let unit = refined.as_ref().unwrap_or(unit);
        let plan = match_mcons(unit.m1(), self.builder.master_count());
        let width = self.builder.insert_unit(unit, &plan)?;
        let hosts = self.builder.border_count();
        self.record.inserted.push(InsertedUnit {
            source: unit.provenance.source.clone(),
            unit: unit.provenance.unit,
            width,
            refined: refined.is_some(),
            dropped_couplings: plan.dropped(),
            dropped_border: unit.border_strip.iter().filter(|t| t.col >= hosts).count(),
        });
        Ok(width)
    }

    fn refine_stats(
        &mut self,
        inst: &MilpInstance<T>,
        partition: &BlockPartition,
    ) -> Result<Option<RefineStats>, OpError> {
        if !self.cfg.refine {
            return Ok(None);
        }
        let stats = compute_refine_stats(inst, partition)?;
        if let Some(w) = &stats.warning {
            self.record.warnings.push(w.clone());
        }
        if stats.is_empty() {
            self.record.warnings.push("host has no non-trivial rows; refinement skipped".into());
            return Ok(None);
        }
        Ok(Some(stats))
    }

    fn finish(mut self) -> GenOutput<T> {
        if self.cfg.scale_master_rhs {
            let factor = self.builder.unit_count() as f64 / self.builder.original_unit_count() as f64;
            self.builder.scale_master_rhs(factor);
            self.record.rhs_scale = Some(factor);
        }
        self.record.achieved = self.fraction();
        let (mut instance, partition) = self.builder.finish();
        instance.name = format!("{}_{}", self.record.source, self.record.operator.name());
        GenOutput { instance, partition, record: self.record }
    }
}

/// Removes uniformly drawn units until the removed share of block variables
/// reaches `cfg.eta`. At least one unit always remains.
pub fn reduce<T: Scalar, R: Rng + ?Sized>(
    inst: &MilpInstance<T>,
    partition: &BlockPartition,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<GenOutput<T>, OpError> {
    let mut run = Run::start(inst, partition, cfg, Operator::Reduce)?;
    if partition.units.len() < 2 {
        return Err(OpError::SingleUnit);
    }
    let mut remaining: Vec<usize> = (0..partition.units.len()).collect();
    while !run.reached() {
        if remaining.len() <= 1 {
            return Err(run.unreachable());
        }
        let k = remaining.remove(rng.random_range(0..remaining.len()));
        run.record.modified_vars += run.builder.remove_unit(k)?;
        run.record.removed.push(k);
    }
    Ok(run.finish())
}

/// Replaces uniformly drawn host units with library units. Each swap counts
/// the larger of the two widths toward `cfg.eta`.
pub fn mixup<T: Scalar, R: Rng + ?Sized>(
    inst: &MilpInstance<T>,
    partition: &BlockPartition,
    lib: &StructureLibrary<T>,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<GenOutput<T>, OpError> {
    let mut run = Run::start(inst, partition, cfg, Operator::Mixup)?;
    let stats = run.refine_stats(inst, partition)?;
    let mut victims: Vec<usize> = (0..partition.units.len()).collect();
    while !run.reached() {
        if victims.is_empty() {
            return Err(run.unreachable());
        }
        let k = victims.remove(rng.random_range(0..victims.len()));
        let removed = run.builder.remove_unit(k)?;
        let inserted = run.insert_from(lib, stats.as_ref(), rng)?;
        run.record.removed.push(k);
        run.record.modified_vars += removed.max(inserted);
    }
    Ok(run.finish())
}

/// Appends library units until the inserted share of the host's block
/// variables reaches `cfg.eta`.
pub fn expand<T: Scalar, R: Rng + ?Sized>(
    inst: &MilpInstance<T>,
    partition: &BlockPartition,
    lib: &StructureLibrary<T>,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<GenOutput<T>, OpError> {
    let mut run = Run::start(inst, partition, cfg, Operator::Expand)?;
    let stats = run.refine_stats(inst, partition)?;
    while !run.reached() {
        run.record.modified_vars += run.insert_from(lib, stats.as_ref(), rng)?;
    }
    Ok(run.finish())
}

pub fn apply<T: Scalar, R: Rng + ?Sized>(
    op: Operator,
    inst: &MilpInstance<T>,
    partition: &BlockPartition,
    lib: &StructureLibrary<T>,
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<GenOutput<T>, OpError> {
    match op {
        Operator::Reduce => reduce(inst, partition, cfg, rng),
        Operator::Mixup => mixup(inst, partition, lib, cfg, rng),
        Operator::Expand => expand(inst, partition, lib, cfg, rng),
    }
}

/// Operator used for each of `count` outputs.
pub fn schedule(mode: OpMode, count: usize) -> Vec<Operator> {
    match mode {
        OpMode::Reduce => vec![Operator::Reduce; count],
        OpMode::Mixup => vec![Operator::Mixup; count],
        OpMode::Expand => vec![Operator::Expand; count],
        OpMode::BalancedThirds => {
            let full = count / 3 * 3;
            (0..count)
                .map(|t| match t {
                    t if t >= full => Operator::Mixup,
                    t if t % 3 == 0 => Operator::Reduce,
                    t if t % 3 == 1 => Operator::Mixup,
                    _ => Operator::Expand,
                })
                .collect()
        }
    }
}

/// Deterministic generator for output `stream` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generates `count` instances from one host, in parallel. Output `t` uses
/// its own random stream, so results do not depend on thread count.
pub fn generate_batch<T: Scalar>(
    inst: &MilpInstance<T>,
    partition: &BlockPartition,
    lib: &StructureLibrary<T>,
    cfg: &GenConfig,
    count: usize,
) -> Vec<Result<GenOutput<T>, OpError>> {
    schedule(cfg.op, count)
        .into_par_iter()
        .enumerate()
        .map(|(t, op)| {
            let mut rng = stream_rng(cfg.seed, t as u64);
            let mut out = apply(op, inst, partition, lib, cfg, &mut rng)?;
            out.record.stream = t as u64;
            out.instance.name = format!("{}_{t}", out.instance.name);
            Ok(out)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_schedule_rotates_and_pads_with_mixup() {
        use Operator::*;
        assert_eq!(schedule(OpMode::BalancedThirds, 7), vec![Reduce, Mixup, Expand, Reduce, Mixup, Expand, Mixup]);
        assert_eq!(schedule(OpMode::BalancedThirds, 2), vec![Mixup, Mixup]);
        assert_eq!("balanced-thirds".parse::<OpMode>(), Ok(OpMode::BalancedThirds));
        assert!("grow".parse::<OpMode>().is_err());
    }

    #[test]
    fn eta_range_checked() {
        for eta in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(GenConfig { eta, ..Default::default() }.check().is_err());
        }
        assert!(GenConfig { eta: 1.0, ..Default::default() }.check().is_ok());
    }
}
