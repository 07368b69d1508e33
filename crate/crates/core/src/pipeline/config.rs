use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::benchgen::PlantedSpec;
use crate::detect::DetectorParams;
use crate::metrics::{SolverConfig, DEFAULT_BINS};
use crate::ops::{GenConfig, OpMode};

pub const ENV_PREFIX: &str = "BLOCKFORGE_";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub bins: usize,
    pub oracle_budget: u64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, oracle_budget: 1_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hardness {
    /// Search-tree nodes of the brute-force oracle.
    OracleNodes,
    /// Wall time of the configured external solver.
    SolverTime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardenConfig {
    pub pool_size: usize,
    pub iterations: usize,
    pub hardness: Hardness,
}

impl Default for HardenConfig {
    fn default() -> Self {
        Self { pool_size: 30, iterations: 10, hardness: Hardness::OracleNodes }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub count: usize,
    #[serde(flatten)]
    pub spec: PlantedSpec,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { count: 10, spec: PlantedSpec::default() }
    }
}

/// Everything a pipeline run needs. Loaded from TOML, then overridden by
/// `BLOCKFORGE_*` environment variables, then by command-line flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// Worker threads; `None` uses every core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Outputs per input instance for `generate`.
    pub count: usize,
    /// Library file for `generate`; built from the inputs when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub library: Option<PathBuf>,
    pub detector: DetectorParams,
    pub generate: GenConfig,
    pub metrics: MetricsConfig,
    pub solver: SolverConfig,
    pub harden: HardenConfig,
    pub benchgen: BenchConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            inputs: vec![],
            out: PathBuf::from("out"),
            seed: 0,
            jobs: None,
            count: 1,
            library: None,
            detector: DetectorParams::default(),
            generate: GenConfig::default(),
            metrics: MetricsConfig::default(),
            solver: SolverConfig::default(),
            harden: HardenConfig::default(),
            benchgen: BenchConfig::default(),
        }
    }
}

/// Single-value settings that can come from the environment or flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub eta: Option<f64>,
    pub op: Option<OpMode>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub solver_cmd: Option<String>,
    pub time_limit: Option<f64>,
    pub zeta: Option<usize>,
    pub phi: [Option<f64>; 5],
    pub detect_db: Option<bool>,
}

fn parse_env<V: std::str::FromStr>(key: &str, value: &str) -> Result<V, PipelineError>
where
    V::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: V::Err| PipelineError::Config(format!("{ENV_PREFIX}{key}={value:?}: {e}")))
}

impl Overrides {
    /// Reads `BLOCKFORGE_*` pairs; unrelated variables are ignored.
    pub fn from_env<I: IntoIterator<Item = (String, String)>>(vars: I) -> Result<Self, PipelineError> {
        let mut o = Self::default();
        for (k, v) in vars {
            let Some(key) = k.strip_prefix(ENV_PREFIX) else { continue };
            match key {
                "SEED" => o.seed = Some(parse_env(key, &v)?),
                "ETA" => o.eta = Some(parse_env(key, &v)?),
                "OP" => o.op = Some(parse_env(key, &v)?),
                "JOBS" => o.jobs = Some(parse_env(key, &v)?),
                "OUT" => o.out = Some(PathBuf::from(v)),
                "SOLVER_CMD" => o.solver_cmd = Some(v),
                "TIME_LIMIT" => o.time_limit = Some(parse_env(key, &v)?),
                "ZETA" => o.zeta = Some(parse_env(key, &v)?),
                "DETECT_DB" => o.detect_db = Some(parse_env(key, &v)?),
                "PHI1" | "PHI2" | "PHI3" | "PHI4" | "PHI5" => {
                    let k = usize::from(key.as_bytes()[3] - b'1');
                    o.phi[k] = Some(parse_env(key, &v)?);
                }
                _ => {}
            }
        }
        Ok(o)
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.eta {
            self.generate.eta = v;
        }
        if let Some(v) = o.op {
            self.generate.op = v;
        }
        if let Some(v) = o.jobs {
            self.jobs = Some(v);
        }
        if let Some(v) = &o.out {
            self.out = v.clone();
        }
        if let Some(v) = &o.solver_cmd {
            self.solver.command = v.clone();
        }
        if let Some(v) = o.time_limit {
            self.solver.time_limit = v;
        }
        if let Some(v) = o.zeta {
            self.detector.zeta = v;
        }
        let t = &mut self.detector.thresholds;
        for (slot, v) in [&mut t.phi1, &mut t.phi2, &mut t.phi3, &mut t.phi4, &mut t.phi5].into_iter().zip(o.phi) {
            if let Some(v) = v {
                *slot = v;
            }
        }
        if let Some(v) = o.detect_db {
            self.detector.detect_db = v;
        }
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        if self.detector.zeta < 1 {
            return bad("zeta must be at least 1".into());
        }
        self.detector.thresholds.check().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.generate.check().map_err(|e| PipelineError::Config(e.to_string()))?;
        if self.metrics.bins == 0 {
            return bad("metrics.bins must be positive".into());
        }
        if self.harden.pool_size == 0 {
            return bad("harden.pool_size must be positive".into());
        }
        if self.harden.hardness == Hardness::SolverTime && self.solver.command.is_empty() {
            return bad("solver-time hardness needs solver.command".into());
        }
        Ok(())
    }
}
