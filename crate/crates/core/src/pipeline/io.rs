use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PipelineConfig, PipelineError};
use crate::milp::{hex, parse_mps, MilpInstance};

/// Expands directories to the `.mps` and `.mps.gz` files they contain; sorted, deduplicated.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, PipelineError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = std::fs::read_dir(p).map_err(|e| PipelineError::io(p, e))?;
            for entry in entries {
                let path = entry.map_err(|e| PipelineError::io(p, e))?.path();
                let name = path.file_name().map(|n| n.to_string_lossy().to_lowercase()).unwrap_or_default();
                if name.ends_with(".mps") || name.ends_with(".mps.gz") {
                    out.push(path);
                }
            }
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(PipelineError::io(p, std::io::Error::from(std::io::ErrorKind::NotFound)));
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(PipelineError::NoInputs);
    }
    Ok(out)
}

/// File name without `.mps` / `.mps.gz`.
pub fn stem(path: &Path) -> String {
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let lower = name.to_lowercase();
    let cut = [".mps.gz", ".gz", ".mps"].iter().find(|s| lower.ends_with(*s)).map_or(0, |s| s.len());
    let base = &name[..name.len() - cut];
    if base.is_empty() { "instance".into() } else { base.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputEntry {
    pub path: String,
    pub sha256: String,
}

pub struct LoadedInput {
    pub entry: InputEntry,
    pub name: String,
    pub instance: MilpInstance<f64>,
}

/// Parses an MPS file; an instance without a NAME takes the file stem.
pub fn read_instance(path: &Path) -> Result<LoadedInput, PipelineError> {
    let bytes = std::fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    let text = if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes.as_slice()).read_to_end(&mut out).map_err(|e| PipelineError::io(path, e))?;
        out
    } else {
        bytes.clone()
    };
    let mut instance: MilpInstance<f64> =
        parse_mps(&text).map_err(|source| PipelineError::Mps { path: path.to_path_buf(), source })?;
    let name = stem(path);
    if instance.name.is_empty() {
        instance.name = name.clone();
    }
    Ok(LoadedInput {
        entry: InputEntry { path: path.display().to_string(), sha256: hex(&Sha256::digest(&bytes)) },
        name,
        instance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub input: String,
    pub error: String,
}

/// Record of one command run, written as `manifest.json` next to its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: PipelineConfig,
    pub inputs: Vec<InputEntry>,
    pub outputs: Vec<String>,
    pub failures: Vec<Failure>,
    pub summary: serde_json::Value,
}

/// Output directory that remembers what was written into it.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(root).map_err(|e| PipelineError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let p = self.root.join(rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| PipelineError::io(parent, e))?;
        }
        std::fs::write(&p, bytes).map_err(|e| PipelineError::io(&p, e))?;
        self.written.push(rel.to_string());
        Ok(())
    }

    pub fn write_json<S: Serialize>(&mut self, rel: &str, value: &S) -> Result<(), PipelineError> {
        let mut s = serde_json::to_string_pretty(value).expect("value serializes");
        s.push('\n');
        self.write(rel, s.as_bytes())
    }

    pub fn finish(
        mut self,
        command: &str,
        cfg: &PipelineConfig,
        inputs: Vec<InputEntry>,
        failures: Vec<Failure>,
        summary: serde_json::Value,
    ) -> Result<Manifest, PipelineError> {
        self.written.sort();
        let manifest = Manifest {
            tool: "blockforge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: cfg.seed,
            config: PipelineConfig { out: PathBuf::new(), ..cfg.clone() },
            inputs,
            outputs: self.written.clone(),
            failures,
            summary,
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(manifest)
    }
}
