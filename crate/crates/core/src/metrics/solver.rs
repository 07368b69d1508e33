use std::fs::File;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::milp::{write_mps, MilpInstance};
use crate::scalar::Scalar;

const BUILTIN_PROFILES: [&str; 5] = [
    include_str!("../../profiles/generic.toml"),
    include_str!("../../profiles/scip.toml"),
    include_str!("../../profiles/highs.toml"),
    include_str!("../../profiles/cbc.toml"),
    include_str!("../../profiles/gurobi.toml"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Timeout,
    Unknown,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    pub wall_seconds: f64,
    pub solver: String,
    /// Raw output, kept when the status could not be read from it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
struct ProfileFile {
    name: String,
    objective: String,
    status: Vec<StatusRule>,
}

#[derive(Clone, Debug, Deserialize)]
struct StatusRule {
    pattern: String,
    status: SolveStatus,
}

/// Regexes that read status and objective from a solver log.
#[derive(Clone, Debug)]
pub struct OutputProfile {
    pub name: String,
    objective: Regex,
    status: Vec<(Regex, SolveStatus)>,
}

impl OutputProfile {
    pub fn from_toml(text: &str) -> Result<Self, MetricsError> {
        let f: ProfileFile = toml::from_str(text).map_err(|e| MetricsError::Profile(e.to_string()))?;
        let re = |p: &str| Regex::new(p).map_err(|e| MetricsError::Profile(format!("{}: {e}", f.name)));
        Ok(Self {
            objective: re(&f.objective)?,
            status: f.status.iter().map(|r| Ok((re(&r.pattern)?, r.status))).collect::<Result<_, MetricsError>>()?,
            name: f.name,
        })
    }

    pub fn builtin() -> Vec<OutputProfile> {
        BUILTIN_PROFILES.iter().map(|t| Self::from_toml(t).expect("bundled profile parses")).collect()
    }

    /// A bundled profile by name, or a profile file on disk.
    pub fn resolve(name_or_path: &str) -> Result<Self, MetricsError> {
        if let Some(p) = Self::builtin().into_iter().find(|p| p.name == name_or_path) {
            return Ok(p);
        }
        let text = std::fs::read_to_string(name_or_path)
            .map_err(|e| MetricsError::Profile(format!("{name_or_path}: {e}")))?;
        Self::from_toml(&text)
    }

    pub fn parse(&self, log: &str) -> Option<(SolveStatus, Option<f64>)> {
        let status = self.status.iter().find(|(re, _)| re.is_match(log))?.1;
        let objective = self
            .objective
            .captures(log)
            .and_then(|c| c.get(1))
            .and_then(|m| m.as_str().parse().ok());
        Some((status, objective))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Shell command with `{input}` and `{timelimit}` placeholders.
    pub command: String,
    pub time_limit: f64,
    /// Extra seconds before the process is killed.
    pub grace: f64,
    /// Profile name or path; `None` tries every bundled profile.
    pub profile: Option<String>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { command: String::new(), time_limit: 60.0, grace: 0.5, profile: None }
    }
}

fn kill_tree(child: &mut std::process::Child) {
    // the child leads its own process group, so this also reaches its children
    #[cfg(unix)]
    if child.id() > 1 {
        let _ = Command::new("kill")
            .args(["-s", "KILL", "--", &format!("-{}", child.id())])
            .stderr(Stdio::null())
            .status();
    }
    let _ = child.kill();
}

/// Writes the instance as MPS, runs the solver command and reads its log.
pub fn solve_external<T: Scalar>(
    inst: &MilpInstance<T>,
    cfg: &SolverConfig,
) -> Result<SolveResult, MetricsError> {
    if !cfg.command.contains("{input}") {
        return Err(MetricsError::Solver("command template lacks {input}".into()));
    }
    let profiles = match &cfg.profile {
        Some(p) => vec![OutputProfile::resolve(p)?],
        None => OutputProfile::builtin(),
    };
    let dir = tempfile::tempdir()?;
    let input = dir.path().join("instance.mps");
    std::fs::write(&input, write_mps(inst).map_err(|e| MetricsError::Solver(e.to_string()))?)?;
    let log_path = dir.path().join("solver.log");
    let cmd = cfg
        .command
        .replace("{input}", &shell_quote(&input))
        .replace("{timelimit}", &format!("{}", cfg.time_limit));
    let log = File::create(&log_path)?;
    let mut command = Command::new("sh");
    command
        .arg("-c")
        .arg(&cmd)
        .current_dir(dir.path())
        .stdin(Stdio::null())
        .stdout(log.try_clone()?)
        .stderr(log);
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        command.process_group(0);
    }
    let start = Instant::now();
    let mut child = command.spawn()?;
    let deadline = Duration::from_secs_f64((cfg.time_limit + cfg.grace).max(0.0));
    let exit = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if start.elapsed() >= deadline {
            kill_tree(&mut child);
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(5));
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    let text = String::from_utf8_lossy(&std::fs::read(&log_path)?).into_owned();
    let solver = cmd.split_whitespace().next().unwrap_or("").to_string();
    let Some(exit) = exit else {
        return Ok(SolveResult { status: SolveStatus::Timeout, objective: None, wall_seconds, solver, log: None });
    };
    if exit.code() == Some(127) {
        return Err(MetricsError::SolverNotFound(solver));
    }
    match profiles.iter().find_map(|p| p.parse(&text).map(|r| (p, r))) {
        Some((p, (status, objective))) => Ok(SolveResult {
            status,
            objective,
            wall_seconds,
            solver: format!("{solver} ({})", p.name),
            log: None,
        }),
        None => Ok(SolveResult { status: SolveStatus::Unknown, objective: None, wall_seconds, solver, log: Some(text) }),
    }
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}
