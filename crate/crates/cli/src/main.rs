use std::path::PathBuf;
use std::process::ExitCode;

use blockforge::benchgen::{Family, PlantedSpec};
use blockforge::ops::OpMode;
use blockforge::pipeline::{self, Manifest, Overrides, PipelineConfig, PipelineError};
use clap::{Args, Parser, Subcommand};

/// Block-structure aware MILP instance generation.
#[derive(Parser, Debug)]
#[command(name = "blockforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug, Default)]
struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Modification ratio in (0, 1].
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// reduce, mixup, expand or balanced-thirds.
    #[arg(long, global = true)]
    op: Option<OpMode>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Solver command with {input} and {timelimit} placeholders.
    #[arg(long, global = true)]
    solver_cmd: Option<String>,
    /// Solver time limit in seconds.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    /// Detection horizon for the column partition.
    #[arg(long, global = true)]
    zeta: Option<usize>,
    #[arg(long, global = true)]
    phi1: Option<f64>,
    #[arg(long, global = true)]
    phi2: Option<f64>,
    #[arg(long, global = true)]
    phi3: Option<f64>,
    #[arg(long, global = true)]
    phi4: Option<f64>,
    #[arg(long, global = true)]
    phi5: Option<f64>,
    /// Detect border variables and doubly bordered rows.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    detect_db: Option<bool>,
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            eta: self.eta,
            op: self.op,
            jobs: self.jobs,
            out: self.out.clone(),
            solver_cmd: self.solver_cmd.clone(),
            time_limit: self.time_limit,
            zeta: self.zeta,
            phi: [self.phi1, self.phi2, self.phi3, self.phi4, self.phi5],
            detect_db: self.detect_db,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect block structure and write one partition file per instance.
    Decompose { inputs: Vec<PathBuf> },
    /// Extract block units from decomposable instances into library.json.
    Buildlib { inputs: Vec<PathBuf> },
    /// Generate new instances with the configured operator.
    Generate {
        inputs: Vec<PathBuf>,
        /// Library file; built from the inputs when omitted.
        #[arg(long)]
        library: Option<PathBuf>,
        /// Outputs per input instance.
        #[arg(long)]
        count: Option<usize>,
        /// Resample non-trivial coefficients of inserted units.
        #[arg(long)]
        refine: bool,
    },
    /// Graph statistics and similarity of two corpora.
    Stats {
        inputs: Vec<PathBuf>,
        /// Corpus to compare against.
        #[arg(long, required = true, num_args = 1..)]
        against: Vec<PathBuf>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Write CCM images before and after reordering.
    Visualize { inputs: Vec<PathBuf> },
    /// Certify feasibility with the brute-force oracle.
    Feascheck {
        inputs: Vec<PathBuf>,
        /// Oracle node budget.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Write a synthetic corpus with planted block structure.
    Genbench {
        /// bd-knapsack, bbd-auction or dbbd-assignment.
        #[arg(long)]
        family: Option<Family>,
        #[arg(long)]
        count: Option<usize>,
        /// Units per instance.
        #[arg(long)]
        units: Option<usize>,
    },
    /// Iteratively replace pool instances with harder children.
    Harden {
        inputs: Vec<PathBuf>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        pool: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Decompose { .. } => "decompose",
            Command::Buildlib { .. } => "buildlib",
            Command::Generate { .. } => "generate",
            Command::Stats { .. } => "stats",
            Command::Visualize { .. } => "visualize",
            Command::Feascheck { .. } => "feascheck",
            Command::Genbench { .. } => "genbench",
            Command::Harden { .. } => "harden",
        }
    }
}

fn load_config(global: &GlobalArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &global.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    cfg.apply(&Overrides::from_env(std::env::vars())?);
    cfg.apply(&global.overrides());
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Manifest, PipelineError> {
    let mut cfg = load_config(&cli.global)?;
    let set_inputs = |cfg: &mut PipelineConfig, inputs: Vec<PathBuf>| {
        if !inputs.is_empty() {
            cfg.inputs = inputs;
        }
    };
    let jobs = cfg.jobs;
    match cli.command {
        Command::Decompose { inputs } => {
            set_inputs(&mut cfg, inputs);
            pipeline::with_jobs(jobs, || pipeline::cmd_decompose(&cfg))?
        }
        Command::Buildlib { inputs } => {
            set_inputs(&mut cfg, inputs);
            pipeline::with_jobs(jobs, || pipeline::cmd_buildlib(&cfg))?
        }
        Command::Generate { inputs, library, count, refine } => {
            set_inputs(&mut cfg, inputs);
            cfg.library = library.or(cfg.library);
            cfg.count = count.unwrap_or(cfg.count);
            cfg.generate.refine |= refine;
            pipeline::with_jobs(jobs, || pipeline::cmd_generate(&cfg))?
        }
        Command::Stats { inputs, against, bins } => {
            set_inputs(&mut cfg, inputs);
            cfg.metrics.bins = bins.unwrap_or(cfg.metrics.bins);
            pipeline::with_jobs(jobs, || pipeline::cmd_stats(&cfg, &against))?
        }
        Command::Visualize { inputs } => {
            set_inputs(&mut cfg, inputs);
            pipeline::with_jobs(jobs, || pipeline::cmd_visualize(&cfg))?
        }
        Command::Feascheck { inputs, budget } => {
            set_inputs(&mut cfg, inputs);
            cfg.metrics.oracle_budget = budget.unwrap_or(cfg.metrics.oracle_budget);
            pipeline::with_jobs(jobs, || pipeline::cmd_feascheck(&cfg))?
        }
        Command::Genbench { family, count, units } => {
            if let Some(f) = family {
                if f != cfg.benchgen.spec.family {
                    cfg.benchgen.spec = PlantedSpec::for_family(f);
                }
            }
            cfg.benchgen.count = count.unwrap_or(cfg.benchgen.count);
            cfg.benchgen.spec.units = units.unwrap_or(cfg.benchgen.spec.units);
            pipeline::with_jobs(jobs, || pipeline::cmd_genbench(&cfg))?
        }
        Command::Harden { inputs, iterations, pool } => {
            set_inputs(&mut cfg, inputs);
            cfg.harden.iterations = iterations.unwrap_or(cfg.harden.iterations);
            cfg.harden.pool_size = pool.unwrap_or(cfg.harden.pool_size);
            pipeline::with_jobs(jobs, || pipeline::cmd_harden(&cfg))?
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(cli) {
        Ok(m) => {
            println!("{}", serde_json::json!({ "command": command, "summary": m.summary, "failures": m.failures.len() }));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "command": command, "error": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
