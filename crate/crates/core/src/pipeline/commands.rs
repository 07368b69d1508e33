use rayon::prelude::*;
use serde_json::json;

use super::harden::{harden, Evaluator, HardPool, OracleNodes, SolverTime};
use super::io::{collect_inputs, read_instance, Failure, InputEntry, LoadedInput, Manifest, OutDir};
use super::{Hardness, PipelineConfig, PipelineError};
use crate::benchgen::gen_corpus;
use crate::detect::{decompose, decompose_detailed, BlockPartition};
use crate::graph::{to_ccm_image, write_pgm, write_ppm, Palette, Tint};
use crate::library::{build_library, StructureLibrary};
use crate::metrics::{compute_stats, feasibility_bruteforce, similarity_score, solve_external, FeasStatus, GraphStats, MetricsError};
use crate::milp::{write_mps, MilpInstance};
use crate::ops::{generate_batch, GenConfig};

fn load_all(cfg: &PipelineConfig) -> Result<Vec<LoadedInput>, PipelineError> {
    let paths = collect_inputs(&cfg.inputs)?;
    let loaded: Vec<LoadedInput> = paths.par_iter().map(|p| read_instance(p)).collect::<Result<_, _>>()?;
    for w in loaded.windows(2) {
        if w[0].name == w[1].name {
            return Err(PipelineError::Config(format!("two inputs share the name {:?}", w[0].name)));
        }
    }
    Ok(loaded)
}

fn entries(loaded: &[LoadedInput]) -> Vec<InputEntry> {
    loaded.iter().map(|l| l.entry.clone()).collect()
}

/// Decomposes every input; failures are collected, not fatal.
fn decompose_all(
    cfg: &PipelineConfig,
    loaded: &[LoadedInput],
) -> (Vec<Option<BlockPartition>>, Vec<Failure>) {
    let parts: Vec<Result<BlockPartition, String>> = loaded
        .par_iter()
        .map(|l| decompose(&l.instance, &cfg.detector).map_err(|e| e.to_string()))
        .collect();
    let mut failures = Vec::new();
    let parts = parts
        .into_iter()
        .zip(loaded)
        .map(|(p, l)| match p {
            Ok(p) => Some(p),
            Err(error) => {
                failures.push(Failure { input: l.entry.path.clone(), error });
                None
            }
        })
        .collect();
    (parts, failures)
}

fn decomposed_corpus(
    loaded: &[LoadedInput],
    parts: &[Option<BlockPartition>],
) -> Vec<(MilpInstance<f64>, BlockPartition)> {
    loaded
        .iter()
        .zip(parts)
        .filter_map(|(l, p)| p.clone().map(|p| (l.instance.clone(), p)))
        .collect()
}

fn mps_bytes(inst: &MilpInstance<f64>) -> Result<Vec<u8>, PipelineError> {
    write_mps(inst).map_err(|source| PipelineError::Mps { path: inst.name.clone().into(), source })
}

fn gen_config(cfg: &PipelineConfig) -> GenConfig {
    GenConfig { seed: cfg.seed, ..cfg.generate.clone() }
}

pub fn cmd_decompose(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    cfg.check()?;
    let loaded = load_all(cfg)?;
    let (parts, failures) = decompose_all(cfg, &loaded);
    let mut out = OutDir::create(&cfg.out)?;
    let mut rows = Vec::new();
    for (l, p) in loaded.iter().zip(&parts) {
        if let Some(p) = p {
            out.write_json(&format!("{}.partition.json", l.name), p)?;
            rows.push(json!({
                "name": l.name,
                "units": p.units.len(),
                "master_rows": p.master_rows.len(),
                "border_cols": p.border_cols.len(),
            }));
        }
    }
    let summary = json!({ "decomposed": rows.len(), "failed": failures.len(), "instances": rows });
    out.finish("decompose", cfg, entries(&loaded), failures, summary)
}

fn library_from(
    cfg: &PipelineConfig,
    loaded: &[LoadedInput],
    parts: &[Option<BlockPartition>],
) -> Result<StructureLibrary<f64>, PipelineError> {
    let corpus = decomposed_corpus(loaded, parts);
    if corpus.is_empty() {
        return Err(PipelineError::Nothing("no input could be decomposed".into()));
    }
    let mut lib = build_library(&corpus)?;
    lib.meta.detector = Some(cfg.detector);
    Ok(lib)
}

pub fn cmd_buildlib(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    cfg.check()?;
    let loaded = load_all(cfg)?;
    let (parts, failures) = decompose_all(cfg, &loaded);
    let lib = library_from(cfg, &loaded, &parts)?;
    let mut out = OutDir::create(&cfg.out)?;
    out.write("library.json", lib.to_json().as_bytes())?;
    let summary = json!({ "units": lib.len(), "sources": lib.meta.sources.len(), "corpus_hash": lib.meta.corpus_hash });
    out.finish("buildlib", cfg, entries(&loaded), failures, summary)
}

pub fn cmd_generate(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    cfg.check()?;
    let loaded = load_all(cfg)?;
    let (parts, mut failures) = decompose_all(cfg, &loaded);
    let mut out = OutDir::create(&cfg.out)?;
    let lib = match &cfg.library {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
            StructureLibrary::load(std::io::BufReader::new(file))?
        }
        None => {
            let lib = library_from(cfg, &loaded, &parts)?;
            out.write("library.json", lib.to_json().as_bytes())?;
            lib
        }
    };
    let gen = gen_config(cfg);
    let mut produced = 0;
    let mut achieved = Vec::new();
    for (l, p) in loaded.iter().zip(&parts) {
        let Some(p) = p else { continue };
        for res in generate_batch(&l.instance, p, &lib, &gen, cfg.count) {
            match res {
                Ok(g) => {
                    out.write(&format!("{}.mps", g.instance.name), &mps_bytes(&g.instance)?)?;
                    out.write_json(
                        &format!("{}.gen.json", g.instance.name),
                        &json!({ "record": g.record, "partition": g.partition }),
                    )?;
                    achieved.push(g.record.achieved);
                    produced += 1;
                }
                Err(e) => failures.push(Failure { input: l.entry.path.clone(), error: e.to_string() }),
            }
        }
    }
    let mean = if achieved.is_empty() { 0.0 } else { achieved.iter().sum::<f64>() / achieved.len() as f64 };
    let summary = json!({ "generated": produced, "library_units": lib.len(), "mean_achieved": mean });
    out.finish("generate", cfg, entries(&loaded), failures, summary)
}

fn stats_of(loaded: &[LoadedInput]) -> Result<Vec<GraphStats>, PipelineError> {
    loaded
        .par_iter()
        .map(|l| compute_stats(&l.instance).map_err(|e| PipelineError::Metrics(format!("{}: {e}", l.name))))
        .collect()
}

/// Similarity of `cfg.inputs` against `against`.
pub fn cmd_stats(cfg: &PipelineConfig, against: &[std::path::PathBuf]) -> Result<Manifest, PipelineError> {
    cfg.check()?;
    let a = load_all(cfg)?;
    let b = load_all(&PipelineConfig { inputs: against.to_vec(), ..cfg.clone() })?;
    let (sa, sb) = (stats_of(&a)?, stats_of(&b)?);
    let report = similarity_score(&sa, &sb, cfg.metrics.bins).map_err(|e| PipelineError::Metrics(e.to_string()))?;
    let mut out = OutDir::create(&cfg.out)?;
    let per = |l: &[LoadedInput], s: &[GraphStats]| -> Vec<serde_json::Value> {
        l.iter().zip(s).map(|(l, s)| json!({ "name": l.name, "stats": s })).collect()
    };
    out.write_json("stats.json", &json!({ "a": per(&a, &sa), "b": per(&b, &sb) }))?;
    out.write_json("similarity.json", &report)?;
    out.write("similarity.txt", format!("{report}\n").as_bytes())?;
    let mut inputs = entries(&a);
    inputs.extend(entries(&b));
    out.finish("stats", cfg, inputs, vec![], json!({ "score": report.score }))
}

pub fn cmd_visualize(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    cfg.check()?;
    let loaded = load_all(cfg)?;
    let mut out = OutDir::create(&cfg.out)?;
    let mut failures = Vec::new();
    let graph_err = |e: crate::graph::GraphError| PipelineError::Metrics(e.to_string());
    for l in &loaded {
        out.write(&format!("{}.pgm", l.name), &write_pgm(&to_ccm_image(&l.instance, None, None).map_err(graph_err)?).map_err(graph_err)?)?;
        match decompose_detailed(&l.instance, &cfg.detector) {
            Ok(d) => {
                let r = &d.reordering;
                let img = to_ccm_image(&l.instance, Some(&r.row_perm), Some(&r.col_perm)).map_err(graph_err)?;
                out.write(&format!("{}.blocks.pgm", l.name), &write_pgm(&img).map_err(graph_err)?)?;
                let tint = Tint { rows: (r.block_rows..img.height).collect(), cols: (r.block_cols..img.width).collect() };
                out.write(&format!("{}.blocks.ppm", l.name), &write_ppm(&img, &tint, &Palette::default()).map_err(graph_err)?)?;
            }
            Err(e) => failures.push(Failure { input: l.entry.path.clone(), error: e.to_string() }),
        }
    }
    let summary = json!({ "images": loaded.len(), "undecomposed": failures.len() });
    out.finish("visualize", cfg, entries(&loaded), failures, summary)
}

pub fn cmd_feascheck(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    cfg.check()?;
    let loaded = load_all(cfg)?;
    let verdicts: Vec<Result<serde_json::Value, String>> = loaded
        .par_iter()
        .map(|l| match feasibility_bruteforce(&l.instance, cfg.metrics.oracle_budget) {
            Ok(v) => Ok(json!({ "name": l.name, "method": "oracle", "feasible": v.is_feasible(), "verdict": v })),
            Err(MetricsError::OutOfScope(why)) if !cfg.solver.command.is_empty() => {
                let r = solve_external(&l.instance, &cfg.solver).map_err(|e| format!("{why}; solver: {e}"))?;
                let feasible = matches!(r.status, crate::metrics::SolveStatus::Optimal | crate::metrics::SolveStatus::Unbounded);
                Ok(json!({ "name": l.name, "method": "solver", "feasible": feasible, "result": r }))
            }
            Err(e) => Err(e.to_string()),
        })
        .collect();
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for (l, v) in loaded.iter().zip(verdicts) {
        match v {
            Ok(v) => rows.push(v),
            Err(error) => failures.push(Failure { input: l.entry.path.clone(), error }),
        }
    }
    let feasible = rows.iter().filter(|r| r["feasible"] == true).count();
    let unknown = rows
        .iter()
        .filter(|r| r.get("verdict").is_some_and(|v| v["status"] == json!(FeasStatus::Unknown)["status"]))
        .count();
    let ratio = if rows.is_empty() { 0.0 } else { feasible as f64 / rows.len() as f64 };
    let mut out = OutDir::create(&cfg.out)?;
    out.write_json("feasibility.json", &json!({ "instances": rows }))?;
    let summary = json!({ "checked": rows.len(), "feasible": feasible, "unknown": unknown, "feasible_ratio": ratio });
    out.finish("feascheck", cfg, entries(&loaded), failures, summary)
}

pub fn cmd_genbench(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    cfg.check()?;
    let spec = &cfg.benchgen.spec;
    let corpus = gen_corpus::<f64>(spec, cfg.benchgen.count, cfg.seed)?;
    let mut out = OutDir::create(&cfg.out)?;
    for (inst, truth) in &corpus {
        out.write(&format!("{}.mps", inst.name), &mps_bytes(inst)?)?;
        out.write_json(&format!("{}.truth.json", inst.name), truth)?;
    }
    let summary = json!({ "family": spec.family, "instances": corpus.len() });
    out.finish("genbench", cfg, vec![], vec![], summary)
}

pub fn cmd_harden(cfg: &PipelineConfig) -> Result<Manifest, PipelineError> {
    cfg.check()?;
    let loaded = load_all(cfg)?;
    let (parts, failures) = decompose_all(cfg, &loaded);
    let lib = library_from(cfg, &loaded, &parts)?;
    let mut entries_for_pool = decomposed_corpus(&loaded, &parts);
    entries_for_pool.truncate(cfg.harden.pool_size);
    let eval: Box<dyn Evaluator<f64>> = match cfg.harden.hardness {
        Hardness::OracleNodes => Box::new(OracleNodes { budget: cfg.metrics.oracle_budget }),
        Hardness::SolverTime => Box::new(SolverTime { config: cfg.solver.clone() }),
    };
    let mut pool = HardPool::new(entries_for_pool, eval.as_ref());
    harden(&mut pool, &lib, eval.as_ref(), cfg.harden.iterations, &gen_config(cfg));
    let mut out = OutDir::create(&cfg.out)?;
    let mut slots = Vec::new();
    for (k, s) in pool.slots.iter().enumerate() {
        let rel = format!("pool/{k:02}_{}.mps", s.instance.name);
        out.write(&rel, &mps_bytes(&s.instance)?)?;
        slots.push(json!({ "slot": k, "instance": s.instance.name, "file": rel, "hardness": s.hardness }));
    }
    out.write_json("trajectory.json", &json!({ "log": pool.log, "slots": slots }))?;
    let t = &pool.log.trajectory;
    let summary = json!({
        "pool": pool.slots.len(),
        "iterations": pool.iteration,
        "initial_mean": t.first(),
        "final_mean": t.last(),
    });
    out.finish("harden", cfg, entries(&loaded), failures, summary)
}
