//! Batch runs over problems × strategies × repetitions.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use gpsmbo_core::expr::{parse_sexpr, OperatorSet};
use gpsmbo_core::math;
use gpsmbo_core::search::{EvalEntry, IterationEntry};
use gpsmbo_core::seed::run_seed;
use gpsmbo_core::{ProblemInstance, RunRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::io::{column, csv_writer, fmt_exact, fmt_g9, parse_f64, read_table, write_string};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub problem: String,
    pub strategy: String,
    pub repetition: usize,
    pub seed: u64,
    /// The record, or the reason the run failed.
    pub outcome: Result<RunRecord, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointSummary {
    pub problem: String,
    pub strategy: String,
    pub checkpoint: usize,
    pub n: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

/// Mean normalized weights of one strategy at one surrogate iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMean {
    pub problem: String,
    pub strategy: String,
    pub iteration: usize,
    pub n: usize,
    pub phd: f64,
    pub ted: f64,
    pub shd2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyResult {
    pub runs: Vec<RunResult>,
    pub checkpoints: Vec<usize>,
    pub summary: Vec<CheckpointSummary>,
    pub weight_means: Vec<WeightMean>,
}

impl StudyResult {
    pub fn from_runs(runs: Vec<RunResult>, checkpoints: &[usize]) -> Self {
        let summary = summarize(&runs, checkpoints);
        let weight_means = weight_means(&runs);
        StudyResult { runs, checkpoints: checkpoints.to_vec(), summary, weight_means }
    }

    /// Best-so-far at `checkpoint` for every successful run of a cell.
    pub fn values_at(&self, problem: &str, strategy: &str, checkpoint: usize) -> Vec<f64> {
        self.runs
            .iter()
            .filter(|r| r.problem == problem && r.strategy == strategy)
            .filter_map(|r| r.outcome.as_ref().ok().and_then(|rec| rec.best_at(checkpoint)))
            .collect()
    }

    pub fn problems(&self) -> Vec<String> {
        unique(self.runs.iter().map(|r| r.problem.clone()))
    }

    pub fn strategies(&self) -> Vec<String> {
        unique(self.runs.iter().map(|r| r.strategy.clone()))
    }

    pub fn failures(&self) -> impl Iterator<Item = (&RunResult, &str)> {
        self.runs.iter().filter_map(|r| r.outcome.as_ref().err().map(|e| (r, e.as_str())))
    }
}

/// Distinct values in first-seen order.
fn unique(it: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in it {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

fn summarize(runs: &[RunResult], checkpoints: &[usize]) -> Vec<CheckpointSummary> {
    let mut cells: Vec<(String, String)> = Vec::new();
    for r in runs {
        let key = (r.problem.clone(), r.strategy.clone());
        if !cells.contains(&key) {
            cells.push(key);
        }
    }
    let mut out = Vec::new();
    for (problem, strategy) in cells {
        for &cp in checkpoints {
            let values: Vec<f64> = runs
                .iter()
                .filter(|r| r.problem == problem && r.strategy == strategy)
                .filter_map(|r| r.outcome.as_ref().ok().and_then(|rec| rec.best_at(cp)))
                .collect();
            if values.is_empty() {
                continue;
            }
            out.push(CheckpointSummary {
                problem: problem.clone(),
                strategy: strategy.clone(),
                checkpoint: cp,
                n: values.len(),
                median: math::median(&values),
                q1: math::quantile(&values, 0.25),
                q3: math::quantile(&values, 0.75),
                min: values.iter().copied().fold(f64::INFINITY, f64::min),
                max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }
    out
}

fn weight_means(runs: &[RunResult]) -> Vec<WeightMean> {
    // (problem, strategy) in first-seen order, then iteration.
    let mut order: Vec<(String, String)> = Vec::new();
    let mut acc: BTreeMap<(usize, usize), (usize, [f64; 3])> = BTreeMap::new();
    for r in runs {
        let Ok(rec) = &r.outcome else { continue };
        for (iteration, w) in rec.weight_log() {
            let key = (r.problem.clone(), r.strategy.clone());
            let cell = match order.iter().position(|k| *k == key) {
                Some(i) => i,
                None => {
                    order.push(key);
                    order.len() - 1
                }
            };
            let e = acc.entry((cell, iteration)).or_insert((0, [0.0; 3]));
            e.0 += 1;
            for k in 0..3 {
                e.1[k] += w[k];
            }
        }
    }
    acc.into_iter()
        .map(|((cell, iteration), (n, sum))| {
            let (problem, strategy) = order[cell].clone();
            let mean = sum.map(|s| s / n as f64);
            WeightMean { problem, strategy, iteration, n, shd2: mean[0], phd: mean[1], ted: mean[2] }
        })
        .collect()
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses all available cores.
    pub workers: Option<usize>,
    /// Print one line per finished run to stderr.
    pub progress: bool,
}

struct Job {
    problem: usize,
    strategy: usize,
    repetition: usize,
}

/// Runs every (problem, strategy, repetition) cell. A failing run is recorded
/// and does not stop the study.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<StudyResult> {
    cfg.validate()?;
    let instances: Vec<Result<ProblemInstance, String>> =
        cfg.problems.iter().map(|p| p.instance().map_err(|e| format!("{e:#}"))).collect();
    let labels: Vec<String> = cfg.strategies.iter().map(|s| s.label()).collect();
    let mut jobs = Vec::new();
    for problem in 0..cfg.problems.len() {
        for strategy in 0..cfg.strategies.len() {
            for repetition in 0..cfg.repetitions {
                jobs.push(Job { problem, strategy, repetition });
            }
        }
    }

    let run_one = |job: &Job| -> RunResult {
        let name = cfg.problems[job.problem].name().to_string();
        let label = labels[job.strategy].clone();
        let seed = run_seed(cfg.master_seed, &name, &label, job.repetition as u64);
        let outcome = match &instances[job.problem] {
            Err(e) => Err(e.clone()),
            Ok(inst) => catch_unwind(AssertUnwindSafe(|| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                cfg.strategies[job.strategy].run(inst, &cfg.budget, &mut rng)
            }))
            .map_err(panic_message),
        };
        if opts.progress {
            let status = match &outcome {
                Ok(r) => format!("best {}", fmt_g9(r.best().map_or(f64::NAN, |e| e.fitness))),
                Err(e) => format!("failed: {e}"),
            };
            eprintln!("{name} {label} rep {} {status}", job.repetition);
        }
        RunResult { problem: name, strategy: label, repetition: job.repetition, seed, outcome }
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().context("starting worker pool")?;
    let runs: Vec<RunResult> = pool.install(|| jobs.par_iter().map(run_one).collect());
    Ok(StudyResult::from_runs(runs, &cfg.checkpoints))
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        format!("panic: {s}")
    } else if let Some(s) = p.downcast_ref::<String>() {
        format!("panic: {s}")
    } else {
        "panic".into()
    }
}

pub const EVALUATIONS_CSV: &str = "evaluations.csv";
pub const ITERATIONS_CSV: &str = "iterations.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const WEIGHTS_CSV: &str = "weight_trajectory.csv";
pub const FAILURES_CSV: &str = "failures.csv";

const EVAL_HEADER: [&str; 10] =
    ["problem", "strategy", "rep", "seed", "eval_idx", "tree_sexpr", "F", "best_so_far", "lower_evals", "constants"];
const ITER_HEADER: [&str; 17] = [
    "problem",
    "strategy",
    "rep",
    "iter_idx",
    "eval_idx",
    "w_phd",
    "w_ted",
    "w_shd2",
    "fallback",
    "ei",
    "beta_shd2",
    "beta_phd",
    "beta_ted",
    "nugget",
    "mu",
    "sigma2",
    "log_likelihood",
];

fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_exact).unwrap_or_default()
}

/// Writes every output file of a study into `dir`. Each run is first staged
/// as its own JSON file under `runs/`; the merged tables follow the run order.
pub fn write_study(dir: &Path, study: &StudyResult) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for r in &study.runs {
        let path = dir.join("runs").join(&r.problem).join(&r.strategy).join(format!("rep-{:03}.json", r.repetition));
        write_string(&path, &serde_json::to_string(r)?)?;
    }

    let mut ev = csv_writer(&dir.join(EVALUATIONS_CSV))?;
    ev.write_record(EVAL_HEADER)?;
    let mut it = csv_writer(&dir.join(ITERATIONS_CSV))?;
    it.write_record(ITER_HEADER)?;
    let mut fail = csv_writer(&dir.join(FAILURES_CSV))?;
    fail.write_record(["problem", "strategy", "rep", "seed", "error"])?;
    for r in &study.runs {
        let rep = r.repetition.to_string();
        let rec = match &r.outcome {
            Ok(rec) => rec,
            Err(e) => {
                fail.write_record([&r.problem, &r.strategy, &rep, &r.seed.to_string(), e])?;
                continue;
            }
        };
        for e in &rec.evaluations {
            let constants: Vec<String> = e.constants.iter().map(|c| fmt_exact(*c)).collect();
            ev.write_record([
                r.problem.as_str(),
                &r.strategy,
                &rep,
                &r.seed.to_string(),
                &e.index.to_string(),
                &e.tree.to_string(),
                &fmt_exact(e.fitness),
                &fmt_exact(e.best_so_far),
                &e.lower_evals.to_string(),
                &constants.join(";"),
            ])?;
        }
        for i in &rec.iterations {
            let m = i.model.as_ref();
            let w = i.weights;
            it.write_record([
                r.problem.clone(),
                r.strategy.clone(),
                rep.clone(),
                i.iteration.to_string(),
                i.eval_index.to_string(),
                opt_num(w.map(|w| w[1])),
                opt_num(w.map(|w| w[2])),
                opt_num(w.map(|w| w[0])),
                u8::from(i.fallback).to_string(),
                opt_num(i.ei),
                opt_num(m.map(|m| m.beta[0])),
                opt_num(m.map(|m| m.beta[1])),
                opt_num(m.map(|m| m.beta[2])),
                opt_num(m.map(|m| m.nugget)),
                opt_num(m.map(|m| m.mu)),
                opt_num(m.map(|m| m.sigma2)),
                opt_num(m.map(|m| m.log_likelihood)),
            ])?;
        }
    }
    ev.flush()?;
    it.flush()?;
    fail.flush()?;
    write_summary(&dir.join(SUMMARY_CSV), &study.summary)?;
    write_weight_means(&dir.join(WEIGHTS_CSV), &study.weight_means)?;
    Ok(())
}

pub fn write_summary(path: &Path, rows: &[CheckpointSummary]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["problem", "strategy", "checkpoint", "n", "median", "q1", "q3", "min", "max"])?;
    for s in rows {
        w.write_record([
            s.problem.clone(),
            s.strategy.clone(),
            s.checkpoint.to_string(),
            s.n.to_string(),
            fmt_g9(s.median),
            fmt_g9(s.q1),
            fmt_g9(s.q3),
            fmt_g9(s.min),
            fmt_g9(s.max),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_weight_means(path: &Path, rows: &[WeightMean]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["problem", "strategy", "iteration", "n", "w_phd", "w_ted", "w_shd2"])?;
    for m in rows {
        w.write_record([
            m.problem.clone(),
            m.strategy.clone(),
            m.iteration.to_string(),
            m.n.to_string(),
            fmt_g9(m.phd),
            fmt_g9(m.ted),
            fmt_g9(m.shd2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds the run records of a study directory from its CSV files.
/// Failed runs are restored from `failures.csv` when present.
pub fn load_study(dir: &Path, checkpoints: &[usize]) -> Result<StudyResult> {
    let (h, rows) = read_table(&dir.join(EVALUATIONS_CSV))?;
    let c = |name: &str| column(&h, name);
    let (cp, cs, cr, cseed, ci, ct, cf, cb, cl, cc) = (
        c("problem")?,
        c("strategy")?,
        c("rep")?,
        c("seed")?,
        c("eval_idx")?,
        c("tree_sexpr")?,
        c("F")?,
        c("best_so_far")?,
        c("lower_evals")?,
        c("constants")?,
    );
    let any_ops = OperatorSet::full(u16::MAX as usize);
    let mut runs: Vec<RunResult> = Vec::new();
    let mut index: BTreeMap<(String, String, usize), usize> = BTreeMap::new();
    for row in &rows {
        let key = (row[cp].clone(), row[cs].clone(), row[cr].parse::<usize>()?);
        let slot = *index.entry(key.clone()).or_insert_with(|| {
            runs.push(RunResult {
                problem: key.0.clone(),
                strategy: key.1.clone(),
                repetition: key.2,
                seed: row[cseed].parse().unwrap_or(0),
                outcome: Ok(RunRecord {
                    strategy: key.1.clone(),
                    evaluations: Vec::new(),
                    iterations: Vec::new(),
                    generations: 0,
                    upper_calls: 0,
                }),
            });
            runs.len() - 1
        });
        let tree = parse_sexpr(&row[ct], &any_ops).map_err(|e| anyhow!("tree `{}`: {e}", row[ct]))?;
        let constants = if row[cc].is_empty() {
            Vec::new()
        } else {
            row[cc].split(';').map(parse_f64).collect::<Result<Vec<f64>>>()?
        };
        let rec = runs[slot].outcome.as_mut().expect("loaded runs are successful");
        rec.evaluations.push(EvalEntry {
            index: row[ci].parse()?,
            tree,
            fitness: parse_f64(&row[cf])?,
            best_so_far: parse_f64(&row[cb])?,
            constants,
            lower_evals: row[cl].parse()?,
        });
        rec.upper_calls += 1;
    }

    let it_path = dir.join(ITERATIONS_CSV);
    if it_path.exists() {
        let (h, rows) = read_table(&it_path)?;
        let c = |name: &str| column(&h, name);
        let (cp, cs, cr, cit, cev, cphd, cted, cshd2, cfb, cei) = (
            c("problem")?,
            c("strategy")?,
            c("rep")?,
            c("iter_idx")?,
            c("eval_idx")?,
            c("w_phd")?,
            c("w_ted")?,
            c("w_shd2")?,
            c("fallback")?,
            c("ei")?,
        );
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { parse_f64(s).map(Some) };
        for row in &rows {
            let key = (row[cp].clone(), row[cs].clone(), row[cr].parse::<usize>()?);
            let Some(&slot) = index.get(&key) else { continue };
            let w = match (opt(&row[cshd2])?, opt(&row[cphd])?, opt(&row[cted])?) {
                (Some(a), Some(b), Some(c)) => Some([a, b, c]),
                _ => None,
            };
            let rec = runs[slot].outcome.as_mut().expect("loaded runs are successful");
            rec.iterations.push(IterationEntry {
                iteration: row[cit].parse()?,
                eval_index: row[cev].parse()?,
                weights: w,
                model: None,
                fallback: row[cfb] == "1",
                ei: opt(&row[cei])?,
            });
        }
    }

    let fail_path = dir.join(FAILURES_CSV);
    if fail_path.exists() {
        let (h, rows) = read_table(&fail_path)?;
        let (cp, cs, cr, cseed, ce) =
            (column(&h, "problem")?, column(&h, "strategy")?, column(&h, "rep")?, column(&h, "seed")?, column(&h, "error")?);
        for row in rows {
            runs.push(RunResult {
                problem: row[cp].clone(),
                strategy: row[cs].clone(),
                repetition: row[cr].parse()?,
                seed: row[cseed].parse()?,
                outcome: Err(row[ce].clone()),
            });
        }
    }
    Ok(StudyResult::from_runs(runs, checkpoints))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::config::ProblemEntry;
    use gpsmbo_core::kriging::SurrogateConfig;
    use gpsmbo_core::problem::LowerLevelBudget;
    use gpsmbo_core::search::SmboParams;
    use gpsmbo_core::{SearchBudget, Strategy};

    pub(crate) fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            problems: vec![ProblemEntry::Name("sqr".into())],
            strategies: vec![
                Strategy::random(),
                Strategy::ea(5, 1),
                Strategy::Smbo(SmboParams {
                    surrogate: SurrogateConfig { mle_evals: 60, ..Default::default() },
                    inner_mu: 20,
                    ..Default::default()
                }),
            ],
            repetitions: 2,
            master_seed: 11,
            budget: SearchBudget {
                total: 14,
                initial: 8,
                ei_evals: 100,
                lower: LowerLevelBudget { direct_per_constant: 30, nelder_mead_per_constant: 30 },
            },
            checkpoints: vec![7, 14],
            output_dir: None,
        }
    }

    #[test]
    fn cardinality_and_summary() {
        let study = run_experiment(&tiny_config(), &RunOptions { workers: Some(2), progress: false }).unwrap();
        assert_eq!(study.runs.len(), 6);
        assert!(study.runs.iter().all(|r| r.outcome.is_ok()));
        assert_eq!(study.summary.len(), 6);
        for s in &study.summary {
            assert_eq!(s.n, 2);
            assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
        }
        // Only the surrogate strategy logs weights: one mean per iteration.
        assert_eq!(study.weight_means.len(), 6);
        for m in &study.weight_means {
            assert!((m.phd + m.ted + m.shd2 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn files_round_trip() {
        let cfg = tiny_config();
        let study = run_experiment(&cfg, &RunOptions { workers: Some(1), progress: false }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_study(dir.path(), &study).unwrap();
        let loaded = load_study(dir.path(), &cfg.checkpoints).unwrap();
        assert_eq!(loaded.summary, study.summary);
        assert_eq!(loaded.weight_means, study.weight_means);
        assert!(dir.path().join("runs/sqr/smbo/rep-001.json").exists());
    }

    #[test]
    fn failing_problem_is_recorded() {
        let mut cfg = tiny_config();
        let mut spec = gpsmbo_core::ProblemSpec::builtin("sqr").unwrap();
        spec.name = "broken".into();
        spec.target = gpsmbo_core::problem::Target::Expr { sexpr: "(log (- z1 c))".into(), constants: vec![5.0] };
        cfg.problems.push(ProblemEntry::Spec(spec));
        let study = run_experiment(&cfg, &RunOptions { workers: Some(1), progress: false }).unwrap();
        assert_eq!(study.runs.len(), 12);
        assert_eq!(study.failures().count(), 6);
        assert!(study.summary.iter().all(|s| s.problem == "sqr"));
    }
}
