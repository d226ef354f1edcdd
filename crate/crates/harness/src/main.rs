use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gpsmbo::config::{ExperimentConfig, ProblemEntry};
use gpsmbo::distance_study::{distance_study, write_distance_study};
use gpsmbo::experiment::{load_study, run_experiment, write_study, RunOptions};
use gpsmbo::io::{fmt_exact, fmt_g9, write_dataset};
use gpsmbo::plots::emit_plots;
use gpsmbo::stats::{format_report, kruskal_by_problem};
use gpsmbo::tuning::{tuning_grid, write_tuning, TuningConfig};
use gpsmbo_core::expr::{parse_sexpr, GeneratorParams};
use gpsmbo_core::problem::{evaluate_upper, ProblemSpec};
use gpsmbo_core::ProblemInstance;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "gpsmbo", version, about = "Surrogate-model-based symbolic regression experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment (problems × strategies × repetitions).
    Run {
        /// JSON experiment configuration; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed (overrides the configuration).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Repetitions (overrides the configuration).
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Distance matrices and correlations for random trees.
    Distances {
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Problem supplying the data for the phenotypic distance.
        #[arg(long, default_value = "kotanchek2d")]
        problem: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "distances")]
        out: PathBuf,
    },
    /// Grid over EA population size and offspring count.
    Tune {
        /// Comma-separated problem names or spec files.
        #[arg(long, value_delimiter = ',')]
        problems: Option<Vec<String>>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "5,10,15,20")]
        mu: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        lambda: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "tuning.csv")]
        out: PathBuf,
    },
    /// Kruskal-Wallis test per problem.
    Stats {
        /// `evaluations.csv` or `boxplot.csv`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "strategy")]
        groupby: String,
        /// Evaluation count to compare at (default: final).
        #[arg(long)]
        checkpoint: Option<usize>,
    },
    /// Boxplot/weight tables and SVG charts from a study directory.
    Plots {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "50,100")]
        checkpoints: Vec<usize>,
    },
    /// Upper-level fitness of one expression.
    Eval {
        #[arg(long)]
        problem: String,
        /// Expression, e.g. `(* z1 (+ z1 c))`.
        #[arg(long)]
        tree: String,
    },
    /// Export a problem's dataset as CSV.
    Dataset {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a problem specification as JSON.
    Problem {
        name: String,
    },
}

/// Built-in name, or a path to a ProblemSpec JSON file.
fn problem_entry(arg: &str) -> Result<ProblemEntry> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        let spec: ProblemSpec = serde_json::from_str(&text).with_context(|| format!("parsing {arg}"))?;
        return Ok(ProblemEntry::Spec(spec));
    }
    Ok(ProblemEntry::Name(arg.to_string()))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, seed, out, workers, reps, quiet } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::from_file(&p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(r) = reps {
                cfg.repetitions = r;
            }
            let out = out.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
            let study = run_experiment(&cfg, &RunOptions { workers, progress: !quiet })?;
            write_study(&out, &study)?;
            emit_plots(&out, &study)?;
            gpsmbo::io::write_string(&out.join("config.json"), &serde_json::to_string_pretty(&cfg)?)?;
            for s in &study.summary {
                println!(
                    "{} {} @{}: median {} [q1 {}, q3 {}] n={}",
                    s.problem,
                    s.strategy,
                    s.checkpoint,
                    fmt_g9(s.median),
                    fmt_g9(s.q1),
                    fmt_g9(s.q3),
                    s.n
                );
            }
            let failed = study.failures().count();
            if failed > 0 {
                eprintln!("{failed} run(s) failed; see {}", out.join("failures.csv").display());
            }
        }
        Command::Distances { n, problem, seed, out } => {
            if n < 3 {
                bail!("--n must be at least 3");
            }
            let inst = problem_entry(&problem)?.instance()?;
            let study = distance_study(n, &GeneratorParams::default(), &inst, &mut ChaCha8Rng::seed_from_u64(seed));
            write_distance_study(&out, &study)?;
            for (a, b, r) in &study.correlations {
                println!("cor({}, {}) = {}", a.name(), b.name(), fmt_g9(*r));
            }
        }
        Command::Tune { problems, reps, seed, mu, lambda, budget, workers, out } => {
            let mut cfg = TuningConfig { repetitions: reps, master_seed: seed, mus: mu, lambdas: lambda, ..Default::default() };
            cfg.budget.total = budget;
            if let Some(ps) = problems {
                cfg.problems = ps.iter().map(|p| problem_entry(p)).collect::<Result<_>>()?;
            }
            let table = tuning_grid(&cfg, &RunOptions { workers, progress: false })?;
            write_tuning(&out, &table)?;
            for c in &table.cells {
                println!("mu={} lambda={} mean rank {}", c.mu, c.lambda, fmt_g9(c.mean_rank));
            }
            let b = table.best();
            println!("best: mu={} lambda={} (mean rank {})", b.mu, b.lambda, fmt_g9(b.mean_rank));
        }
        Command::Stats { input, groupby, checkpoint } => {
            print!("{}", format_report(&kruskal_by_problem(&input, &groupby, checkpoint)?));
        }
        Command::Plots { input, checkpoints } => {
            let study = load_study(&input, &checkpoints)?;
            for f in emit_plots(&input, &study)? {
                println!("{}", f.display());
            }
        }
        Command::Eval { problem, tree } => {
            let inst: ProblemInstance = problem_entry(&problem)?.instance()?;
            let t = parse_sexpr(&tree, &inst.spec.ops).with_context(|| format!("parsing `{tree}`"))?;
            let e = evaluate_upper(&t, &inst.data, inst.spec.const_bounds);
            println!("F = {}", fmt_g9(e.fitness));
            let c: Vec<String> = e.constants.iter().map(|c| fmt_exact(*c)).collect();
            println!("constants = [{}]", c.join(", "));
            println!("lower-level evaluations = {}", e.lower_evals);
            println!("feasible = {}", e.feasible);
        }
        Command::Dataset { problem, out } => {
            let inst = problem_entry(&problem)?.instance()?;
            write_dataset(&out, &inst.data)?;
        }
        Command::Problem { name } => {
            println!("{}", serde_json::to_string_pretty(&problem_entry(&name)?.spec()?)?);
        }
    }
    Ok(())
}
