//! Grid search over (μ, λ) of the model-free EA.

use std::path::Path;

use anyhow::Result;
use gpsmbo_core::stats::midranks;
use gpsmbo_core::{SearchBudget, Strategy};

use crate::config::{ExperimentConfig, ProblemEntry};
use crate::experiment::{run_experiment, RunOptions, StudyResult};
use crate::io::{csv_writer, fmt_g9};

#[derive(Clone, Debug)]
pub struct TuningConfig {
    pub problems: Vec<ProblemEntry>,
    pub mus: Vec<usize>,
    pub lambdas: Vec<usize>,
    pub repetitions: usize,
    pub master_seed: u64,
    pub budget: SearchBudget,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            problems: ExperimentConfig::default().problems,
            mus: vec![5, 10, 15, 20],
            lambdas: vec![1, 2, 3, 4, 5],
            repetitions: 20,
            master_seed: 1,
            budget: SearchBudget::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuningCell {
    pub mu: usize,
    pub lambda: usize,
    /// Mean final best value per problem.
    pub mean_best: Vec<f64>,
    /// Rank of the cell per problem (1 = best, ties mid-ranked).
    pub ranks: Vec<f64>,
    pub mean_rank: f64,
}

#[derive(Clone, Debug)]
pub struct TuningTable {
    pub problems: Vec<String>,
    /// Row-major over `mus` then `lambdas`.
    pub cells: Vec<TuningCell>,
}

impl TuningTable {
    /// Cell with the lowest mean rank (first one on ties).
    pub fn best(&self) -> &TuningCell {
        self.cells
            .iter()
            .fold(None, |acc: Option<&TuningCell>, c| match acc {
                Some(b) if b.mean_rank <= c.mean_rank => Some(b),
                _ => Some(c),
            })
            .expect("grid is not empty")
    }
}

pub fn tuning_grid(cfg: &TuningConfig, opts: &RunOptions) -> Result<TuningTable> {
    let mut strategies = Vec::new();
    for &mu in &cfg.mus {
        for &lambda in &cfg.lambdas {
            strategies.push(Strategy::ea(mu, lambda));
        }
    }
    let exp = ExperimentConfig {
        problems: cfg.problems.clone(),
        strategies: strategies.clone(),
        repetitions: cfg.repetitions,
        master_seed: cfg.master_seed,
        budget: cfg.budget,
        checkpoints: vec![cfg.budget.total],
        output_dir: None,
    };
    let study = run_experiment(&exp, opts)?;
    Ok(rank_table(&study, &strategies, cfg.budget.total))
}

fn rank_table(study: &StudyResult, strategies: &[Strategy], checkpoint: usize) -> TuningTable {
    let problems = study.problems();
    let mut cells: Vec<TuningCell> = strategies
        .iter()
        .map(|s| {
            let Strategy::Ea(p) = s else { unreachable!("grid holds EA cells only") };
            let mean_best = problems
                .iter()
                .map(|prob| {
                    let v = study.values_at(prob, &s.label(), checkpoint);
                    if v.is_empty() {
                        f64::NAN
                    } else {
                        v.iter().sum::<f64>() / v.len() as f64
                    }
                })
                .collect();
            TuningCell { mu: p.mu, lambda: p.lambda, mean_best, ranks: Vec::new(), mean_rank: 0.0 }
        })
        .collect();
    for k in 0..problems.len() {
        let values: Vec<f64> = cells.iter().map(|c| c.mean_best[k]).collect();
        for (c, r) in cells.iter_mut().zip(midranks(&values)) {
            c.ranks.push(r);
        }
    }
    for c in &mut cells {
        c.mean_rank = c.ranks.iter().sum::<f64>() / c.ranks.len().max(1) as f64;
    }
    TuningTable { problems, cells }
}

/// One row per (cell, problem) plus a `mean` row per cell.
pub fn write_tuning(path: &Path, table: &TuningTable) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["mu", "lambda", "problem", "mean_best", "rank"])?;
    for c in &table.cells {
        for (k, p) in table.problems.iter().enumerate() {
            w.write_record([c.mu.to_string(), c.lambda.to_string(), p.clone(), fmt_g9(c.mean_best[k]), fmt_g9(c.ranks[k])])?;
        }
        w.write_record([c.mu.to_string(), c.lambda.to_string(), "mean".into(), String::new(), fmt_g9(c.mean_rank)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use gpsmbo_core::problem::LowerLevelBudget;

    #[test]
    fn grid_ranks_are_permutations() {
        let cfg = TuningConfig {
            problems: vec![ProblemEntry::Name("sqr".into()), ProblemEntry::Name("sqr+log".into())],
            mus: vec![2, 4],
            lambdas: vec![1, 2, 3],
            repetitions: 2,
            master_seed: 3,
            budget: SearchBudget {
                total: 12,
                lower: LowerLevelBudget { direct_per_constant: 20, nelder_mead_per_constant: 20 },
                ..Default::default()
            },
        };
        let t = tuning_grid(&cfg, &RunOptions { workers: Some(1), progress: false }).unwrap();
        assert_eq!(t.cells.len(), 6);
        for k in 0..2 {
            let total: f64 = t.cells.iter().map(|c| c.ranks[k]).sum();
            assert_eq!(total, 21.0);
        }
        let best = t.best();
        assert!(t.cells.iter().all(|c| c.mean_rank >= best.mean_rank));
    }
}
