//! Upper-level search strategies sharing one evaluation budget.

mod ea;
mod random;
mod smbo;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::expr::{ExprTree, GeneratorParams};
use crate::kriging::{KernelDistance, ModelSummary, SurrogateConfig};
use crate::problem::{evaluate_upper_with, LowerLevelBudget, ProblemInstance};

pub use ea::{ea_optimize, EaParams};
pub use random::random_search;
pub use smbo::{single_distance_smbo, smbo, SmboParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBudget {
    /// Upper-level evaluations per run.
    pub total: usize,
    /// Random trees evaluated before the first surrogate fit.
    pub initial: usize,
    /// Expected-improvement evaluations per surrogate iteration.
    pub ei_evals: usize,
    pub lower: LowerLevelBudget,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { total: 100, initial: 20, ei_evals: 10_000, lower: LowerLevelBudget::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalEntry {
    /// 1-based position in the run.
    pub index: usize,
    pub tree: ExprTree,
    pub fitness: f64,
    pub best_so_far: f64,
    pub constants: Vec<f64>,
    pub lower_evals: usize,
}

/// One surrogate iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationEntry {
    /// 1-based iteration counter.
    pub iteration: usize,
    /// Index of the evaluation this iteration proposed.
    pub eval_index: usize,
    /// Normalized `(shd2, phd, ted)` weights; absent when the fit failed.
    pub weights: Option<[f64; 3]>,
    pub model: Option<ModelSummary>,
    /// The fit failed and a random tree was proposed instead.
    pub fallback: bool,
    pub ei: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub strategy: String,
    pub evaluations: Vec<EvalEntry>,
    pub iterations: Vec<IterationEntry>,
    /// EA generations completed (zero for other strategies).
    pub generations: usize,
    /// Number of upper-level evaluations performed.
    pub upper_calls: usize,
}

impl RunRecord {
    /// Earliest evaluation attaining the minimum fitness.
    pub fn best(&self) -> Option<&EvalEntry> {
        self.evaluations.iter().fold(None, |acc: Option<&EvalEntry>, e| match acc {
            Some(b) if b.fitness <= e.fitness => Some(b),
            _ => Some(e),
        })
    }

    /// Best-so-far after `k` evaluations (or after all of them if fewer).
    pub fn best_at(&self, k: usize) -> Option<f64> {
        let k = k.min(self.evaluations.len());
        k.checked_sub(1).map(|i| self.evaluations[i].best_so_far)
    }

    /// Iterations with a fitted model and their normalized weights.
    pub fn weight_log(&self) -> impl Iterator<Item = (usize, [f64; 3])> + '_ {
        self.iterations.iter().filter_map(|it| it.weights.map(|w| (it.iteration, w)))
    }

    pub fn fallback_count(&self) -> usize {
        self.iterations.iter().filter(|it| it.fallback).count()
    }
}

/// The only path to upper-level fitness; it logs and counts every call.
pub(crate) struct Evaluator<'a> {
    problem: &'a ProblemInstance,
    lower: LowerLevelBudget,
    budget: usize,
    log: Vec<EvalEntry>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(problem: &'a ProblemInstance, budget: &SearchBudget) -> Self {
        Evaluator { problem, lower: budget.lower, budget: budget.total, log: Vec::with_capacity(budget.total) }
    }

    pub(crate) fn remaining(&self) -> usize {
        self.budget - self.log.len()
    }

    pub(crate) fn evaluate(&mut self, tree: &ExprTree) -> f64 {
        assert!(self.remaining() > 0, "upper-level budget exhausted");
        let e = evaluate_upper_with(tree, &self.problem.data, self.problem.spec.const_bounds, &self.lower);
        let best_so_far = self.log.last().map_or(e.fitness, |l| l.best_so_far.min(e.fitness));
        self.log.push(EvalEntry {
            index: self.log.len() + 1,
            tree: e.tree,
            fitness: e.fitness,
            best_so_far,
            constants: e.constants,
            lower_evals: e.lower_evals,
        });
        e.fitness
    }

    pub(crate) fn count(&self) -> usize {
        self.log.len()
    }

    pub(crate) fn finish(self, strategy: String, iterations: Vec<IterationEntry>, generations: usize) -> RunRecord {
        let upper_calls = self.log.len();
        RunRecord { strategy, evaluations: self.log, iterations, generations, upper_calls }
    }
}

/// A configured upper-level strategy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Strategy {
    Random {
        #[serde(default)]
        generator: GeneratorParams,
    },
    Ea(EaParams),
    Smbo(SmboParams),
}

impl Strategy {
    pub fn random() -> Self {
        Strategy::Random { generator: GeneratorParams::default() }
    }

    pub fn ea(mu: usize, lambda: usize) -> Self {
        Strategy::Ea(EaParams { mu, lambda, ..Default::default() })
    }

    pub fn smbo() -> Self {
        Strategy::Smbo(SmboParams::default())
    }

    pub fn smbo_single(which: KernelDistance) -> Self {
        Strategy::Smbo(SmboParams { surrogate: SurrogateConfig::single(which), ..Default::default() })
    }

    /// Short identifier used in file names, logs and seed derivation.
    pub fn label(&self) -> String {
        match self {
            Strategy::Random { .. } => "rs".to_string(),
            Strategy::Ea(p) => alloc::format!("ea-mu{}-lambda{}", p.mu, p.lambda),
            Strategy::Smbo(p) => {
                let active = p.surrogate.active;
                if active.iter().all(|a| *a) {
                    return "smbo".to_string();
                }
                let mut s = String::from("smbo");
                // Fixed order so labels do not depend on kernel layout.
                for d in [KernelDistance::Phd, KernelDistance::Ted, KernelDistance::Shd2] {
                    if active[d as usize] {
                        s.push('-');
                        s.push_str(d.name());
                    }
                }
                s
            }
        }
    }

    pub fn run<R: Rng + ?Sized>(&self, problem: &ProblemInstance, budget: &SearchBudget, rng: &mut R) -> RunRecord {
        let mut record = match self {
            Strategy::Random { generator } => random::random_search_with(problem, generator, budget, rng),
            Strategy::Ea(p) => ea_optimize(problem, p, budget, rng),
            Strategy::Smbo(p) => smbo(problem, p, budget, rng),
        };
        record.strategy = self.label();
        record
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sqr() -> ProblemInstance {
        ProblemInstance::builtin("sqr").unwrap()
    }

    fn small_budget(total: usize) -> SearchBudget {
        SearchBudget {
            total,
            initial: 10,
            ei_evals: 400,
            lower: LowerLevelBudget { direct_per_constant: 50, nelder_mead_per_constant: 50 },
        }
    }

    fn small_smbo() -> SmboParams {
        SmboParams {
            surrogate: SurrogateConfig { mle_evals: 100, ..Default::default() },
            inner_mu: 40,
            inner_lambda: 10,
            ..Default::default()
        }
    }

    fn assert_trace(r: &RunRecord, total: usize) {
        assert_eq!(r.evaluations.len(), total);
        assert_eq!(r.upper_calls, total);
        for (i, e) in r.evaluations.iter().enumerate() {
            assert_eq!(e.index, i + 1);
            assert!((0.0..=1.0).contains(&e.fitness));
            let best = r.evaluations[..=i].iter().map(|e| e.fitness).fold(f64::INFINITY, f64::min);
            assert_eq!(e.best_so_far, best);
        }
        assert_eq!(r.best().unwrap().fitness, r.evaluations.last().unwrap().best_so_far);
    }

    #[test]
    fn labels() {
        assert_eq!(Strategy::random().label(), "rs");
        assert_eq!(Strategy::ea(15, 1).label(), "ea-mu15-lambda1");
        assert_eq!(Strategy::smbo().label(), "smbo");
        assert_eq!(Strategy::smbo_single(KernelDistance::Ted).label(), "smbo-ted");
    }

    #[test]
    fn random_search_budget_and_trace() {
        let p = sqr();
        let r = random_search(&p, &small_budget(1), &mut ChaCha8Rng::seed_from_u64(3));
        assert_trace(&r, 1);
        let a = random_search(&p, &small_budget(30), &mut ChaCha8Rng::seed_from_u64(3));
        assert_trace(&a, 30);
        let b = random_search(&p, &small_budget(30), &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn ea_generation_count() {
        let p = sqr();
        let params = EaParams { mu: 15, lambda: 1, ..Default::default() };
        let r = ea_optimize(&p, &params, &small_budget(100), &mut ChaCha8Rng::seed_from_u64(1));
        assert_trace(&r, 100);
        assert_eq!(r.generations, 85);
        let r = ea_optimize(&p, &params, &small_budget(15), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(r.generations, 0);
        let params = EaParams { mu: 5, lambda: 4, ..Default::default() };
        let r = ea_optimize(&p, &params, &small_budget(23), &mut ChaCha8Rng::seed_from_u64(1));
        // 5 initial, then 4 + 4 + 4 + 4 + 2.
        assert_eq!(r.generations, 5);
        assert_trace(&r, 23);
    }

    #[test]
    fn duplicate_offspring_are_replaced() {
        let ops = crate::expr::OperatorSet::full(1);
        let z1 = ExprTree::var(1);
        let pop: Vec<(ExprTree, f64)> = (0..5).map(|_| (z1.clone(), 0.5)).collect();
        let siblings = [(ExprTree::constant(), 0.5)];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = EaParams::default();
        for _ in 0..200 {
            let c = ea::new_child(&pop, &siblings, &ops, &params, &mut rng);
            assert!(c != z1 && c != ExprTree::constant());
        }
        // Without replacement, identical parents mostly reproduce themselves.
        let params = EaParams { replace_duplicates: false, ..params };
        let copies = (0..200).filter(|_| ea::new_child(&pop, &siblings, &ops, &params, &mut rng) == z1).count();
        assert!(copies > 100);
    }

    #[test]
    fn smbo_accounting() {
        let p = sqr();
        let budget = small_budget(16);
        let r = smbo(&p, &small_smbo(), &budget, &mut ChaCha8Rng::seed_from_u64(9));
        assert_trace(&r, 16);
        assert_eq!(r.iterations.len(), 6);
        for (k, it) in r.iterations.iter().enumerate() {
            assert_eq!(it.iteration, k + 1);
            assert_eq!(it.eval_index, 11 + k);
        }
        for (_, w) in r.weight_log() {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let distinct: BTreeSet<&ExprTree> = r.evaluations.iter().map(|e| &e.tree).collect();
        assert_eq!(distinct.len(), r.evaluations.len());
        let again = smbo(&p, &small_smbo(), &budget, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(r, again);
    }

    #[test]
    fn single_distance_weights() {
        let p = sqr();
        let params = SmboParams { surrogate: SurrogateConfig { mle_evals: 60, ..SurrogateConfig::single(KernelDistance::Phd) }, ..small_smbo() };
        let r = Strategy::Smbo(params).run(&p, &small_budget(14), &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(r.strategy, "smbo-phd");
        assert_trace(&r, 14);
        for (_, w) in r.weight_log() {
            assert_eq!(w, [0.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn strategy_json() {
        let s: Strategy = serde_json::from_str(r#"{"kind":"ea","mu":10,"lambda":3}"#).unwrap();
        assert_eq!(s, Strategy::ea(10, 3));
        let s: Strategy = serde_json::from_str(r#"{"kind":"random"}"#).unwrap();
        assert_eq!(s, Strategy::random());
        let s: Strategy = serde_json::from_str(r#"{"kind":"smbo","surrogate":{"active":[false,false,true]}}"#).unwrap();
        assert_eq!(s.label(), "smbo-ted");
    }
}
