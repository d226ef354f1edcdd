use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ea::{new_child, truncate, EaParams};
use super::{Evaluator, IterationEntry, RunRecord, SearchBudget};
use crate::distance::{DistanceTriple, PreparedTree, TedWorkspace};
use crate::expr::{ramped_half_and_half, ExprTree, GeneratorParams, MutationParams, OperatorSet};
use crate::kriging::{expected_improvement, KernelDistance, KernelDistances, KrigingModel, SurrogateConfig};
use crate::problem::ProblemInstance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmboParams {
    pub surrogate: SurrogateConfig,
    /// Population of the EA that maximizes expected improvement.
    pub inner_mu: usize,
    pub inner_lambda: usize,
    pub generator: GeneratorParams,
    pub mutation: MutationParams,
    pub crossover_tries: usize,
    /// Duplicate offspring replacement in the inner EA.
    pub replace_duplicates: bool,
}

impl Default for SmboParams {
    fn default() -> Self {
        SmboParams {
            surrogate: SurrogateConfig::default(),
            inner_mu: 200,
            inner_lambda: 10,
            generator: GeneratorParams::default(),
            mutation: MutationParams::default(),
            crossover_tries: 32,
            replace_duplicates: true,
        }
    }
}

impl SmboParams {
    fn inner_ea(&self) -> EaParams {
        EaParams {
            mu: self.inner_mu,
            lambda: self.inner_lambda,
            generator: self.generator,
            mutation: self.mutation,
            crossover_tries: self.crossover_tries,
            replace_duplicates: self.replace_duplicates,
        }
    }
}

/// Archive of evaluated trees with their pairwise distances.
struct Archive {
    trees: Vec<PreparedTree>,
    y: Vec<f64>,
    /// Row `i` holds distances to trees `0..i`.
    lower: Vec<Vec<DistanceTriple>>,
    seen: BTreeSet<ExprTree>,
}

impl Archive {
    fn new() -> Self {
        Archive { trees: Vec::new(), y: Vec::new(), lower: Vec::new(), seen: BTreeSet::new() }
    }

    fn push(&mut self, p: PreparedTree, y: f64, ws: &mut TedWorkspace) {
        let row = self.trees.iter().map(|q| p.triple(q, ws)).collect();
        self.seen.insert(p.tree.clone());
        self.trees.push(p);
        self.y.push(y);
        self.lower.push(row);
    }

    fn distances(&self) -> KernelDistances {
        KernelDistances::from_fn(self.trees.len(), |i, j| match i.cmp(&j) {
            core::cmp::Ordering::Equal => DistanceTriple::ZERO,
            core::cmp::Ordering::Greater => self.lower[i][j],
            core::cmp::Ordering::Less => self.lower[j][i],
        })
    }

    fn y_min(&self) -> f64 {
        self.y.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Random tree not yet in the archive (any random tree after many attempts).
fn fresh_tree<R: Rng + ?Sized>(ops: &OperatorSet, params: &GeneratorParams, seen: &BTreeSet<ExprTree>, rng: &mut R) -> ExprTree {
    const ATTEMPTS: usize = 10_000;
    let mut t = ramped_half_and_half(ops, params, rng);
    for _ in 0..ATTEMPTS {
        if !seen.contains(&t) {
            break;
        }
        t = ramped_half_and_half(ops, params, rng);
    }
    t
}

/// Inner EA maximizing expected improvement. Returns the chosen tree and
/// its EI; every EI request, repeated or not, counts against the budget.
fn maximize_ei<R: Rng + ?Sized>(
    model: &KrigingModel,
    y_min: f64,
    archive: &BTreeSet<ExprTree>,
    ops: &OperatorSet,
    params: &SmboParams,
    ei_budget: usize,
    rng: &mut R,
) -> (ExprTree, f64) {
    let inner = params.inner_ea();
    let mut memo: BTreeMap<ExprTree, f64> = BTreeMap::new();
    let mut ws = TedWorkspace::default();
    let mut used = 0usize;
    let mut score = |t: &ExprTree, used: &mut usize| -> f64 {
        *used += 1;
        if let Some(v) = memo.get(t) {
            return *v;
        }
        let p = PreparedTree::new(t.clone(), model.data());
        let v = expected_improvement(&model.predict_prepared(&p, &mut ws), y_min);
        memo.insert(t.clone(), v);
        v
    };
    // Larger EI first.
    let better = |a: f64, b: f64| b.total_cmp(&a);

    let mut pop: Vec<(ExprTree, f64)> = Vec::with_capacity(inner.mu + inner.lambda);
    while pop.len() < inner.mu.max(1) && used < ei_budget.max(1) {
        let t = ramped_half_and_half(ops, &params.generator, rng);
        let v = score(&t, &mut used);
        pop.push((t, v));
    }
    while used < ei_budget {
        let n_children = inner.lambda.min(ei_budget - used);
        let parents = pop.len().min(inner.mu);
        for _ in 0..n_children {
            let (parents, children) = pop.split_at(parents);
            let c = new_child(parents, children, ops, &inner, rng);
            let v = score(&c, &mut used);
            pop.push((c, v));
        }
        truncate(&mut pop, inner.mu, better);
    }
    pop.sort_by(|a, b| better(a.1, b.1));

    if let Some((t, v)) = pop.iter().find(|(t, _)| !archive.contains(t)) {
        return (t.clone(), *v);
    }
    let mut seen: Vec<(&ExprTree, f64)> = memo.iter().map(|(t, v)| (t, *v)).collect();
    seen.sort_by(|a, b| better(a.1, b.1));
    if let Some((t, v)) = seen.into_iter().find(|(t, _)| !archive.contains(*t)) {
        return (t.clone(), v);
    }
    let t = fresh_tree(ops, &params.generator, archive, rng);
    let v = expected_improvement(&model.predict(&t), y_min);
    (t, v)
}

/// Surrogate-model-based optimization: a random initial design, then one
/// EI-maximizing proposal per iteration from a freshly fitted Kriging model.
pub fn smbo<R: Rng + ?Sized>(
    problem: &ProblemInstance,
    params: &SmboParams,
    budget: &SearchBudget,
    rng: &mut R,
) -> RunRecord {
    assert!(budget.initial < budget.total, "initial design must leave room for model-based proposals");
    let ops = &problem.spec.ops;
    let x = &problem.data.x;
    let mut ev = Evaluator::new(problem, budget);
    let mut archive = Archive::new();
    let mut ws = TedWorkspace::default();

    for _ in 0..budget.initial {
        let t = fresh_tree(ops, &params.generator, &archive.seen, rng);
        let f = ev.evaluate(&t);
        archive.push(PreparedTree::new(t, x), f, &mut ws);
    }

    let mut iterations = Vec::new();
    while ev.remaining() > 0 {
        let iteration = iterations.len() + 1;
        let fitted = KrigingModel::fit_prepared(archive.trees.clone(), &archive.distances(), &archive.y, x, &params.surrogate);
        let (proposal, entry) = match fitted {
            Ok(model) => {
                let (t, ei) = maximize_ei(&model, archive.y_min(), &archive.seen, ops, params, budget.ei_evals, rng);
                let entry = IterationEntry {
                    iteration,
                    eval_index: ev.count() + 1,
                    weights: Some(model.normalized_weights()),
                    model: Some(model.summary()),
                    fallback: false,
                    ei: Some(ei),
                };
                (t, entry)
            }
            Err(_) => {
                let t = fresh_tree(ops, &params.generator, &archive.seen, rng);
                let entry = IterationEntry {
                    iteration,
                    eval_index: ev.count() + 1,
                    weights: None,
                    model: None,
                    fallback: true,
                    ei: None,
                };
                (t, entry)
            }
        };
        let f = ev.evaluate(&proposal);
        archive.push(PreparedTree::new(proposal, x), f, &mut ws);
        iterations.push(entry);
    }
    ev.finish(String::from("smbo"), iterations, 0)
}

/// [`smbo`] with a kernel over a single distance.
pub fn single_distance_smbo<R: Rng + ?Sized>(
    problem: &ProblemInstance,
    which: KernelDistance,
    budget: &SearchBudget,
    rng: &mut R,
) -> RunRecord {
    let params = SmboParams { surrogate: SurrogateConfig::single(which), ..Default::default() };
    smbo(problem, &params, budget, rng)
}
