use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Evaluator, RunRecord, SearchBudget};
use crate::expr::{
    crossover_subtree_capped, mutate_subtree, ramped_half_and_half, ExprTree, GeneratorParams, MutationParams,
    OperatorSet,
};
use crate::problem::ProblemInstance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EaParams {
    pub mu: usize,
    pub lambda: usize,
    pub generator: GeneratorParams,
    pub mutation: MutationParams,
    /// Swap points drawn before crossover gives up and returns the parents.
    pub crossover_tries: usize,
    /// Replace an offspring that duplicates a population member or a sibling
    /// by a random tree before it is evaluated.
    pub replace_duplicates: bool,
}

impl Default for EaParams {
    fn default() -> Self {
        EaParams {
            mu: 15,
            lambda: 1,
            generator: GeneratorParams::default(),
            mutation: MutationParams::default(),
            crossover_tries: 32,
            replace_duplicates: true,
        }
    }
}

/// Child of two uniformly chosen parents: subtree crossover (first
/// offspring) followed by mutation.
pub(crate) fn make_child<R: Rng + ?Sized>(
    pop: &[(ExprTree, f64)],
    ops: &OperatorSet,
    params: &EaParams,
    rng: &mut R,
) -> ExprTree {
    let a = &pop[rng.gen_range(0..pop.len())].0;
    let b = &pop[rng.gen_range(0..pop.len())].0;
    let depth_cap = params.generator.max_depth.max(params.mutation.max_depth);
    let (child, _) = crossover_subtree_capped(a, b, depth_cap, params.crossover_tries, rng);
    mutate_subtree(&child, ops, &params.mutation, rng)
}

/// Random draws tried when replacing a duplicate offspring.
const REPLACEMENT_TRIES: usize = 100;

/// Like [`make_child`], but with `params.replace_duplicates` a child equal to
/// a member of `pop` or `siblings` is swapped for a random tree that is not.
/// If every draw is also a duplicate the last draw is kept.
pub(crate) fn new_child<R: Rng + ?Sized>(
    pop: &[(ExprTree, f64)],
    siblings: &[(ExprTree, f64)],
    ops: &OperatorSet,
    params: &EaParams,
    rng: &mut R,
) -> ExprTree {
    let mut child = make_child(pop, ops, params, rng);
    if !params.replace_duplicates {
        return child;
    }
    let taken = |t: &ExprTree| pop.iter().chain(siblings).any(|(p, _)| p == t);
    let mut tries = 0;
    while taken(&child) && tries < REPLACEMENT_TRIES {
        child = ramped_half_and_half(ops, &params.generator, rng);
        tries += 1;
    }
    child
}

/// Keeps the `mu` best of `pop`, ordered by `better` (stable, so older
/// individuals win ties).
pub(crate) fn truncate(pop: &mut Vec<(ExprTree, f64)>, mu: usize, better: impl Fn(f64, f64) -> core::cmp::Ordering) {
    pop.sort_by(|a, b| better(a.1, b.1));
    pop.truncate(mu);
}

/// (μ+λ) EA with uniform parent selection and truncation survival.
pub fn ea_optimize<R: Rng + ?Sized>(
    problem: &ProblemInstance,
    params: &EaParams,
    budget: &SearchBudget,
    rng: &mut R,
) -> RunRecord {
    assert!(params.mu >= 1 && params.lambda >= 1, "mu and lambda must be positive");
    let ops = &problem.spec.ops;
    let mut ev = Evaluator::new(problem, budget);
    let mut pop: Vec<(ExprTree, f64)> = Vec::with_capacity(params.mu + params.lambda);
    while pop.len() < params.mu && ev.remaining() > 0 {
        let t = ramped_half_and_half(ops, &params.generator, rng);
        let f = ev.evaluate(&t);
        pop.push((t, f));
    }
    let mut generations = 0;
    while ev.remaining() > 0 {
        let n_children = params.lambda.min(ev.remaining());
        let mut children = Vec::with_capacity(n_children);
        for _ in 0..n_children {
            let c = new_child(&pop, &children, ops, params, rng);
            let f = ev.evaluate(&c);
            children.push((c, f));
        }
        pop.extend(children);
        truncate(&mut pop, params.mu, |a, b| a.total_cmp(&b));
        generations += 1;
    }
    ev.finish(String::from("ea"), Vec::new(), generations)
}
