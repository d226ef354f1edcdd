use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use super::{Evaluator, RunRecord, SearchBudget};
use crate::expr::{ramped_half_and_half, GeneratorParams};
use crate::problem::ProblemInstance;

/// Independent ramped half-and-half trees until the budget is spent.
pub fn random_search<R: Rng + ?Sized>(problem: &ProblemInstance, budget: &SearchBudget, rng: &mut R) -> RunRecord {
    random_search_with(problem, &GeneratorParams::default(), budget, rng)
}

pub(super) fn random_search_with<R: Rng + ?Sized>(
    problem: &ProblemInstance,
    generator: &GeneratorParams,
    budget: &SearchBudget,
    rng: &mut R,
) -> RunRecord {
    let mut ev = Evaluator::new(problem, budget);
    while ev.remaining() > 0 {
        let t = ramped_half_and_half(&problem.spec.ops, generator, rng);
        ev.evaluate(&t);
    }
    ev.finish(String::from("rs"), Vec::new(), 0)
}
