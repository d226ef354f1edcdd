use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ExprTree, NodeLabel, OperatorSet};

/// Parameters of the random tree generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub max_depth: usize,
    /// Probability that a terminal is a constant rather than a variable.
    pub const_prob: f64,
    /// Grow mode: probability of an operator at a node above the target depth.
    pub grow_op_prob: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams { max_depth: 4, const_prob: 0.2, grow_op_prob: 0.5 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowMode {
    /// Operators on every level above the target depth.
    Full,
    /// Operator or terminal chosen at random above the target depth.
    Grow,
}

/// Random terminal: a constant with probability `const_prob` (when allowed),
/// otherwise a uniformly chosen variable.
pub fn random_leaf<R: Rng + ?Sized>(ops: &OperatorSet, const_prob: f64, rng: &mut R) -> ExprTree {
    let use_const = ops.constants_allowed() && (ops.n_vars() == 0 || rng.gen_bool(const_prob.clamp(0.0, 1.0)));
    if use_const {
        ExprTree::constant()
    } else {
        ExprTree::var(rng.gen_range(1..=ops.n_vars()) as u16)
    }
}

fn random_op_label<R: Rng + ?Sized>(ops: &OperatorSet, rng: &mut R) -> NodeLabel {
    NodeLabel::Op(ops.ops()[rng.gen_range(0..ops.ops().len())])
}

fn build<R: Rng + ?Sized>(
    ops: &OperatorSet,
    params: &GeneratorParams,
    mode: GrowMode,
    level: usize,
    target: usize,
    rng: &mut R,
) -> ExprTree {
    let place_op = level < target
        && match mode {
            GrowMode::Full => true,
            GrowMode::Grow => rng.gen_bool(params.grow_op_prob.clamp(0.0, 1.0)),
        };
    if !place_op {
        return random_leaf(ops, params.const_prob, rng);
    }
    let label = random_op_label(ops, rng);
    let children: Vec<ExprTree> =
        (0..label.arity()).map(|_| build(ops, params, mode, level + 1, target, rng)).collect();
    ExprTree::node(label, children)
}

/// Random tree of depth at most `params.max_depth`.
pub fn random_tree<R: Rng + ?Sized>(
    ops: &OperatorSet,
    params: &GeneratorParams,
    mode: GrowMode,
    rng: &mut R,
) -> ExprTree {
    assert!(params.max_depth >= 1, "max depth must be at least 1");
    build(ops, params, mode, 1, params.max_depth, rng)
}

/// Ramped half-and-half: mode uniform over {full, grow}, target depth uniform
/// in `[2, max_depth]` (or 1 when `max_depth == 1`).
pub fn ramped_half_and_half<R: Rng + ?Sized>(ops: &OperatorSet, params: &GeneratorParams, rng: &mut R) -> ExprTree {
    assert!(params.max_depth >= 1, "max depth must be at least 1");
    let mode = if rng.gen_bool(0.5) { GrowMode::Full } else { GrowMode::Grow };
    let target = if params.max_depth == 1 { 1 } else { rng.gen_range(2..=params.max_depth) };
    build(ops, params, mode, 1, target, rng)
}
