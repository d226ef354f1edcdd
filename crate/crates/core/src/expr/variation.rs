use core::mem;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generate::{random_leaf, random_tree, GeneratorParams, GrowMode};
use super::{ExprTree, OperatorSet};

/// Swaps one uniformly chosen subtree of `a` with one of `b`.
pub fn crossover_subtree<R: Rng + ?Sized>(a: &ExprTree, b: &ExprTree, rng: &mut R) -> (ExprTree, ExprTree) {
    let i = rng.gen_range(0..a.node_count());
    let j = rng.gen_range(0..b.node_count());
    swap_at(a, b, i, j)
}

fn swap_at(a: &ExprTree, b: &ExprTree, i: usize, j: usize) -> (ExprTree, ExprTree) {
    let mut a = a.clone();
    let mut b = b.clone();
    let sa = a.subtree_mut(i).expect("index within tree");
    let sb = b.subtree_mut(j).expect("index within tree");
    mem::swap(sa, sb);
    (a, b)
}

/// Subtree crossover restricted to offspring of depth `<= max_depth`.
///
/// Swap points are drawn uniformly and rejected while an offspring would
/// exceed the cap; after `max_tries` rejections the parents are returned.
pub fn crossover_subtree_capped<R: Rng + ?Sized>(
    a: &ExprTree,
    b: &ExprTree,
    max_depth: usize,
    max_tries: usize,
    rng: &mut R,
) -> (ExprTree, ExprTree) {
    let (na, nb) = (a.node_count(), b.node_count());
    for _ in 0..max_tries {
        let i = rng.gen_range(0..na);
        let j = rng.gen_range(0..nb);
        let (sa, sb) = (a.subtree(i).unwrap(), b.subtree(j).unwrap());
        let la = a.level_of(i).unwrap();
        let lb = b.level_of(j).unwrap();
        let depth_a = depth_after_replace(a, i, la, sb.depth());
        let depth_b = depth_after_replace(b, j, lb, sa.depth());
        if depth_a <= max_depth && depth_b <= max_depth {
            return swap_at(a, b, i, j);
        }
    }
    (a.clone(), b.clone())
}

fn depth_after_replace(t: &ExprTree, index: usize, level: usize, new_depth: usize) -> usize {
    if index == 0 {
        return new_depth;
    }
    let mut probe = t.clone();
    *probe.subtree_mut(index).unwrap() = ExprTree::constant();
    probe.depth().max(level - 1 + new_depth)
}

/// Parameters of subtree mutation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationParams {
    /// Probability to replace a leaf by a new random subtree.
    pub p_insert: f64,
    /// Probability to replace an inner subtree by a new random leaf.
    pub p_delete: f64,
    /// Operator probability inside newly inserted subtrees.
    pub p_subtree: f64,
    pub const_prob: f64,
    pub max_depth: usize,
}

impl Default for MutationParams {
    fn default() -> Self {
        MutationParams { p_insert: 0.1, p_delete: 0.1, p_subtree: 0.1, const_prob: 0.2, max_depth: 4 }
    }
}

/// Recursive subtree mutation.
///
/// Inner nodes are deleted (replaced by a random leaf) with `p_delete`,
/// otherwise their children are visited. Leaves are replaced with `p_insert`
/// by a grown subtree that fits under `max_depth`; a grown subtree that is a
/// single terminal amounts to relabeling the leaf.
pub fn mutate_subtree<R: Rng + ?Sized>(
    tree: &ExprTree,
    ops: &OperatorSet,
    params: &MutationParams,
    rng: &mut R,
) -> ExprTree {
    mutate_at(tree, ops, params, 1, rng)
}

fn mutate_at<R: Rng + ?Sized>(
    t: &ExprTree,
    ops: &OperatorSet,
    params: &MutationParams,
    level: usize,
    rng: &mut R,
) -> ExprTree {
    if t.is_leaf() {
        if params.p_insert > 0.0 && rng.gen_bool(params.p_insert.min(1.0)) {
            let room = params.max_depth.saturating_sub(level) + 1;
            let gen = GeneratorParams { max_depth: room, const_prob: params.const_prob, grow_op_prob: params.p_subtree };
            return random_tree(ops, &gen, GrowMode::Grow, rng);
        }
        return t.clone();
    }
    if params.p_delete > 0.0 && rng.gen_bool(params.p_delete.min(1.0)) {
        return random_leaf(ops, params.const_prob, rng);
    }
    let children = t.children().iter().map(|c| mutate_at(c, ops, params, level + 1, rng)).collect();
    ExprTree::node(t.label(), children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_sexpr, ramped_half_and_half, NodeLabel};
    use alloc::vec::Vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn labels(t: &ExprTree) -> Vec<NodeLabel> {
        let mut v = t.preorder_labels();
        v.sort();
        v
    }

    #[test]
    fn leaf_crossover_swaps_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (a, b) = crossover_subtree(&ExprTree::var(1), &ExprTree::var(2), &mut rng);
        assert_eq!((a, b), (ExprTree::var(2), ExprTree::var(1)));
    }

    #[test]
    fn crossover_conserves_labels_and_arity() {
        let ops = OperatorSet::full(2);
        let params = GeneratorParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p1 = ramped_half_and_half(&ops, &params, &mut rng);
            let p2 = ramped_half_and_half(&ops, &params, &mut rng);
            let (c1, c2) = crossover_subtree(&p1, &p2, &mut rng);
            assert!(c1.is_consistent(Some(&ops)) && c2.is_consistent(Some(&ops)));
            let mut before = labels(&p1);
            before.extend(labels(&p2));
            before.sort();
            let mut after = labels(&c1);
            after.extend(labels(&c2));
            after.sort();
            assert_eq!(before, after);
        }
    }

    #[test]
    fn capped_crossover_respects_depth() {
        let ops = OperatorSet::full(2);
        let params = GeneratorParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let p1 = ramped_half_and_half(&ops, &params, &mut rng);
            let p2 = ramped_half_and_half(&ops, &params, &mut rng);
            let (c1, c2) = crossover_subtree_capped(&p1, &p2, 4, 16, &mut rng);
            assert!(c1.depth() <= 4 && c2.depth() <= 4);
        }
    }

    #[test]
    fn zero_probabilities_are_identity() {
        let ops = OperatorSet::full(2);
        let params = MutationParams { p_insert: 0.0, p_delete: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let t = ramped_half_and_half(&ops, &GeneratorParams::default(), &mut rng);
            assert_eq!(mutate_subtree(&t, &ops, &params, &mut rng), t);
        }
    }

    #[test]
    fn forced_delete_gives_leaf() {
        let ops = OperatorSet::full(2);
        let t = parse_sexpr("(+ z1 z2)", &ops).unwrap();
        let params = MutationParams { p_delete: 1.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert!(mutate_subtree(&t, &ops, &params, &mut rng).is_leaf());
        }
    }

    #[test]
    fn mutation_respects_max_depth() {
        let ops = OperatorSet::full(2);
        let gen = GeneratorParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = MutationParams::default();
        let mut n = 0;
        while n < 1000 {
            let t = ramped_half_and_half(&ops, &gen, &mut rng);
            if t.depth() != 4 {
                continue;
            }
            let m = mutate_subtree(&t, &ops, &params, &mut rng);
            assert!(m.depth() <= 4);
            assert!(m.is_consistent(Some(&ops)));
            n += 1;
        }
        // insertion-heavy settings must also stay within the cap
        let heavy = MutationParams { p_insert: 1.0, p_delete: 0.0, p_subtree: 1.0, ..Default::default() };
        for _ in 0..200 {
            let t = ramped_half_and_half(&ops, &gen, &mut rng);
            assert!(mutate_subtree(&t, &ops, &heavy, &mut rng).depth() <= 4);
        }
    }
}
