//! Tree edit distance by exhaustive search, independent of any dynamic
//! programming: (a) minimum-cost valid mapping over all partial injections
//! between the node sets, and (b) bidirectional breadth-first search over
//! explicit edit scripts on ordered labelled forests.

use std::collections::{HashMap, HashSet};

use gpsmbo_core::expr::{ExprTree, NodeLabel, Op, OperatorSet};

/// Every arity-consistent tree with exactly `n` nodes.
pub fn trees_with_nodes(ops: &OperatorSet, n: usize) -> Vec<ExprTree> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    if n == 1 {
        for v in 1..=ops.n_vars() {
            out.push(ExprTree::var(v as u16));
        }
        if ops.constants_allowed() {
            out.push(ExprTree::constant());
        }
        return out;
    }
    for &op in ops.ops() {
        match op.arity() {
            1 => {
                for c in trees_with_nodes(ops, n - 1) {
                    out.push(ExprTree::unary(op, c));
                }
            }
            _ => {
                for left in 1..n - 1 {
                    let ls = trees_with_nodes(ops, left);
                    let rs = trees_with_nodes(ops, n - 1 - left);
                    for l in &ls {
                        for r in &rs {
                            out.push(ExprTree::binary(op, l.clone(), r.clone()));
                        }
                    }
                }
            }
        }
    }
    out
}

pub fn trees_up_to(ops: &OperatorSet, max_nodes: usize) -> Vec<ExprTree> {
    (1..=max_nodes).flat_map(|n| trees_with_nodes(ops, n)).collect()
}

/// Pre-order node table: labels and the pre-order index range of each subtree.
pub struct Flat {
    labels: Vec<NodeLabel>,
    /// `end[i]`: one past the last descendant of `i`.
    end: Vec<usize>,
}

impl Flat {
    pub fn new(t: &ExprTree) -> Self {
        let mut f = Flat { labels: Vec::new(), end: Vec::new() };
        fn walk(t: &ExprTree, f: &mut Flat) {
            let i = f.labels.len();
            f.labels.push(t.label());
            f.end.push(0);
            for c in t.children() {
                walk(c, f);
            }
            f.end[i] = f.labels.len();
        }
        walk(t, &mut f);
        f
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    fn is_ancestor(&self, a: usize, b: usize) -> bool {
        a < b && b < self.end[a]
    }

    /// `a` is to the left of `b`: before it in pre-order and not its ancestor.
    fn is_left_of(&self, a: usize, b: usize) -> bool {
        a < b && !self.is_ancestor(a, b)
    }
}

/// Minimum over valid mappings of relabels + unmapped nodes of both trees.
pub fn mapping_distance(a: &Flat, b: &Flat) -> usize {
    let mut best = a.len() + b.len();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; b.len()];
    search(a, b, 0, &mut pairs, &mut used, 0, &mut best);
    best
}

fn compatible(a: &Flat, b: &Flat, (i1, j1): (usize, usize), (i2, j2): (usize, usize)) -> bool {
    a.is_ancestor(i1, i2) == b.is_ancestor(j1, j2)
        && a.is_ancestor(i2, i1) == b.is_ancestor(j2, j1)
        && a.is_left_of(i1, i2) == b.is_left_of(j1, j2)
        && a.is_left_of(i2, i1) == b.is_left_of(j2, j1)
}

fn search(
    a: &Flat,
    b: &Flat,
    i: usize,
    pairs: &mut Vec<(usize, usize)>,
    used: &mut [bool],
    relabels: usize,
    best: &mut usize,
) {
    if i == a.len() {
        let m = pairs.len();
        let cost = relabels + (a.len() - m) + (b.len() - m);
        *best = (*best).min(cost);
        return;
    }
    // Leave node i unmapped.
    search(a, b, i + 1, pairs, used, relabels, best);
    for j in 0..b.len() {
        if used[j] || !pairs.iter().all(|&p| compatible(a, b, p, (i, j))) {
            continue;
        }
        used[j] = true;
        pairs.push((i, j));
        let r = relabels + usize::from(a.labels[i] != b.labels[j]);
        search(a, b, i + 1, pairs, used, r, best);
        pairs.pop();
        used[j] = false;
    }
}

/// Ordered labelled tree without arity constraints (intermediate edit states).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct GTree {
    label: u8,
    children: Vec<GTree>,
}

type Forest = Vec<GTree>;

fn label_code(l: NodeLabel) -> u8 {
    match l {
        NodeLabel::Const => 0,
        NodeLabel::Var(v) => v as u8,
        NodeLabel::Op(op) => 100 + Op::ALL.iter().position(|o| *o == op).unwrap() as u8,
    }
}

fn to_gtree(t: &ExprTree) -> GTree {
    GTree { label: label_code(t.label()), children: t.children().iter().map(to_gtree).collect() }
}

fn collect_labels(f: &Forest, out: &mut Vec<u8>) {
    for t in f {
        if !out.contains(&t.label) {
            out.push(t.label);
        }
        collect_labels(&t.children, out);
    }
}

/// All forests one edit away: relabel, delete (children spliced into the
/// parent), or insert a node adopting a contiguous run of siblings.
fn neighbours(f: &Forest, alphabet: &[u8], out: &mut Vec<Forest>) {
    // Operations whose "parent" is this forest level.
    for a in 0..=f.len() {
        for b in a..=f.len() {
            for &l in alphabet {
                let mut g: Forest = f[..a].to_vec();
                g.push(GTree { label: l, children: f[a..b].to_vec() });
                g.extend_from_slice(&f[b..]);
                out.push(g);
            }
        }
    }
    for k in 0..f.len() {
        let t = &f[k];
        for &l in alphabet {
            if l != t.label {
                let mut g = f.clone();
                g[k].label = l;
                out.push(g);
            }
        }
        let mut g: Forest = f[..k].to_vec();
        g.extend_from_slice(&t.children);
        g.extend_from_slice(&f[k + 1..]);
        out.push(g);
        let mut inner = Vec::new();
        neighbours(&t.children, alphabet, &mut inner);
        for children in inner {
            let mut g = f.clone();
            g[k].children = children;
            out.push(g);
        }
    }
}

/// Length of the shortest edit script between two trees, searching at most
/// `max_depth` edits; `None` when no script that short exists.
pub fn script_distance(a: &ExprTree, b: &ExprTree, max_depth: usize) -> Option<usize> {
    let fa: Forest = vec![to_gtree(a)];
    let fb: Forest = vec![to_gtree(b)];
    if fa == fb {
        return Some(0);
    }
    let mut alphabet = Vec::new();
    collect_labels(&fa, &mut alphabet);
    collect_labels(&fb, &mut alphabet);

    let mut seen: [HashMap<Forest, usize>; 2] = [HashMap::new(), HashMap::new()];
    seen[0].insert(fa.clone(), 0);
    seen[1].insert(fb.clone(), 0);
    let mut frontier: [Vec<Forest>; 2] = [vec![fa], vec![fb]];
    let mut depth = [0usize; 2];
    while depth[0] + depth[1] < max_depth {
        let side = if frontier[0].len() <= frontier[1].len() { 0 } else { 1 };
        let other = 1 - side;
        let mut next = Vec::new();
        let mut best: Option<usize> = None;
        let mut buf = Vec::new();
        for f in &frontier[side] {
            buf.clear();
            neighbours(f, &alphabet, &mut buf);
            for g in buf.drain(..) {
                if let Some(&d) = seen[other].get(&g) {
                    let total = depth[side] + 1 + d;
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
                if !seen[side].contains_key(&g) {
                    seen[side].insert(g.clone(), depth[side] + 1);
                    next.push(g);
                }
            }
        }
        depth[side] += 1;
        if let Some(b) = best {
            return (b <= max_depth).then_some(b);
        }
        if next.is_empty() {
            return None;
        }
        frontier[side] = next;
    }
    None
}

#[allow(dead_code)]
pub fn distinct(trees: &[ExprTree]) -> usize {
    trees.iter().collect::<HashSet<_>>().len()
}
