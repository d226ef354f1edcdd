//! Zhang–Shasha ordered tree edit distance with unit costs.

use alloc::vec::Vec;

use crate::expr::{ExprTree, NodeLabel};

/// Post-order view of a tree used by the dynamic program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TedTree {
    labels: Vec<NodeLabel>,
    /// Post-order index of the leftmost leaf below each node.
    leftmost: Vec<usize>,
    keyroots: Vec<usize>,
}

impl TedTree {
    pub fn new(tree: &ExprTree) -> Self {
        let mut labels = Vec::with_capacity(tree.node_count());
        let mut leftmost = Vec::with_capacity(tree.node_count());
        fn walk(t: &ExprTree, labels: &mut Vec<NodeLabel>, leftmost: &mut Vec<usize>) -> usize {
            let mut first = None;
            for c in t.children() {
                let l = walk(c, labels, leftmost);
                first.get_or_insert(l);
            }
            let me = labels.len();
            labels.push(t.label());
            let l = first.unwrap_or(me);
            leftmost.push(l);
            l
        }
        walk(tree, &mut labels, &mut leftmost);
        // A keyroot is the highest post-order node for its leftmost leaf.
        let n = labels.len();
        let mut seen = alloc::vec![false; n];
        let mut keyroots = Vec::new();
        for k in (0..n).rev() {
            if !seen[leftmost[k]] {
                seen[leftmost[k]] = true;
                keyroots.push(k);
            }
        }
        keyroots.reverse();
        TedTree { labels, leftmost, keyroots }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Reusable buffers for repeated distance computations.
#[derive(Clone, Debug, Default)]
pub struct TedWorkspace {
    tree_dist: Vec<u32>,
    forest: Vec<u32>,
}

impl TedWorkspace {
    pub fn distance(&mut self, a: &TedTree, b: &TedTree) -> usize {
        let (n, m) = (a.len(), b.len());
        if n == 0 || m == 0 {
            return n + m;
        }
        self.tree_dist.clear();
        self.tree_dist.resize(n * m, 0);
        let stride = m + 1;
        self.forest.clear();
        self.forest.resize((n + 1) * stride, 0);
        for &i in &a.keyroots {
            for &j in &b.keyroots {
                self.forest_distance(a, b, i, j);
            }
        }
        self.tree_dist[(n - 1) * m + (m - 1)] as usize
    }

    fn forest_distance(&mut self, a: &TedTree, b: &TedTree, i: usize, j: usize) {
        let m = b.len();
        let stride = m + 1;
        let (li, lj) = (a.leftmost[i], b.leftmost[j]);
        let fd = &mut self.forest;
        let td = &mut self.tree_dist;
        // fd[(x - li + 1) * stride + (y - lj + 1)] is the distance between the
        // forests a[li..=x] and b[lj..=y]; row/column 0 are empty forests.
        fd[0] = 0;
        for x in li..=i {
            let r = x - li + 1;
            fd[r * stride] = fd[(r - 1) * stride] + 1;
        }
        for y in lj..=j {
            let c = y - lj + 1;
            fd[c] = fd[c - 1] + 1;
        }
        for x in li..=i {
            let r = x - li + 1;
            let lx = a.leftmost[x];
            for y in lj..=j {
                let c = y - lj + 1;
                let ly = b.leftmost[y];
                let del = fd[(r - 1) * stride + c] + 1;
                let ins = fd[r * stride + c - 1] + 1;
                let v = if lx == li && ly == lj {
                    let relabel = u32::from(a.labels[x] != b.labels[y]);
                    let v = del.min(ins).min(fd[(r - 1) * stride + c - 1] + relabel);
                    td[x * m + y] = v;
                    v
                } else {
                    let pr = lx - li;
                    let pc = ly - lj;
                    del.min(ins).min(fd[pr * stride + pc] + td[x * m + y])
                };
                fd[r * stride + c] = v;
            }
        }
    }
}

/// Minimum number of node deletions, insertions and relabelings turning `a` into `b`.
pub fn ted(a: &ExprTree, b: &ExprTree) -> usize {
    TedWorkspace::default().distance(&TedTree::new(a), &TedTree::new(b))
}
