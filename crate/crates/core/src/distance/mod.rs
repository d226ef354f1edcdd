//! Tree distances: phenotypic (PhD), tree edit (TED) and the structural
//! Hamming distances (SHD1, SHD2).

mod phd;
mod shd;
mod ted;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::expr::{DataMatrix, ExprTree};

pub use phd::{phd, phd_from_phenotypes, phenotype, Phenotype};
pub use shd::{shd1, shd2};
pub use ted::{ted, TedTree, TedWorkspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Phd,
    Ted,
    Shd1,
    Shd2,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Phd, Measure::Ted, Measure::Shd1, Measure::Shd2];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Phd => "phd",
            Measure::Ted => "ted",
            Measure::Shd1 => "shd1",
            Measure::Shd2 => "shd2",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The three distances entering the Kriging kernel.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct DistanceTriple {
    pub shd2: f64,
    pub phd: f64,
    pub ted: f64,
}

impl DistanceTriple {
    pub const ZERO: DistanceTriple = DistanceTriple { shd2: 0.0, phd: 0.0, ted: 0.0 };

    /// Components in kernel order `(shd2, phd, ted)`.
    pub fn as_array(&self) -> [f64; 3] {
        [self.shd2, self.phd, self.ted]
    }
}

/// A tree together with everything needed to compute its distance triple
/// against other prepared trees without re-deriving it.
#[derive(Clone, Debug)]
pub struct PreparedTree {
    pub tree: ExprTree,
    pub phenotype: Phenotype,
    pub ted: TedTree,
}

impl PreparedTree {
    pub fn new(tree: ExprTree, x: &DataMatrix) -> Self {
        let phenotype = phenotype(&tree, x);
        let ted = TedTree::new(&tree);
        PreparedTree { tree, phenotype, ted }
    }

    pub fn triple(&self, other: &PreparedTree, ws: &mut TedWorkspace) -> DistanceTriple {
        if self.tree == other.tree {
            return DistanceTriple::ZERO;
        }
        DistanceTriple {
            shd2: shd2(&self.tree, &other.tree),
            phd: phd_from_phenotypes(&self.phenotype, &other.phenotype),
            ted: ws.distance(&self.ted, &other.ted) as f64,
        }
    }
}

/// All three kernel distances between two trees.
pub fn distance_triple(a: &ExprTree, b: &ExprTree, x: &DataMatrix) -> DistanceTriple {
    if a == b {
        return DistanceTriple::ZERO;
    }
    DistanceTriple { shd2: shd2(a, b), phd: phd(a, b, x), ted: ted(a, b) as f64 }
}

/// Symmetric `n × n` matrix of one distance measure.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    measure: Measure,
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(measure: Measure, n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = f(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        DistanceMatrix { measure, n, data }
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Strictly-lower-triangle entries, row by row.
    pub fn lower_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            out.extend_from_slice(&self.data[i * self.n..i * self.n + i]);
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Distance matrix of one measure over `trees`; `x` is only used by PhD.
pub fn distance_matrix(trees: &[ExprTree], measure: Measure, x: &DataMatrix) -> DistanceMatrix {
    assert!(!trees.is_empty(), "distance matrix needs at least one tree");
    match measure {
        Measure::Phd => {
            let ph: Vec<Phenotype> = trees.iter().map(|t| phenotype(t, x)).collect();
            DistanceMatrix::from_fn(measure, trees.len(), |i, j| {
                if trees[i] == trees[j] {
                    0.0
                } else {
                    phd_from_phenotypes(&ph[i], &ph[j])
                }
            })
        }
        Measure::Ted => {
            let prepared: Vec<TedTree> = trees.iter().map(TedTree::new).collect();
            let mut ws = TedWorkspace::default();
            DistanceMatrix::from_fn(measure, trees.len(), |i, j| ws.distance(&prepared[i], &prepared[j]) as f64)
        }
        Measure::Shd1 => DistanceMatrix::from_fn(measure, trees.len(), |i, j| shd1(&trees[i], &trees[j])),
        Measure::Shd2 => DistanceMatrix::from_fn(measure, trees.len(), |i, j| shd2(&trees[i], &trees[j])),
    }
}

/// Distance triples between archive members keyed by unordered index pair.
#[derive(Clone, Debug, Default)]
pub struct PairCache {
    entries: BTreeMap<(usize, usize), DistanceTriple>,
}

impl PairCache {
    pub fn get_or_insert_with(&mut self, i: usize, j: usize, f: impl FnOnce() -> DistanceTriple) -> DistanceTriple {
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.entries.entry(key).or_insert_with(f)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<DistanceTriple> {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries.get(&key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_sexpr, OperatorSet};

    fn p(s: &str) -> ExprTree {
        parse_sexpr(s, &OperatorSet::full(2)).unwrap()
    }

    #[test]
    fn single_tree_matrix() {
        let x = DataMatrix::column(&[1.0, 2.0]);
        for m in Measure::ALL {
            let d = distance_matrix(&[p("z1")], m, &x);
            assert_eq!(d.len(), 1);
            assert_eq!(d.get(0, 0), 0.0);
        }
    }

    #[test]
    fn ted_matrix_small() {
        let x = DataMatrix::column(&[1.0, 2.0]);
        let d = distance_matrix(&[p("z1"), p("(+ z1 z2)")], Measure::Ted, &x);
        assert_eq!(d.get(0, 1), 2.0);
        assert_eq!(d.get(1, 0), 2.0);
        assert_eq!(d.lower_triangle(), alloc::vec![2.0]);
    }

    #[test]
    fn prepared_matches_direct() {
        let x = DataMatrix::from_rows(&[alloc::vec![1.0, 0.5], alloc::vec![2.0, 1.5], alloc::vec![3.0, -1.0]]);
        let a = p("(+ (sin z1) (* c z2))");
        let b = p("(- z1 (cos z2))");
        let pa = PreparedTree::new(a.clone(), &x);
        let pb = PreparedTree::new(b.clone(), &x);
        let mut ws = TedWorkspace::default();
        assert_eq!(pa.triple(&pb, &mut ws), distance_triple(&a, &b, &x));
        assert_eq!(pa.triple(&pa, &mut ws), DistanceTriple::ZERO);
    }

    #[test]
    fn pair_cache_is_unordered() {
        let mut cache = PairCache::default();
        let t = DistanceTriple { shd2: 0.5, phd: 0.1, ted: 3.0 };
        cache.get_or_insert_with(3, 1, || t);
        assert_eq!(cache.get(1, 3), Some(t));
        let again = cache.get_or_insert_with(1, 3, || unreachable!());
        assert_eq!(again, t);
        assert_eq!(cache.len(), 1);
    }
}
