use alloc::vec::Vec;

use crate::expr::{evaluate, DataMatrix, ExprTree};
use crate::math;

/// Standardized output of a tree with every constant set to one, or `None`
/// when that output is infeasible or has zero variance.
pub type Phenotype = Option<Vec<f64>>;

pub fn phenotype(tree: &ExprTree, x: &DataMatrix) -> Phenotype {
    let ones = alloc::vec![1.0; tree.count_constants()];
    let out = evaluate(tree, x, &ones).ok()?;
    math::standardize(&out)
}

/// `1 - |cor|` between two phenotypes; 1 if either is undefined.
///
/// Does not apply the identity short-circuit; callers compare trees first.
pub fn phd_from_phenotypes(a: &Phenotype, b: &Phenotype) -> f64 {
    match (a, b) {
        (Some(a), Some(b)) => (1.0 - math::dot(a, b).abs()).clamp(0.0, 1.0),
        _ => 1.0,
    }
}

/// Phenotypic distance: `1 - |cor(ŷ(x, 1), ŷ(x', 1))|`.
///
/// Structurally equal trees are at distance 0 even when infeasible; otherwise
/// an infeasible or constant output puts the pair at distance 1.
pub fn phd(a: &ExprTree, b: &ExprTree, x: &DataMatrix) -> f64 {
    if a == b {
        return 0.0;
    }
    phd_from_phenotypes(&phenotype(a, x), &phenotype(b, x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_sexpr, OperatorSet};

    fn p(s: &str) -> ExprTree {
        parse_sexpr(s, &OperatorSet::full(2)).unwrap()
    }

    #[test]
    fn identity_short_circuit() {
        let x = DataMatrix::column(&[1.0, 2.0, 3.0]);
        let t = p("(sin z1)");
        assert_eq!(phd(&t, &t, &x), 0.0);
        // infeasible, still zero against itself
        let bad = p("(sqrt (- c z1))");
        assert_eq!(phd(&bad, &bad, &x), 0.0);
    }

    #[test]
    fn anti_correlated_is_zero() {
        let x = DataMatrix::column(&[0.0, 0.5, 2.0, 3.0]);
        assert!(phd(&p("z1"), &p("(- c z1)"), &x) < 1e-15);
    }

    #[test]
    fn infeasible_is_one() {
        let x = DataMatrix::column(&[0.0, 2.0, 3.0]);
        let bad = p("(sqrt (- c z1))");
        for other in ["z1", "(sin z1)", "(* z1 z1)", "c"] {
            assert_eq!(phd(&bad, &p(other), &x), 1.0);
        }
    }

    #[test]
    fn zero_variance_is_one() {
        let x = DataMatrix::column(&[0.0, 2.0, 3.0]);
        assert_eq!(phd(&p("c"), &p("z1"), &x), 1.0);
        assert_eq!(phd(&p("(- z1 z1)"), &p("z1"), &x), 1.0);
    }
}
