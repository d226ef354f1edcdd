use crate::expr::ExprTree;

#[inline]
fn hd(a: &ExprTree, b: &ExprTree) -> f64 {
    if a.label() == b.label() {
        0.0
    } else {
        1.0
    }
}

/// Structural Hamming distance with the fixed left-to-right child alignment.
pub fn shd1(a: &ExprTree, b: &ExprTree) -> f64 {
    let m = a.arity();
    if m != b.arity() {
        return 1.0;
    }
    if m == 0 {
        return hd(a, b);
    }
    let sum: f64 = a.children().iter().zip(b.children()).map(|(x, y)| shd1(x, y)).sum();
    (hd(a, b) + sum) / (m as f64 + 1.0)
}

/// Structural Hamming distance taking the cheaper of the two child alignments
/// at binary nodes. Arities above two fall back to the fixed alignment.
pub fn shd2(a: &ExprTree, b: &ExprTree) -> f64 {
    let m = a.arity();
    if m != b.arity() {
        return 1.0;
    }
    if m == 0 {
        return hd(a, b);
    }
    let (ca, cb) = (a.children(), b.children());
    let sum = if m == 2 {
        let straight = shd2(&ca[0], &cb[0]) + shd2(&ca[1], &cb[1]);
        let crossed = shd2(&ca[0], &cb[1]) + shd2(&ca[1], &cb[0]);
        straight.min(crossed)
    } else {
        ca.iter().zip(cb).map(|(x, y)| shd2(x, y)).sum()
    };
    (hd(a, b) + sum) / (m as f64 + 1.0)
}
