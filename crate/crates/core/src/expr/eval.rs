use alloc::vec::Vec;
use core::fmt;

use super::{ExprTree, NodeLabel, Op};
use crate::math;

/// Row-major `n × v` input matrix; column `j` holds variable `z{j+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must equal rows * cols");
        DataMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        DataMatrix { rows: rows.len(), cols, data }
    }

    /// Single-variable matrix from one column of values.
    pub fn column(values: &[f64]) -> Self {
        DataMatrix { rows: values.len(), cols: 1, data: values.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column_values(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// The evaluation hit a domain violation or produced a non-finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Infeasible;

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expression is infeasible on the data")
    }
}

impl core::error::Error for Infeasible {}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Instr {
    Var(usize),
    Const(usize),
    Op(Op),
}

/// Postfix form of a tree, for repeated evaluation with different constants.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledExpr {
    code: Vec<Instr>,
    n_constants: usize,
    max_var: usize,
    stack_depth: usize,
}

impl CompiledExpr {
    pub fn new(tree: &ExprTree) -> Self {
        let mut code = Vec::with_capacity(tree.node_count());
        let mut n_constants = 0;
        emit(tree, &mut code, &mut n_constants);
        let mut depth = 0usize;
        let mut stack_depth = 0usize;
        for ins in &code {
            match ins {
                Instr::Var(_) | Instr::Const(_) => depth += 1,
                Instr::Op(op) => depth = depth + 1 - op.arity(),
            }
            stack_depth = stack_depth.max(depth);
        }
        CompiledExpr { code, n_constants, max_var: tree.max_var_index(), stack_depth }
    }

    pub fn n_constants(&self) -> usize {
        self.n_constants
    }

    /// Evaluates every row into `out` (cleared first).
    pub fn eval_into(&self, x: &DataMatrix, c: &[f64], out: &mut Vec<f64>) -> Result<(), Infeasible> {
        assert_eq!(c.len(), self.n_constants, "constant vector length must equal d_c");
        assert!(x.cols() >= self.max_var, "data matrix has too few columns");
        out.clear();
        out.reserve(x.rows());
        let mut stack: Vec<f64> = Vec::with_capacity(self.stack_depth);
        for i in 0..x.rows() {
            let row = x.row(i);
            stack.clear();
            for ins in &self.code {
                let v = match *ins {
                    Instr::Var(j) => row[j],
                    Instr::Const(k) => c[k],
                    Instr::Op(op) => {
                        if op.arity() == 2 {
                            let b = stack.pop().unwrap();
                            let a = stack.pop().unwrap();
                            apply_binary(op, a, b)?
                        } else {
                            let a = stack.pop().unwrap();
                            apply_unary(op, a)?
                        }
                    }
                };
                if !v.is_finite() {
                    return Err(Infeasible);
                }
                stack.push(v);
            }
            out.push(stack[0]);
        }
        Ok(())
    }

    pub fn eval(&self, x: &DataMatrix, c: &[f64]) -> Result<Vec<f64>, Infeasible> {
        let mut out = Vec::new();
        self.eval_into(x, c, &mut out)?;
        Ok(out)
    }
}

fn emit(t: &ExprTree, code: &mut Vec<Instr>, n_constants: &mut usize) {
    for c in t.children() {
        emit(c, code, n_constants);
    }
    code.push(match t.label() {
        NodeLabel::Var(i) => Instr::Var(i as usize - 1),
        NodeLabel::Const => {
            // Children are emitted before parents, but constants are leaves and
            // leaves are emitted in left-to-right order, which matches pre-order.
            *n_constants += 1;
            Instr::Const(*n_constants - 1)
        }
        NodeLabel::Op(op) => Instr::Op(op),
    });
}

#[inline]
fn apply_binary(op: Op, a: f64, b: f64) -> Result<f64, Infeasible> {
    Ok(match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Mul => a * b,
        Op::Div => {
            if b == 0.0 {
                return Err(Infeasible);
            }
            a / b
        }
        _ => unreachable!("unary operator in binary position"),
    })
}

#[inline]
fn apply_unary(op: Op, a: f64) -> Result<f64, Infeasible> {
    Ok(match op {
        Op::Sqrt => {
            if a < 0.0 {
                return Err(Infeasible);
            }
            math::sqrt(a)
        }
        Op::Log => {
            if a <= 0.0 {
                return Err(Infeasible);
            }
            math::ln(a)
        }
        Op::Sin => math::sin(a),
        Op::Cos => math::cos(a),
        Op::Exp => math::exp(a),
        _ => unreachable!("binary operator in unary position"),
    })
}

/// Row-wise evaluation; constant leaves take `c` in pre-order position order.
pub fn evaluate(tree: &ExprTree, x: &DataMatrix, c: &[f64]) -> Result<Vec<f64>, Infeasible> {
    CompiledExpr::new(tree).eval(x, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_sexpr;
    use crate::expr::OperatorSet;
    use alloc::vec;

    fn p(s: &str) -> ExprTree {
        parse_sexpr(s, &OperatorSet::full(3)).unwrap()
    }

    #[test]
    fn addition() {
        let x = DataMatrix::from_rows(&[vec![1.0, 2.0]]);
        assert_eq!(evaluate(&p("(+ z1 z2)"), &x, &[]).unwrap(), vec![3.0]);
    }

    #[test]
    fn fig1_negative_sqrt_is_infeasible() {
        let x = DataMatrix::from_rows(&[vec![2.0, 3.0]]);
        let t = p("(+ (sqrt (- c z2)) (* z1 c))");
        assert_eq!(evaluate(&t, &x, &[1.0, 1.0]), Err(Infeasible));
    }

    #[test]
    fn constants_follow_preorder() {
        let x = DataMatrix::from_rows(&[vec![2.0, 3.0]]);
        let t = p("(+ (sqrt (- c z2)) (* z1 c))");
        // sqrt(12 - 3) + 2 * 5
        assert_eq!(evaluate(&t, &x, &[12.0, 5.0]).unwrap(), vec![13.0]);
        let t = p("(- c c)");
        assert_eq!(evaluate(&t, &x, &[10.0, 4.0]).unwrap(), vec![6.0]);
    }

    #[test]
    fn scaling() {
        let x = DataMatrix::column(&[1.0, 2.0, 3.0]);
        assert_eq!(evaluate(&p("(* z1 c)"), &x, &[2.0]).unwrap(), vec![2.0, 4.0, 6.0]);
    }

    #[test]
    fn domain_violations() {
        let x = DataMatrix::column(&[0.0, 1.0]);
        assert_eq!(evaluate(&p("(/ c z1)"), &x, &[1.0]), Err(Infeasible));
        assert_eq!(evaluate(&p("(log z1)"), &x, &[]), Err(Infeasible));
        let big = DataMatrix::column(&[800.0]);
        assert_eq!(evaluate(&p("(exp z1)"), &big, &[]), Err(Infeasible));
        assert!(evaluate(&p("(sqrt z1)"), &x, &[]).is_ok());
    }
}
