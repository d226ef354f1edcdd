//! Expression trees: the genotype shared by every other module.

mod eval;
mod generate;
mod sexpr;
mod variation;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use eval::{evaluate, CompiledExpr, DataMatrix, Infeasible};
pub use generate::{ramped_half_and_half, random_leaf, random_tree, GeneratorParams, GrowMode};
pub use sexpr::{format_sexpr, parse_sexpr, ParseError, ParseErrorKind};
pub use variation::{crossover_subtree, crossover_subtree_capped, mutate_subtree, MutationParams};

/// Operator vocabulary. Each problem selects a subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    Sin,
    Cos,
    Exp,
    Log,
}

impl Op {
    pub const ALL: [Op; 9] = [
        Op::Add,
        Op::Sub,
        Op::Mul,
        Op::Div,
        Op::Sqrt,
        Op::Sin,
        Op::Cos,
        Op::Exp,
        Op::Log,
    ];

    pub fn arity(self) -> usize {
        match self {
            Op::Add | Op::Sub | Op::Mul | Op::Div => 2,
            Op::Sqrt | Op::Sin | Op::Cos | Op::Exp | Op::Log => 1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Div => "/",
            Op::Sqrt => "sqrt",
            Op::Sin => "sin",
            Op::Cos => "cos",
            Op::Exp => "exp",
            Op::Log => "log",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Op> {
        Op::ALL.iter().copied().find(|op| op.symbol() == s)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl TryFrom<String> for Op {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Op::from_symbol(&s).ok_or_else(|| alloc::format!("unknown operator `{s}`"))
    }
}

impl From<Op> for String {
    fn from(op: Op) -> String {
        String::from(op.symbol())
    }
}

/// Node label. Constants are anonymous: their identity is their pre-order
/// position among the constant leaves of a tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeLabel {
    Op(Op),
    /// 1-based variable index.
    Var(u16),
    Const,
}

impl NodeLabel {
    pub fn arity(self) -> usize {
        match self {
            NodeLabel::Op(op) => op.arity(),
            NodeLabel::Var(_) | NodeLabel::Const => 0,
        }
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeLabel::Op(op) => write!(f, "{op}"),
            NodeLabel::Var(i) => write!(f, "z{i}"),
            NodeLabel::Const => f.write_str("c"),
        }
    }
}

/// Ordered labeled tree. The number of children always equals the label's arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExprTree {
    label: NodeLabel,
    children: Vec<ExprTree>,
}

impl ExprTree {
    /// Builds a node, panicking if `children.len()` does not match the arity.
    pub fn node(label: NodeLabel, children: Vec<ExprTree>) -> Self {
        assert_eq!(
            children.len(),
            label.arity(),
            "arity mismatch for `{label}`"
        );
        ExprTree { label, children }
    }

    pub fn var(index: u16) -> Self {
        assert!(index >= 1, "variable indices are 1-based");
        ExprTree { label: NodeLabel::Var(index), children: Vec::new() }
    }

    pub fn constant() -> Self {
        ExprTree { label: NodeLabel::Const, children: Vec::new() }
    }

    pub fn unary(op: Op, child: ExprTree) -> Self {
        Self::node(NodeLabel::Op(op), alloc::vec![child])
    }

    pub fn binary(op: Op, left: ExprTree, right: ExprTree) -> Self {
        Self::node(NodeLabel::Op(op), alloc::vec![left, right])
    }

    pub fn label(&self) -> NodeLabel {
        self.label
    }

    pub fn children(&self) -> &[ExprTree] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.children.len()
    }

    /// Leaf → 1, internal node → 1 + deepest child.
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(ExprTree::depth).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ExprTree::node_count).sum::<usize>()
    }

    /// Number of constant leaves `d_c`, which is the lower-level dimension.
    pub fn count_constants(&self) -> usize {
        match self.label {
            NodeLabel::Const => 1,
            _ => self.children.iter().map(ExprTree::count_constants).sum(),
        }
    }

    /// Largest variable index referenced (0 when the tree has no variables).
    pub fn max_var_index(&self) -> usize {
        let own = match self.label {
            NodeLabel::Var(i) => i as usize,
            _ => 0,
        };
        self.children.iter().map(ExprTree::max_var_index).fold(own, usize::max)
    }

    /// Labels in pre-order.
    pub fn preorder_labels(&self) -> Vec<NodeLabel> {
        let mut out = Vec::with_capacity(self.node_count());
        self.visit_preorder(&mut |t| out.push(t.label));
        out
    }

    pub fn visit_preorder<'a>(&'a self, f: &mut impl FnMut(&'a ExprTree)) {
        f(self);
        for c in &self.children {
            c.visit_preorder(f);
        }
    }

    /// Subtree at pre-order position `index`.
    pub fn subtree(&self, index: usize) -> Option<&ExprTree> {
        let mut remaining = index;
        self.find_preorder(&mut remaining)
    }

    fn find_preorder(&self, remaining: &mut usize) -> Option<&ExprTree> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        for c in &self.children {
            if let Some(t) = c.find_preorder(remaining) {
                return Some(t);
            }
        }
        None
    }

    /// Mutable subtree at pre-order position `index`.
    pub fn subtree_mut(&mut self, index: usize) -> Option<&mut ExprTree> {
        let mut remaining = index;
        self.find_preorder_mut(&mut remaining)
    }

    fn find_preorder_mut(&mut self, remaining: &mut usize) -> Option<&mut ExprTree> {
        if *remaining == 0 {
            return Some(self);
        }
        *remaining -= 1;
        for c in &mut self.children {
            if let Some(t) = c.find_preorder_mut(remaining) {
                return Some(t);
            }
        }
        None
    }

    /// Depth (1-based) of the node at pre-order position `index`.
    pub fn level_of(&self, index: usize) -> Option<usize> {
        fn walk(t: &ExprTree, remaining: &mut usize, level: usize) -> Option<usize> {
            if *remaining == 0 {
                return Some(level);
            }
            *remaining -= 1;
            t.children.iter().find_map(|c| walk(c, remaining, level + 1))
        }
        let mut remaining = index;
        walk(self, &mut remaining, 1)
    }

    /// True when every node has exactly as many children as its label's arity
    /// and, if given, every operator and variable is allowed by `ops`.
    pub fn is_consistent(&self, ops: Option<&OperatorSet>) -> bool {
        if self.children.len() != self.label.arity() {
            return false;
        }
        if let Some(set) = ops {
            match self.label {
                NodeLabel::Op(op) if !set.contains(op) => return false,
                NodeLabel::Var(i) if i == 0 || i as usize > set.n_vars => return false,
                NodeLabel::Const if !set.constants => return false,
                _ => {}
            }
        }
        self.children.iter().all(|c| c.is_consistent(ops))
    }
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        sexpr::write_sexpr(self, f)
    }
}

/// Operators, variable count and whether constant leaves may be generated.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OperatorSetRepr", into = "OperatorSetRepr")]
pub struct OperatorSet {
    ops: Vec<Op>,
    n_vars: usize,
    constants: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OperatorSetError {
    DuplicateOperator(Op),
    NoTerminals,
    NoOperators,
}

impl fmt::Display for OperatorSetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorSetError::DuplicateOperator(op) => write!(f, "operator `{op}` listed twice"),
            OperatorSetError::NoTerminals => f.write_str("operator set has neither variables nor constants"),
            OperatorSetError::NoOperators => f.write_str("operator set has no operators"),
        }
    }
}

impl core::error::Error for OperatorSetError {}

impl OperatorSet {
    pub fn new(ops: Vec<Op>, n_vars: usize, constants: bool) -> Result<Self, OperatorSetError> {
        for (i, op) in ops.iter().enumerate() {
            if ops[..i].contains(op) {
                return Err(OperatorSetError::DuplicateOperator(*op));
            }
        }
        if ops.is_empty() {
            return Err(OperatorSetError::NoOperators);
        }
        if n_vars == 0 && !constants {
            return Err(OperatorSetError::NoTerminals);
        }
        Ok(OperatorSet { ops, n_vars, constants })
    }

    /// Full vocabulary over `n_vars` variables with constants.
    pub fn full(n_vars: usize) -> Self {
        OperatorSet { ops: Op::ALL.to_vec(), n_vars, constants: true }
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constants_allowed(&self) -> bool {
        self.constants
    }

    pub fn contains(&self, op: Op) -> bool {
        self.ops.contains(&op)
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorSetRepr {
    ops: Vec<Op>,
    n_vars: usize,
    constants: bool,
}

impl TryFrom<OperatorSetRepr> for OperatorSet {
    type Error = OperatorSetError;

    fn try_from(r: OperatorSetRepr) -> Result<Self, Self::Error> {
        OperatorSet::new(r.ops, r.n_vars, r.constants)
    }
}

impl From<OperatorSet> for OperatorSetRepr {
    fn from(s: OperatorSet) -> Self {
        OperatorSetRepr { ops: s.ops, n_vars: s.n_vars, constants: s.constants }
    }
}
