use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::expr::{CompiledExpr, ExprTree};
use crate::math;
use crate::optim::{direct_minimize, nelder_mead_with, BoxBounds, NelderMeadOptions};

/// Lower-level evaluations per constant for each stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LowerLevelBudget {
    pub direct_per_constant: usize,
    pub nelder_mead_per_constant: usize,
}

impl Default for LowerLevelBudget {
    fn default() -> Self {
        LowerLevelBudget { direct_per_constant: 1000, nelder_mead_per_constant: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperEvaluation {
    pub tree: ExprTree,
    /// Upper-level fitness in `[0, 1]`.
    pub fitness: f64,
    pub constants: Vec<f64>,
    pub lower_evals: usize,
    /// Whether any tried constant vector produced a defined correlation.
    pub feasible: bool,
}

struct LowerObjective<'a> {
    expr: CompiledExpr,
    data: &'a Dataset,
    out: Vec<f64>,
}

impl<'a> LowerObjective<'a> {
    fn new(tree: &ExprTree, data: &'a Dataset) -> Self {
        LowerObjective { expr: CompiledExpr::new(tree), data, out: Vec::with_capacity(data.len()) }
    }

    /// `None` marks the penalty case.
    fn eval(&mut self, c: &[f64]) -> Option<f64> {
        let y = self.data.y_standardized()?;
        self.expr.eval_into(&self.data.x, c, &mut self.out).ok()?;
        let s = math::standardize(&self.out)?;
        let r = math::dot(&s, y).clamp(-1.0, 1.0);
        Some((1.0 - r.abs()).clamp(0.0, 1.0))
    }
}

/// `1 − |cor(ŷ, y)|`, or 1 for infeasible and constant outputs.
pub fn lower_fitness(tree: &ExprTree, c: &[f64], data: &Dataset) -> f64 {
    LowerObjective::new(tree, data).eval(c).unwrap_or(1.0)
}

pub fn evaluate_upper(tree: &ExprTree, data: &Dataset, const_bounds: (f64, f64)) -> UpperEvaluation {
    evaluate_upper_with(tree, data, const_bounds, &LowerLevelBudget::default())
}

/// Upper-level fitness: constants are chosen by DIRECT followed by a
/// Nelder-Mead polish started at the DIRECT incumbent.
pub fn evaluate_upper_with(
    tree: &ExprTree,
    data: &Dataset,
    const_bounds: (f64, f64),
    budget: &LowerLevelBudget,
) -> UpperEvaluation {
    let mut obj = LowerObjective::new(tree, data);
    let d_c = obj.expr.n_constants();
    if d_c == 0 {
        let value = obj.eval(&[]);
        return UpperEvaluation {
            tree: tree.clone(),
            fitness: value.unwrap_or(1.0),
            constants: Vec::new(),
            lower_evals: 0,
            feasible: value.is_some(),
        };
    }

    let bounds = BoxBounds::uniform(d_c, const_bounds.0, const_bounds.1).expect("constant bounds are validated");
    let mut feasible = false;
    let mut f = |c: &[f64]| match obj.eval(c) {
        Some(v) => {
            feasible = true;
            v
        }
        None => 1.0,
    };
    let global = direct_minimize(&mut f, &bounds, budget.direct_per_constant * d_c);
    // A zero diameter tolerance keeps the local stage on its full budget.
    let opts = NelderMeadOptions {
        max_evals: budget.nelder_mead_per_constant * d_c,
        min_diameter: 0.0,
        ..Default::default()
    };
    let local = nelder_mead_with(&mut f, &global.x, &bounds, &opts);
    let best = if local.value < global.value { local.clone() } else { global.clone() };
    UpperEvaluation {
        tree: tree.clone(),
        fitness: best.value.clamp(0.0, 1.0),
        constants: best.x,
        lower_evals: global.evaluations + local.evaluations,
        feasible,
    }
}
