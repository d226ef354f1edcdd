//! Symbolic-regression benchmarks and the bi-level fitness.

mod builtin;
mod fitness;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::expr::{parse_sexpr, CompiledExpr, DataMatrix, OperatorSet, ParseError};
use crate::math;

pub use builtin::BuiltinTarget;
pub use fitness::{evaluate_upper, evaluate_upper_with, lower_fitness, LowerLevelBudget, UpperEvaluation};

/// Closed-form target: a built-in benchmark function or an expression with
/// fixed constant values (in pre-order).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Builtin(BuiltinTarget),
    Expr { sexpr: String, constants: Vec<f64> },
}

/// One benchmark instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub target: Target,
    pub n_vars: usize,
    /// `(lower, upper)` per variable.
    pub var_bounds: Vec<(f64, f64)>,
    pub n_data: usize,
    pub ops: OperatorSet,
    pub dataset_seed: u64,
    /// Box for every constant of the lower level.
    pub const_bounds: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemError {
    UnknownProblem(String),
    TooFewPoints(usize),
    BoundsMismatch { n_vars: usize, bounds: usize },
    BadBounds { dim: usize },
    BadConstantBounds,
    OperatorSetVariables { n_vars: usize, ops_vars: usize },
    Target(ParseError),
    TargetConstants { expected: usize, found: usize },
    /// The target stayed non-finite after repeated resampling.
    TargetUndefined { attempts: usize },
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProblemError::UnknownProblem(n) => write!(f, "unknown problem `{n}`"),
            ProblemError::TooFewPoints(n) => write!(f, "dataset needs at least 2 points, got {n}"),
            ProblemError::BoundsMismatch { n_vars, bounds } => {
                write!(f, "{n_vars} variables but {bounds} bound pairs")
            }
            ProblemError::BadBounds { dim } => write!(f, "variable bounds not ordered for z{}", dim + 1),
            ProblemError::BadConstantBounds => f.write_str("constant bounds not ordered"),
            ProblemError::OperatorSetVariables { n_vars, ops_vars } => {
                write!(f, "problem has {n_vars} variables but operator set declares {ops_vars}")
            }
            ProblemError::Target(e) => write!(f, "target expression: {e}"),
            ProblemError::TargetConstants { expected, found } => {
                write!(f, "target expression has {expected} constants, {found} values given")
            }
            ProblemError::TargetUndefined { attempts } => {
                write!(f, "target undefined at {attempts} consecutive sampled points")
            }
        }
    }
}

impl core::error::Error for ProblemError {}

/// Inputs and target values; `y` is what every candidate is correlated against.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: DataMatrix,
    pub y: Vec<f64>,
    y_standardized: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(x: DataMatrix, y: Vec<f64>) -> Self {
        assert_eq!(x.rows(), y.len(), "one target value per row");
        let y_standardized = math::standardize(&y);
        Dataset { x, y, y_standardized }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub(crate) fn y_standardized(&self) -> Option<&[f64]> {
        self.y_standardized.as_deref()
    }
}

enum TargetFn {
    Builtin(BuiltinTarget),
    Expr(CompiledExpr, Vec<f64>),
}

impl ProblemSpec {
    /// Built-in benchmark by name (see [`BuiltinTarget::name`]).
    pub fn builtin(name: &str) -> Result<Self, ProblemError> {
        BuiltinTarget::from_name(name)
            .map(BuiltinTarget::default_spec)
            .ok_or_else(|| ProblemError::UnknownProblem(String::from(name)))
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        self.compile_target().map(|_| ())
    }

    fn compile_target(&self) -> Result<TargetFn, ProblemError> {
        if self.n_data < 2 {
            return Err(ProblemError::TooFewPoints(self.n_data));
        }
        if self.var_bounds.len() != self.n_vars {
            return Err(ProblemError::BoundsMismatch { n_vars: self.n_vars, bounds: self.var_bounds.len() });
        }
        for (i, (l, u)) in self.var_bounds.iter().enumerate() {
            if !(l < u) || !l.is_finite() || !u.is_finite() {
                return Err(ProblemError::BadBounds { dim: i });
            }
        }
        let (cl, cu) = self.const_bounds;
        if !(cl < cu) || !cl.is_finite() || !cu.is_finite() {
            return Err(ProblemError::BadConstantBounds);
        }
        if self.ops.n_vars() != self.n_vars {
            return Err(ProblemError::OperatorSetVariables { n_vars: self.n_vars, ops_vars: self.ops.n_vars() });
        }
        match &self.target {
            Target::Builtin(b) => Ok(TargetFn::Builtin(*b)),
            Target::Expr { sexpr, constants } => {
                let tree = parse_sexpr(sexpr, &OperatorSet::full(self.n_vars)).map_err(ProblemError::Target)?;
                let compiled = CompiledExpr::new(&tree);
                if compiled.n_constants() != constants.len() {
                    return Err(ProblemError::TargetConstants {
                        expected: compiled.n_constants(),
                        found: constants.len(),
                    });
                }
                Ok(TargetFn::Expr(compiled, constants.clone()))
            }
        }
    }

    /// Seeded uniform sample of the variable box with target values.
    pub fn make_dataset(&self) -> Result<Dataset, ProblemError> {
        const MAX_ATTEMPTS: usize = 1000;
        let target = self.compile_target()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.dataset_seed);
        let mut data = Vec::with_capacity(self.n_data * self.n_vars);
        let mut y = Vec::with_capacity(self.n_data);
        let mut point = alloc::vec![0.0; self.n_vars];
        for _ in 0..self.n_data {
            let mut attempts = 0;
            let value = loop {
                for (p, (l, u)) in point.iter_mut().zip(&self.var_bounds) {
                    *p = l + rng.gen::<f64>() * (u - l);
                }
                let v = match &target {
                    TargetFn::Builtin(b) => b.eval(&point),
                    TargetFn::Expr(e, c) => e
                        .eval(&DataMatrix::new(1, self.n_vars, point.clone()), c)
                        .map(|v| v[0])
                        .unwrap_or(f64::NAN),
                };
                if v.is_finite() {
                    break v;
                }
                attempts += 1;
                if attempts >= MAX_ATTEMPTS {
                    return Err(ProblemError::TargetUndefined { attempts });
                }
            };
            data.extend_from_slice(&point);
            y.push(value);
        }
        Ok(Dataset::new(DataMatrix::new(self.n_data, self.n_vars, data), y))
    }
}

/// A problem specification with its materialized dataset.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    pub spec: ProblemSpec,
    pub data: Dataset,
}

impl ProblemInstance {
    pub fn new(spec: ProblemSpec) -> Result<Self, ProblemError> {
        let data = spec.make_dataset()?;
        Ok(ProblemInstance { spec, data })
    }

    pub fn builtin(name: &str) -> Result<Self, ProblemError> {
        Self::new(ProblemSpec::builtin(name)?)
    }
}
