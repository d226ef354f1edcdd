//! Surrogate-model-based optimization over expression trees.
//!
//! The crate is `no_std` (with `alloc`) and contains every algorithmic piece:
//!
//! - [`expr`]: expression trees, evaluation, s-expression text, random
//!   generation and the subtree variation operators.
//! - [`distance`]: phenotypic distance, tree edit distance and the two
//!   structural Hamming distances, plus distance matrices.
//! - [`kriging`]: ordinary Kriging with an exponential kernel over a weighted
//!   sum of three tree distances, maximum-likelihood fitting and expected
//!   improvement.
//! - [`optim`]: locally biased DIRECT and bounded Nelder-Mead.
//! - [`problem`]: the symbolic-regression benchmarks and the bi-level fitness.
//! - [`search`]: random search, a (μ+λ) EA and the surrogate-driven loop.
//! - [`stats`]: Kruskal-Wallis rank-sum test.
//!
//! File formats, the experiment harness and the CLI live in the `gpsmbo`
//! companion crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod distance;
pub mod expr;
pub mod kriging;
pub mod math;
pub mod optim;
pub mod problem;
pub mod search;
pub mod seed;
pub mod stats;

pub use distance::{DistanceMatrix, DistanceTriple, Measure};
pub use expr::{ExprTree, NodeLabel, Op, OperatorSet};
pub use kriging::{KernelWeights, KrigingModel, Prediction};
pub use optim::{BoxBounds, OptResult};
pub use problem::{Dataset, ProblemInstance, ProblemSpec, UpperEvaluation};
pub use search::{RunRecord, SearchBudget, Strategy};
