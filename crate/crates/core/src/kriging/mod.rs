//! Ordinary Kriging over expression trees.
//!
//! The kernel is `k(x, x') = exp(-β₁·SHD2 - β₂·PhD - β₃·TED)`. The weights and
//! a diagonal nugget are fitted by maximizing the concentrated likelihood with
//! DIRECT; the model then predicts a mean and a standard deviation for any
//! tree, from which the expected improvement follows.

mod ei;
pub mod linalg;
mod model;

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::distance::{DistanceTriple, PreparedTree, TedWorkspace};
use crate::math;

pub use ei::expected_improvement;
pub use model::{neg_concentrated_log_likelihood, KrigingModel, LikelihoodEval, ModelSummary, Prediction};

/// Kernel weights in the order `(SHD2, PhD, TED)` plus the diagonal nugget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelWeights {
    pub beta: [f64; 3],
    pub nugget: f64,
}

impl KernelWeights {
    /// Weights normalized to sum to one.
    pub fn normalized(&self) -> [f64; 3] {
        let s: f64 = self.beta.iter().sum();
        if s > 0.0 {
            [self.beta[0] / s, self.beta[1] / s, self.beta[2] / s]
        } else {
            [1.0 / 3.0; 3]
        }
    }
}

/// Correlation between two trees at distance `d`.
#[inline]
pub fn kernel(d: &DistanceTriple, w: &KernelWeights) -> f64 {
    math::exp(-(w.beta[0] * d.shd2 + w.beta[1] * d.phd + w.beta[2] * d.ted))
}

/// Index of each distance in the kernel weight vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelDistance {
    Shd2 = 0,
    Phd = 1,
    Ted = 2,
}

impl KernelDistance {
    pub const ALL: [KernelDistance; 3] = [KernelDistance::Shd2, KernelDistance::Phd, KernelDistance::Ted];

    pub fn name(self) -> &'static str {
        match self {
            KernelDistance::Shd2 => "shd2",
            KernelDistance::Phd => "phd",
            KernelDistance::Ted => "ted",
        }
    }
}

/// Which distances are active and where the likelihood is searched.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateConfig {
    /// Active flags in kernel order `(SHD2, PhD, TED)`; inactive weights stay 0.
    pub active: [bool; 3],
    pub log10_beta: (f64, f64),
    pub log10_nugget: (f64, f64),
    /// Likelihood evaluations granted to DIRECT.
    pub mle_evals: usize,
    /// Largest nugget tried when the kernel matrix is not positive definite.
    pub nugget_cap: f64,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig {
            active: [true; 3],
            log10_beta: (-4.0, 2.0),
            log10_nugget: (-8.0, -2.0),
            mle_evals: 1000,
            nugget_cap: 1.0,
        }
    }
}

impl SurrogateConfig {
    /// Kernel using only `which`.
    pub fn single(which: KernelDistance) -> Self {
        let mut active = [false; 3];
        active[which as usize] = true;
        SurrogateConfig { active, ..Default::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KrigingError {
    TooFewPoints(usize),
    LengthMismatch { trees: usize, values: usize },
    NoActiveDistance,
    /// The kernel matrix stayed indefinite up to the nugget cap.
    NotPositiveDefinite { nugget: f64 },
}

impl fmt::Display for KrigingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KrigingError::TooFewPoints(n) => write!(f, "need at least 2 training points, got {n}"),
            KrigingError::LengthMismatch { trees, values } => {
                write!(f, "{trees} training trees but {values} fitness values")
            }
            KrigingError::NoActiveDistance => f.write_str("no distance is active in the kernel"),
            KrigingError::NotPositiveDefinite { nugget } => {
                write!(f, "kernel matrix not positive definite even with nugget {nugget:e}")
            }
        }
    }
}

impl core::error::Error for KrigingError {}

/// Pairwise distance triples of a training set, as three row-major matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelDistances {
    n: usize,
    shd2: Vec<f64>,
    phd: Vec<f64>,
    ted: Vec<f64>,
}

impl KernelDistances {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> DistanceTriple) -> Self {
        let mut shd2 = alloc::vec![0.0; n * n];
        let mut phd = alloc::vec![0.0; n * n];
        let mut ted = alloc::vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = f(i, j);
                for (m, v) in [(&mut shd2, d.shd2), (&mut phd, d.phd), (&mut ted, d.ted)] {
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
            }
        }
        KernelDistances { n, shd2, phd, ted }
    }

    pub fn from_prepared(trees: &[PreparedTree]) -> Self {
        let mut ws = TedWorkspace::default();
        Self::from_fn(trees.len(), |i, j| trees[i].triple(&trees[j], &mut ws))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> DistanceTriple {
        let k = i * self.n + j;
        DistanceTriple { shd2: self.shd2[k], phd: self.phd[k], ted: self.ted[k] }
    }

    /// `K` with `K_ij = kernel(d_ij)` off the diagonal and `1 + η` on it.
    pub fn kernel_matrix(&self, w: &KernelWeights) -> Vec<f64> {
        let n = self.n;
        let mut k = alloc::vec![0.0; n * n];
        for i in 0..n {
            k[i * n + i] = 1.0 + w.nugget;
            for j in 0..i {
                let idx = i * n + j;
                let v = math::exp(-(w.beta[0] * self.shd2[idx] + w.beta[1] * self.phd[idx] + w.beta[2] * self.ted[idx]));
                k[idx] = v;
                k[j * n + i] = v;
            }
        }
        k
    }

    /// Same matrices with every distance scaled by `gamma`.
    pub fn scaled(&self, gamma: f64) -> Self {
        let s = |v: &Vec<f64>| v.iter().map(|x| x * gamma).collect();
        KernelDistances { n: self.n, shd2: s(&self.shd2), phd: s(&self.phd), ted: s(&self.ted) }
    }
}
