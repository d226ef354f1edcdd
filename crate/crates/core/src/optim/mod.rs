//! Box-constrained derivative-free minimizers.

mod direct;
mod nelder_mead;

use alloc::vec::Vec;
use core::fmt;

pub use direct::direct_minimize;
pub use nelder_mead::{nelder_mead, nelder_mead_with, NelderMeadOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct BoxBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundsError {
    LengthMismatch,
    Empty,
    NotOrdered { dim: usize },
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::LengthMismatch => f.write_str("lower and upper bounds differ in length"),
            BoundsError::Empty => f.write_str("bounds have zero dimensions"),
            BoundsError::NotOrdered { dim } => write!(f, "lower bound not below upper bound in dimension {dim}"),
        }
    }
}

impl core::error::Error for BoundsError {}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, BoundsError> {
        if lower.len() != upper.len() {
            return Err(BoundsError::LengthMismatch);
        }
        if lower.is_empty() {
            return Err(BoundsError::Empty);
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l < u) || !l.is_finite() || !u.is_finite() {
                return Err(BoundsError::NotOrdered { dim: i });
            }
        }
        Ok(BoxBounds { lower, upper })
    }

    /// The same interval repeated `dim` times.
    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self, BoundsError> {
        Self::new(alloc::vec![lower; dim], alloc::vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// Best point found, its value and the number of objective evaluations used.
#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Objective wrapper enforcing the evaluation budget and tracking the incumbent.
struct Counted<F> {
    f: F,
    evals: usize,
    max_evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn new(f: F, max_evals: usize) -> Self {
        Counted { f, evals: 0, max_evals, best_x: Vec::new(), best_f: f64::INFINITY }
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.max_evals
    }

    /// `None` once the budget is spent. NaN values are treated as +∞.
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.exhausted() {
            return None;
        }
        self.evals += 1;
        let mut v = (self.f)(x);
        if v.is_nan() {
            v = f64::INFINITY;
        }
        if v < self.best_f || self.best_x.is_empty() {
            self.best_f = v;
            self.best_x = x.to_vec();
        }
        Some(v)
    }

    fn result(self) -> OptResult {
        OptResult { x: self.best_x, value: self.best_f, evaluations: self.evals }
    }
}
