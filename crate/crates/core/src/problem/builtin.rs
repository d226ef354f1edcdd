use alloc::string::String;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ProblemSpec, Target};
use crate::expr::{Op, OperatorSet};
use crate::math::{cos, exp, ln, sin};

/// The six benchmark functions. Configurations follow common literature
/// defaults and can be replaced by spec files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinTarget {
    #[serde(rename = "kotanchek2d")]
    Kotanchek2D,
    #[serde(rename = "salustowicz1d")]
    Salustowicz1D,
    #[serde(rename = "newton")]
    Newton,
    #[serde(rename = "sine-cosine")]
    SineCosine,
    #[serde(rename = "sqr")]
    Sqr,
    #[serde(rename = "sqr+log")]
    SqrLog,
}

impl BuiltinTarget {
    pub const ALL: [BuiltinTarget; 6] = [
        BuiltinTarget::Newton,
        BuiltinTarget::SineCosine,
        BuiltinTarget::Kotanchek2D,
        BuiltinTarget::Salustowicz1D,
        BuiltinTarget::Sqr,
        BuiltinTarget::SqrLog,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinTarget::Kotanchek2D => "kotanchek2d",
            BuiltinTarget::Salustowicz1D => "salustowicz1d",
            BuiltinTarget::Newton => "newton",
            BuiltinTarget::SineCosine => "sine-cosine",
            BuiltinTarget::Sqr => "sqr",
            BuiltinTarget::SqrLog => "sqr+log",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|b| b.name().eq_ignore_ascii_case(name))
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            BuiltinTarget::Kotanchek2D => {
                let (a, b) = (x[0] - 1.0, x[1] - 2.5);
                exp(-a * a) / (1.2 + b * b)
            }
            BuiltinTarget::Salustowicz1D => {
                let t = x[0];
                let (s, c) = (sin(t), cos(t));
                t * t * t * exp(-t) * c * s * (s * s * c - 1.0)
            }
            BuiltinTarget::Newton => x[0] * x[1] / (x[2] * x[2]),
            BuiltinTarget::SineCosine => 6.0 * sin(x[0]) * cos(x[0]),
            BuiltinTarget::Sqr => x[0] * x[0],
            BuiltinTarget::SqrLog => x[0] * x[0] + ln(x[0]),
        }
    }

    pub fn default_spec(self) -> ProblemSpec {
        use Op::*;
        let (n_vars, bounds, n_data, ops): (usize, alloc::vec::Vec<(f64, f64)>, usize, &[Op]) = match self {
            BuiltinTarget::Kotanchek2D => (2, alloc::vec![(0.3, 4.0); 2], 100, &[Add, Sub, Mul, Div, Sqrt]),
            BuiltinTarget::Salustowicz1D => (1, alloc::vec![(0.0, 10.0)], 100, &[Add, Sub, Mul, Div, Sin, Cos]),
            BuiltinTarget::Newton => {
                (3, alloc::vec![(1.0, 10.0), (1.0, 10.0), (0.5, 2.0)], 100, &[Add, Sub, Mul, Div, Sqrt])
            }
            BuiltinTarget::SineCosine => (1, alloc::vec![(-PI, PI)], 100, &[Add, Sub, Mul, Div, Sin, Cos]),
            BuiltinTarget::Sqr => (1, alloc::vec![(-1.0, 1.0)], 20, &[Add, Sub, Mul, Div, Log]),
            BuiltinTarget::SqrLog => (1, alloc::vec![(0.1, 2.0)], 20, &[Add, Sub, Mul, Div, Log]),
        };
        ProblemSpec {
            name: String::from(self.name()),
            target: Target::Builtin(self),
            n_vars,
            var_bounds: bounds,
            n_data,
            ops: OperatorSet::new(ops.to_vec(), n_vars, true).expect("builtin operator sets are valid"),
            dataset_seed: 42,
            const_bounds: (-10.0, 10.0),
        }
    }
}
