//! Rank statistics.

use alloc::vec::Vec;
use core::fmt;

use crate::math;

/// Ranks starting at 1 with ties given the mean of the ranks they span.
/// NaN sorts last.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KruskalWallis {
    pub h: f64,
    pub df: usize,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StatsError {
    TooFewGroups(usize),
    EmptyGroup(usize),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::TooFewGroups(k) => write!(f, "need at least 2 groups, got {k}"),
            StatsError::EmptyGroup(i) => write!(f, "group {i} is empty"),
        }
    }
}

impl core::error::Error for StatsError {}

/// Kruskal-Wallis rank-sum test with mid-ranks and tie correction; the p
/// value is the chi-square upper tail with `k − 1` degrees of freedom.
pub fn kruskal_wallis<G: AsRef<[f64]>>(groups: &[G]) -> Result<KruskalWallis, StatsError> {
    let k = groups.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups(k));
    }
    if let Some(i) = groups.iter().position(|g| g.as_ref().is_empty()) {
        return Err(StatsError::EmptyGroup(i));
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.as_ref().iter().copied()).collect();
    let n = pooled.len() as f64;
    let ranks = midranks(&pooled);
    let df = k - 1;

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalWallis { h: 0.0, df, p_value: 1.0 });
    }

    let mut offset = 0;
    let mut sum = 0.0;
    for g in groups {
        let m = g.as_ref().len();
        let r: f64 = ranks[offset..offset + m].iter().sum();
        sum += r * r / m as f64;
        offset += m;
    }
    let h = (12.0 * sum - 3.0 * n * (n + 1.0) * (n + 1.0)) / (n * (n + 1.0)) / correction;
    let h = h.max(0.0);
    Ok(KruskalWallis { h, df, p_value: math::chi_square_sf(h, df as f64) })
}
