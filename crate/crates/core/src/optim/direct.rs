//! Locally biased DIRECT (DIRECT-L).
//!
//! The box is mapped to the unit cube. Every hyperrectangle is described by
//! its center and, per dimension, how often that side was trisected, so a side
//! has length `3^-level`. Rectangle size is measured by the longest side only,
//! and per size class only the rectangle with the lowest value is a candidate
//! for division.

use alloc::vec::Vec;

use super::{BoxBounds, Counted, OptResult};
use crate::math;

const EPSILON: f64 = 1e-4;

struct Rect {
    center: Vec<f64>,
    levels: Vec<u32>,
    value: f64,
}

impl Rect {
    fn min_level(&self) -> u32 {
        *self.levels.iter().min().unwrap()
    }
}

fn third_pow(level: u32) -> f64 {
    math::powi(3.0, -(level as i32))
}

/// Minimizes `f` over `bounds` with at most `max_evals` evaluations.
pub fn direct_minimize(f: impl FnMut(&[f64]) -> f64, bounds: &BoxBounds, max_evals: usize) -> OptResult {
    let dim = bounds.dim();
    let mut obj = Counted::new(f, max_evals);
    let mut scratch = alloc::vec![0.0; dim];
    let mut eval_unit = |obj: &mut Counted<_>, c: &[f64]| {
        for i in 0..dim {
            scratch[i] = bounds.lower()[i] + c[i] * bounds.width(i);
        }
        obj.eval(&scratch)
    };

    let center = alloc::vec![0.5; dim];
    let Some(v) = eval_unit(&mut obj, &center) else {
        return obj.result();
    };
    let mut rects = alloc::vec![Rect { center, levels: alloc::vec![0; dim], value: v }];

    'outer: while !obj.exhausted() {
        for idx in potentially_optimal(&rects, obj.best_f) {
            let level = rects[idx].min_level();
            let axis = rects[idx].levels.iter().position(|&l| l == level).unwrap();
            let delta = third_pow(level + 1);
            rects[idx].levels[axis] += 1;
            for sign in [-1.0, 1.0] {
                let mut c = rects[idx].center.clone();
                c[axis] += sign * delta;
                let Some(v) = eval_unit(&mut obj, &c) else {
                    break 'outer;
                };
                let levels = rects[idx].levels.clone();
                rects.push(Rect { center: c, levels, value: v });
            }
        }
    }
    obj.result()
}

/// Indices of the potentially optimal rectangles (one per size class at most).
fn potentially_optimal(rects: &[Rect], fmin: f64) -> Vec<usize> {
    // (size, value, index), one entry per size class: the lowest value,
    // ties broken by the lowest index.
    let mut classes: Vec<(u32, f64, usize)> = Vec::new();
    for (i, r) in rects.iter().enumerate() {
        let lvl = r.min_level();
        match classes.iter_mut().find(|c| c.0 == lvl) {
            Some(c) => {
                if r.value < c.1 {
                    c.1 = r.value;
                    c.2 = i;
                }
            }
            None => classes.push((lvl, r.value, i)),
        }
    }
    // ascending size = descending level
    classes.sort_by_key(|c| core::cmp::Reverse(c.0));
    let size = |lvl: u32| 0.5 * third_pow(lvl);

    let mut out = Vec::new();
    for (j, &(lj, fj, idx)) in classes.iter().enumerate() {
        let dj = size(lj);
        let mut k_low = 0.0f64;
        for &(li, fi, _) in &classes[..j] {
            k_low = k_low.max((fj - fi) / (dj - size(li)));
        }
        let mut k_high = f64::INFINITY;
        for &(li, fi, _) in &classes[j + 1..] {
            k_high = k_high.min((fi - fj) / (size(li) - dj));
        }
        if !(k_high > 0.0) || k_low > k_high {
            continue;
        }
        if k_high.is_finite() && fj - k_high * dj > fmin - EPSILON * fmin.abs() {
            continue;
        }
        out.push(idx);
    }
    out
}
