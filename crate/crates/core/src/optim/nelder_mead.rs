use alloc::vec::Vec;

use super::{BoxBounds, Counted, OptResult};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once the simplex is smaller than this (∞-norm around the best
    /// vertex). Zero disables the test so the full budget is spent.
    pub min_diameter: f64,
    /// Initial step per coordinate as a fraction of the box width.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_evals: 1000, min_diameter: 1e-10, initial_step: 0.05 }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Nelder-Mead from `x0` with trial points clamped to `bounds`.
pub fn nelder_mead(f: impl FnMut(&[f64]) -> f64, x0: &[f64], bounds: &BoxBounds, max_evals: usize) -> OptResult {
    nelder_mead_with(f, x0, bounds, &NelderMeadOptions { max_evals, ..Default::default() })
}

pub fn nelder_mead_with(
    f: impl FnMut(&[f64]) -> f64,
    x0: &[f64],
    bounds: &BoxBounds,
    opts: &NelderMeadOptions,
) -> OptResult {
    let n = bounds.dim();
    assert_eq!(x0.len(), n, "start point dimension");
    let mut obj = Counted::new(f, opts.max_evals);

    let mut start = x0.to_vec();
    bounds.clamp(&mut start);
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    simplex.push(start.clone());
    for i in 0..n {
        let step = opts.initial_step * bounds.width(i);
        let mut v = start.clone();
        v[i] = if v[i] + step <= bounds.upper()[i] { v[i] + step } else { v[i] - step };
        simplex.push(v);
    }
    for v in &simplex {
        match obj.eval(v) {
            Some(fv) => values.push(fv),
            None => return obj.result(),
        }
    }

    let clamp = |mut p: Vec<f64>| {
        bounds.clamp(&mut p);
        p
    };
    let mut order: Vec<usize> = (0..=n).collect();

    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let (best, worst, second) = (order[0], order[n], order[n.saturating_sub(1)]);

        let diameter = simplex
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if opts.min_diameter > 0.0 && diameter < opts.min_diameter {
            break;
        }

        let mut centroid = alloc::vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x / n as f64;
            }
        }
        let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
            from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
        };

        let xr = clamp(along(&centroid, &simplex[worst], -REFLECT));
        let Some(fr) = obj.eval(&xr) else { break };

        if fr < values[best] {
            let xe = clamp(along(&centroid, &xr, EXPAND));
            let Some(fe) = obj.eval(&xe) else { break };
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
            continue;
        }
        if fr < values[second] {
            simplex[worst] = xr;
            values[worst] = fr;
            continue;
        }
        let (xc, accept) = if fr < values[worst] {
            let xc = clamp(along(&centroid, &xr, CONTRACT));
            let Some(fc) = obj.eval(&xc) else { break };
            (xc, if fc <= fr { Some(fc) } else { None })
        } else {
            let xc = clamp(along(&centroid, &simplex[worst], CONTRACT));
            let Some(fc) = obj.eval(&xc) else { break };
            (xc, if fc < values[worst] { Some(fc) } else { None })
        };
        if let Some(fc) = accept {
            simplex[worst] = xc;
            values[worst] = fc;
            continue;
        }
        let anchor = simplex[best].clone();
        let mut done = false;
        for i in 0..=n {
            if i == best {
                continue;
            }
            let p = clamp(along(&anchor, &simplex[i], SHRINK));
            match obj.eval(&p) {
                Some(v) => {
                    simplex[i] = p;
                    values[i] = v;
                }
                None => {
                    done = true;
                    break;
                }
            }
        }
        if done {
            break;
        }
    }
    obj.result()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_1d() {
        let b = BoxBounds::uniform(1, 0.0, 1.0).unwrap();
        let r = nelder_mead(|x| (x[0] - 0.3) * (x[0] - 0.3), &[0.9], &b, 200);
        assert!((r.x[0] - 0.3).abs() <= 1e-6, "{:?}", r);
    }

    #[test]
    fn optimal_start_never_worse() {
        let b = BoxBounds::uniform(2, -1.0, 1.0).unwrap();
        let f = |x: &[f64]| x[0] * x[0] + 2.0 * x[1] * x[1];
        let r = nelder_mead(f, &[0.0, 0.0], &b, 100);
        assert!(r.value <= 0.0);
    }

    #[test]
    fn rosenbrock() {
        let b = BoxBounds::uniform(2, -2.0, 2.0).unwrap();
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &b, 2000);
        assert!(r.value <= 1e-4, "{:?}", r);
    }

    #[test]
    fn clamps_to_bounds() {
        let b = BoxBounds::uniform(2, 0.0, 1.0).unwrap();
        let mut pts = Vec::new();
        let r = nelder_mead(
            |x| {
                pts.push(x.to_vec());
                -(x[0] + x[1])
            },
            &[0.5, 0.5],
            &b,
            300,
        );
        assert!(pts.iter().all(|p| b.contains(p)));
        assert!((r.value + 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_tolerance_spends_full_budget() {
        let b = BoxBounds::uniform(2, -10.0, 10.0).unwrap();
        let opts = NelderMeadOptions { max_evals: 2000, min_diameter: 0.0, ..Default::default() };
        let r = nelder_mead_with(|_| 0.25, &[0.0, 0.0], &b, &opts);
        assert_eq!(r.evaluations, 2000);
        let r = nelder_mead(|_| 0.25, &[0.0, 0.0], &b, 2000);
        assert!(r.evaluations < 2000);
    }
}
