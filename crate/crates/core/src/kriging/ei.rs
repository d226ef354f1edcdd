use super::Prediction;
use crate::math;

/// Expected improvement below `y_min` (minimization).
pub fn expected_improvement(p: &Prediction, y_min: f64) -> f64 {
    if !(p.sd > 0.0) {
        return 0.0;
    }
    let u = (y_min - p.mean) / p.sd;
    p.sd * improvement_factor(u)
}

/// `u Φ(u) + φ(u)`, the expected improvement of a unit-variance prediction.
fn improvement_factor(u: f64) -> f64 {
    if u > -5.0 {
        return (u * math::normal_cdf(u) + math::normal_pdf(u)).max(0.0);
    }
    // Deep in the lower tail the direct form cancels. With t = −u and the
    // Mills ratio m = Φ(−t)/φ(t) = 1/(t + q), where q is the continued
    // fraction 1/(t + 2/(t + 3/(t + …))), the factor is φ(t)·q·m.
    let t = -u;
    let mut r = 0.0;
    for k in (2..=120).rev() {
        r = k as f64 / (t + r);
    }
    let q = 1.0 / (t + r);
    let m = 1.0 / (t + q);
    math::normal_pdf(t) * q * m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sd() {
        assert_eq!(expected_improvement(&Prediction { mean: -5.0, sd: 0.0 }, 1.0), 0.0);
    }

    #[test]
    fn closed_form_points() {
        let ei = expected_improvement(&Prediction { mean: 0.5, sd: 1.0 }, 0.5);
        assert!((ei - 0.398_942).abs() < 1e-6);
        let ei = expected_improvement(&Prediction { mean: 0.0, sd: 1.0 }, 1.0);
        assert!((ei - 1.083_316).abs() < 1e-6);
    }

    #[test]
    fn tail_branch_is_continuous() {
        let below = improvement_factor(-5.0 - 1e-12);
        let above = improvement_factor(-5.0 + 1e-12);
        assert!((below - above).abs() / above < 1e-6);
        // Asymptotically the factor behaves like φ(t)/t².
        let t: f64 = 30.0;
        let ratio = improvement_factor(-t) / (math::normal_pdf(t) / (t * t));
        assert!((ratio - 1.0).abs() < 0.01);
    }

    #[test]
    fn monotone_in_sd() {
        for &mean in &[-1.0, 0.0, 0.3, 2.0] {
            let mut prev = 0.0;
            for k in 1..200 {
                let sd = k as f64 * 0.05;
                let ei = expected_improvement(&Prediction { mean, sd }, 0.5);
                assert!(ei >= 0.0);
                assert!(ei >= prev, "mean {mean} sd {sd}");
                prev = ei;
            }
        }
    }
}
