use gpsmbo_core::distance::DistanceTriple;
use gpsmbo_core::expr::{ramped_half_and_half, GeneratorParams};
use gpsmbo_core::kriging::{neg_concentrated_log_likelihood, KernelDistances, KernelWeights, SurrogateConfig};
use gpsmbo_core::math::{chi_square_sf, normal_cdf, normal_pdf};
use gpsmbo_core::stats::kruskal_wallis;
use gpsmbo_core::{KrigingModel, ProblemInstance};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF, Normal};

#[test]
fn normal_functions_match_statrs() {
    let n = Normal::new(0.0, 1.0).unwrap();
    for i in -80..=80 {
        let u = i as f64 * 0.1;
        assert!((normal_cdf(u) - n.cdf(u)).abs() <= 1e-9 * n.cdf(u), "cdf at {u}: {} vs {}", normal_cdf(u), n.cdf(u));
        assert!((normal_pdf(u) - n.pdf(u)).abs() < 1e-15, "pdf at {u}");
    }
}

#[test]
fn chi_square_tail_matches_statrs() {
    for df in [1.0, 2.0, 3.0, 5.0, 10.0] {
        let c = ChiSquared::new(df).unwrap();
        for i in 1..60 {
            let x = i as f64 * 0.5;
            let want = 1.0 - c.cdf(x);
            assert!((chi_square_sf(x, df) - want).abs() < 1e-10, "df {df} x {x}");
        }
    }
}

/// Direct definition with the tie correction, on a hand-ranked sample.
#[test]
fn kruskal_wallis_with_ties_by_hand() {
    // Pooled: 1 1 2 3 3 3 4; ranks 1.5 1.5 3 5 5 5 7.
    let groups = [vec![1.0, 3.0], vec![1.0, 2.0, 3.0], vec![3.0, 4.0]];
    let kw = kruskal_wallis(&groups).unwrap();
    let r = [1.5 + 5.0, 1.5 + 3.0 + 5.0, 5.0 + 7.0];
    let n = 7.0;
    let h0 = 12.0 / (n * (n + 1.0)) * (r[0] * r[0] / 2.0 + r[1] * r[1] / 3.0 + r[2] * r[2] / 2.0) - 3.0 * (n + 1.0);
    let c = 1.0 - ((8.0 - 2.0) + (27.0 - 3.0)) / (n * n * n - n);
    assert!((kw.h - h0 / c).abs() < 1e-12);
    let want = 1.0 - ChiSquared::new(2.0).unwrap().cdf(kw.h);
    assert!((kw.p_value - want).abs() < 1e-10);
}

#[test]
fn fitted_model_matches_dense_algebra() {
    let p = ProblemInstance::builtin("newton").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut trees = Vec::new();
    while trees.len() < 12 {
        let t = ramped_half_and_half(&p.spec.ops, &GeneratorParams::default(), &mut rng);
        if !trees.contains(&t) {
            trees.push(t);
        }
    }
    let y: Vec<f64> = (0..12).map(|_| rng.gen_range(0.0..1.0)).collect();
    let cfg = SurrogateConfig { mle_evals: 200, ..Default::default() };
    let model = KrigingModel::fit(&trees, &y, &p.data.x, &cfg).unwrap();
    let w = *model.weights();

    let dists = KernelDistances::from_fn(12, |i, j| {
        gpsmbo_core::distance::distance_triple(&trees[i], &trees[j], &p.data.x)
    });
    let k = DMatrix::from_fn(12, 12, |i, j| {
        let d: DistanceTriple = dists.get(i, j);
        let v = (-(w.beta[0] * d.shd2 + w.beta[1] * d.phd + w.beta[2] * d.ted)).exp();
        if i == j { v + w.nugget } else { v }
    });
    let kinv = k.clone().try_inverse().unwrap();
    let one = DVector::from_element(12, 1.0);
    let yv = DVector::from_column_slice(&y);
    let mu = (one.transpose() * &kinv * &yv)[0] / (one.transpose() * &kinv * &one)[0];
    let r = &yv - &one * mu;
    let sigma2 = (r.transpose() * &kinv * &r)[0] / 12.0;
    let nll = 6.0 * sigma2.ln() + 0.5 * k.determinant().ln();

    assert!((model.mu() - mu).abs() < 1e-8);
    assert!((model.sigma2() - sigma2).abs() < 1e-8 * sigma2.max(1.0));
    let ev = neg_concentrated_log_likelihood(&KernelWeights { ..w }, &dists, &y, 1.0).unwrap();
    assert!((ev.nll - nll).abs() < 1e-8 * nll.abs().max(1.0));
    assert!((model.summary().log_likelihood + nll).abs() < 1e-8 * nll.abs().max(1.0));
}
