use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::linalg::Cholesky;
use super::{kernel, KernelDistances, KernelWeights, KrigingError, SurrogateConfig};
use crate::distance::{PreparedTree, TedWorkspace};
use crate::expr::{DataMatrix, ExprTree};
use crate::math;
use crate::optim::{direct_minimize, BoxBounds};

/// Predicted mean and standard deviation at one tree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    pub sd: f64,
}

/// Concentrated likelihood at one parameter setting.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodEval {
    /// `(n/2)·ln σ̂² + (1/2)·ln det K`.
    pub nll: f64,
    pub mu: f64,
    pub sigma2: f64,
    /// Nugget after escalation (equals the requested one unless `K` was indefinite).
    pub nugget: f64,
}

struct Factorization {
    chol: Cholesky,
    nugget: f64,
    mu: f64,
    sigma2: f64,
    nll: f64,
    /// `K⁻¹ (y - 1μ̂)`
    alpha: Vec<f64>,
    /// `K⁻¹ 1`
    kinv_one: Vec<f64>,
    one_kinv_one: f64,
}

/// First nugget tried when a zero nugget fails.
const MIN_ESCALATED_NUGGET: f64 = 1e-12;

fn factorize(
    w: &KernelWeights,
    dists: &KernelDistances,
    y: &[f64],
    nugget_cap: f64,
) -> Result<Factorization, KrigingError> {
    let n = dists.len();
    if n < 2 {
        return Err(KrigingError::TooFewPoints(n));
    }
    if y.len() != n {
        return Err(KrigingError::LengthMismatch { trees: n, values: y.len() });
    }
    let mut nugget = w.nugget;
    let chol = loop {
        let k = dists.kernel_matrix(&KernelWeights { beta: w.beta, nugget });
        if let Some(c) = Cholesky::new(k, n) {
            break c;
        }
        if nugget >= nugget_cap {
            return Err(KrigingError::NotPositiveDefinite { nugget });
        }
        nugget = (nugget * 10.0).max(MIN_ESCALATED_NUGGET).min(nugget_cap);
    };
    let ones = alloc::vec![1.0; n];
    let kinv_one = chol.solve(&ones);
    let kinv_y = chol.solve(y);
    let one_kinv_one: f64 = kinv_one.iter().sum();
    let mu = kinv_y.iter().sum::<f64>() / one_kinv_one;
    let resid: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let alpha = chol.solve(&resid);
    let sigma2 = (math::dot(&resid, &alpha) / n as f64).max(f64::MIN_POSITIVE);
    let nll = 0.5 * n as f64 * math::ln(sigma2) + 0.5 * chol.log_det();
    Ok(Factorization { chol, nugget, mu, sigma2, nll, alpha, kinv_one, one_kinv_one })
}

/// Negative concentrated log-likelihood of ordinary Kriging.
pub fn neg_concentrated_log_likelihood(
    w: &KernelWeights,
    dists: &KernelDistances,
    y: &[f64],
    nugget_cap: f64,
) -> Result<LikelihoodEval, KrigingError> {
    let f = factorize(w, dists, y, nugget_cap)?;
    Ok(LikelihoodEval { nll: f.nll, mu: f.mu, sigma2: f.sigma2, nugget: f.nugget })
}

/// Exported model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    /// Raw weights `(shd2, phd, ted)`.
    pub beta: [f64; 3],
    pub nugget: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub log_likelihood: f64,
    pub n_train: usize,
    pub degenerate: bool,
}

/// A fitted Kriging model over trees.
#[derive(Clone, Debug)]
pub struct KrigingModel {
    x: DataMatrix,
    train: Vec<PreparedTree>,
    y: Vec<f64>,
    weights: KernelWeights,
    mu: f64,
    sigma2: f64,
    log_likelihood: f64,
    fit: Option<FitState>,
}

#[derive(Clone, Debug)]
struct FitState {
    chol: Cholesky,
    alpha: Vec<f64>,
    kinv_one: Vec<f64>,
    one_kinv_one: f64,
}

impl KrigingModel {
    /// Fits a model on `trees` with fitness `y`; `x` is the data used by PhD.
    pub fn fit(trees: &[ExprTree], y: &[f64], x: &DataMatrix, config: &SurrogateConfig) -> Result<Self, KrigingError> {
        let prepared: Vec<PreparedTree> = trees.iter().map(|t| PreparedTree::new(t.clone(), x)).collect();
        let dists = KernelDistances::from_prepared(&prepared);
        Self::fit_prepared(prepared, &dists, y, x, config)
    }

    /// Fits on already prepared trees and their precomputed distance matrices.
    pub fn fit_prepared(
        train: Vec<PreparedTree>,
        dists: &KernelDistances,
        y: &[f64],
        x: &DataMatrix,
        config: &SurrogateConfig,
    ) -> Result<Self, KrigingError> {
        let n = train.len();
        if n < 2 {
            return Err(KrigingError::TooFewPoints(n));
        }
        if y.len() != n || dists.len() != n {
            return Err(KrigingError::LengthMismatch { trees: n, values: y.len() });
        }
        let active: Vec<usize> = (0..3).filter(|&i| config.active[i]).collect();
        if active.is_empty() {
            return Err(KrigingError::NoActiveDistance);
        }

        if y.iter().all(|v| *v == y[0]) {
            let mut beta = [0.0; 3];
            for &i in &active {
                beta[i] = 1.0;
            }
            return Ok(KrigingModel {
                x: x.clone(),
                train,
                y: y.to_vec(),
                weights: KernelWeights { beta, nugget: math::pow10(config.log10_nugget.0) },
                mu: y[0],
                sigma2: 0.0,
                log_likelihood: f64::NAN,
                fit: None,
            });
        }

        let to_weights = |p: &[f64]| {
            let mut beta = [0.0; 3];
            for (k, &i) in active.iter().enumerate() {
                beta[i] = math::pow10(p[k]);
            }
            KernelWeights { beta, nugget: math::pow10(p[active.len()]) }
        };
        let mut lower = alloc::vec![config.log10_beta.0; active.len()];
        let mut upper = alloc::vec![config.log10_beta.1; active.len()];
        lower.push(config.log10_nugget.0);
        upper.push(config.log10_nugget.1);
        let bounds = BoxBounds::new(lower, upper).expect("search box is well ordered");
        let res = direct_minimize(
            |p| match factorize(&to_weights(p), dists, y, config.nugget_cap) {
                Ok(f) if f.nll.is_finite() => f.nll,
                _ => 1e100,
            },
            &bounds,
            config.mle_evals,
        );
        let weights = to_weights(&res.x);
        let f = factorize(&weights, dists, y, config.nugget_cap)?;
        Ok(KrigingModel {
            x: x.clone(),
            train,
            y: y.to_vec(),
            weights: KernelWeights { beta: weights.beta, nugget: f.nugget },
            mu: f.mu,
            sigma2: f.sigma2,
            log_likelihood: -f.nll,
            fit: Some(FitState { chol: f.chol, alpha: f.alpha, kinv_one: f.kinv_one, one_kinv_one: f.one_kinv_one }),
        })
    }

    /// Model with fixed weights (no likelihood search).
    pub fn with_weights(
        train: Vec<PreparedTree>,
        dists: &KernelDistances,
        y: &[f64],
        x: &DataMatrix,
        weights: KernelWeights,
        nugget_cap: f64,
    ) -> Result<Self, KrigingError> {
        let f = factorize(&weights, dists, y, nugget_cap)?;
        Ok(KrigingModel {
            x: x.clone(),
            train,
            y: y.to_vec(),
            weights: KernelWeights { beta: weights.beta, nugget: f.nugget },
            mu: f.mu,
            sigma2: f.sigma2,
            log_likelihood: -f.nll,
            fit: Some(FitState { chol: f.chol, alpha: f.alpha, kinv_one: f.kinv_one, one_kinv_one: f.one_kinv_one }),
        })
    }

    pub fn weights(&self) -> &KernelWeights {
        &self.weights
    }

    /// Weights scaled to sum to one, in kernel order `(shd2, phd, ted)`.
    pub fn normalized_weights(&self) -> [f64; 3] {
        self.weights.normalized()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// All training values were identical; predictions are that value with zero spread.
    pub fn is_degenerate(&self) -> bool {
        self.fit.is_none()
    }

    pub fn data(&self) -> &DataMatrix {
        &self.x
    }

    pub fn training_values(&self) -> &[f64] {
        &self.y
    }

    pub fn training_trees(&self) -> impl Iterator<Item = &ExprTree> {
        self.train.iter().map(|p| &p.tree)
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            beta: self.weights.beta,
            nugget: self.weights.nugget,
            mu: self.mu,
            sigma2: self.sigma2,
            log_likelihood: self.log_likelihood,
            n_train: self.train.len(),
            degenerate: self.is_degenerate(),
        }
    }

    pub fn predict(&self, tree: &ExprTree) -> Prediction {
        let p = PreparedTree::new(tree.clone(), &self.x);
        self.predict_prepared(&p, &mut TedWorkspace::default())
    }

    /// Prediction for a tree already prepared against this model's data.
    pub fn predict_prepared(&self, p: &PreparedTree, ws: &mut TedWorkspace) -> Prediction {
        let Some(fit) = &self.fit else {
            return Prediction { mean: self.mu, sd: 0.0 };
        };
        let k: Vec<f64> = self.train.iter().map(|t| kernel(&p.triple(t, ws), &self.weights)).collect();
        let mean = self.mu + math::dot(&k, &fit.alpha);
        let mut v = k.clone();
        fit.chol.forward(&mut v);
        let k_kinv_k = math::dot(&v, &v);
        let one_kinv_k = math::dot(&fit.kinv_one, &k);
        let trend = 1.0 - one_kinv_k;
        let var = self.sigma2 * (1.0 + self.weights.nugget - k_kinv_k + trend * trend / fit.one_kinv_one);
        Prediction { mean, sd: math::sqrt(var.max(0.0)) }
    }
}
