//! Generalized linear model with logistic link and square loss.
//!
//! ```text
//! f(x) = (1 / 2m) sum_i (sigma(<a_i, x>) - b_i)^2,
//! sigma(z) = e^z / (1 + e^z).
//! ```
//!
//! With realizable targets `b_i = sigma(<a_i, x*>)` the minimum value is 0,
//! the family is `Gamma`-weakly smooth with `Gamma = max_i ||a_i||^2 / 8`,
//! and on the ball of radius `R` it is quasar-convex with
//! `kappa = min(1, 8 sigma'(z_max))`, `z_max` the largest attainable
//! magnitude of `<a_i, x>`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, norm};

use super::{Loss, LossConstants};

/// Logistic function, evaluated in the numerically stable branch form.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Derivative of the logistic function, `sigma'(z) = sigma(z)(1 - sigma(z))`.
#[inline]
pub fn sigmoid_prime(z: f64) -> f64 {
    let s = sigmoid(z);
    s * (1.0 - s)
}

/// One round's regression problem: `m` feature rows and targets.
///
/// The feature matrix is reference-counted so that several losses built on
/// the same design (differing only in targets) share one allocation.
#[derive(Debug, Clone)]
pub struct GlmLoss {
    /// Row-major `m x p` feature matrix.
    features: Arc<[f64]>,
    targets: Vec<f64>,
    samples: usize,
    dimension: usize,
    /// Largest feature-row norm, cached for the certificates.
    max_row_norm: f64,
}

impl GlmLoss {
    /// Builds a loss from a row-major `m x p` feature matrix and `m`
    /// targets in `[0, 1]`.
    pub fn new(features: Vec<f64>, targets: Vec<f64>, dimension: usize) -> Result<Self> {
        Self::with_shared_features(Arc::from(features), targets, dimension)
    }

    /// Like [`GlmLoss::new`] but reusing an existing shared feature matrix.
    pub fn with_shared_features(
        features: Arc<[f64]>,
        targets: Vec<f64>,
        dimension: usize,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter {
                name: "dimension",
                reason: "must be at least 1".into(),
            });
        }
        if targets.is_empty() {
            return Err(Error::InvalidParameter {
                name: "targets",
                reason: "need at least one sample".into(),
            });
        }
        if features.len() != targets.len() * dimension {
            return Err(Error::DimensionMismatch {
                context: "glm feature matrix",
                expected: targets.len() * dimension,
                got: features.len(),
            });
        }
        if !all_finite(&features) || !all_finite(&targets) {
            return Err(Error::NonFinite("glm data"));
        }
        let samples = targets.len();
        let max_row_norm = (0..samples)
            .map(|i| norm(&features[i * dimension..(i + 1) * dimension]))
            .fold(0.0, f64::max);
        Ok(Self {
            features,
            targets,
            samples,
            dimension,
            max_row_norm,
        })
    }

    /// Number of samples `m`.
    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Certificates on the ball of radius `radius`:
    /// `Gamma = max_i ||a_i||^2 / 8` and
    /// `kappa = min(1, 8 sigma'(max_i ||a_i|| radius))`.
    pub fn constants(&self, radius: f64) -> LossConstants {
        let z_max = self.max_row_norm * radius;
        LossConstants {
            quasar: (8.0 * sigmoid_prime(z_max)).min(1.0),
            lipschitz: None,
            weak_smoothness: Some(self.max_row_norm * self.max_row_norm / 8.0),
            smoothness: None,
            strong_quasar: None,
        }
    }

    /// Targets realizable from `reference`: `b_i = sigma(<a_i, reference>)`.
    /// Guarantees minimum value 0 at `reference`.
    pub fn realized_targets(features: &[f64], dimension: usize, reference: &[f64]) -> Vec<f64> {
        debug_assert_eq!(features.len() % dimension, 0);
        (0..features.len() / dimension)
            .map(|i| sigmoid(dot(&features[i * dimension..(i + 1) * dimension], reference)))
            .collect()
    }

    fn evaluate(&self, x: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let p = self.dimension;
        debug_assert_eq!(x.len(), p);
        if let Some(g) = grad.as_deref_mut() {
            g.fill(0.0);
        }
        let mut total = 0.0;
        for i in 0..self.samples {
            let row = &self.features[i * p..(i + 1) * p];
            let z = dot(row, x);
            let s = sigmoid(z);
            let residual = s - self.targets[i];
            total += residual * residual;
            if let Some(g) = grad.as_deref_mut() {
                let w = s * (1.0 - s) * residual;
                for j in 0..p {
                    g[j] += w * row[j];
                }
            }
        }
        if let Some(g) = grad.as_deref_mut() {
            let inv_m = 1.0 / self.samples as f64;
            g.iter_mut().for_each(|v| *v *= inv_m);
        }
        total / (2.0 * self.samples as f64)
    }
}

impl Loss for GlmLoss {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x, None)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        self.evaluate(x, Some(out));
    }

    fn value_and_gradient_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.evaluate(x, Some(out))
    }
}
