//! Radial-times-angular loss: a highly non-convex quasar-convex family.
//!
//! ```text
//! f(x) = g(||x||) q(x / ||x||),    g(t) = t^2 / (1 + t^2),
//! q(u) = sum_i a_i sin^2(b_i u_i),  a_i in [0, m1], b_i in [-m2, m2].
//! ```
//!
//! The angular factor `q` is nonnegative, so `f >= 0 = f(0)` and the origin
//! is a global minimizer. On the ball of radius `R` the family is
//! quasar-convex with respect to the origin and Lipschitz with constant
//! `m1 p + m1 m2 sqrt(p)`.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, norm};

use super::{Loss, LossConstants};

/// Certificates for the radial family on the ball of radius `radius`:
/// `L = m1 p + m1 m2 sqrt(p)` and `kappa = 1 / (1 + radius^2)`, where `m1`
/// caps the amplitudes and `m2` the frequencies. The conservative half of
/// the quasar constant is reported; it is valid for every admissible draw.
pub fn radial_constants(
    dimension: usize,
    amplitude_cap: f64,
    frequency_cap: f64,
    radius: f64,
) -> LossConstants {
    let p = dimension as f64;
    LossConstants {
        quasar: 1.0 / (1.0 + radius * radius),
        lipschitz: Some(amplitude_cap * p + amplitude_cap * frequency_cap * p.sqrt()),
        weak_smoothness: None,
        smoothness: None,
        strong_quasar: None,
    }
}

/// One draw of the radial family.
#[derive(Debug, Clone)]
pub struct RadialLoss {
    amplitudes: Vec<f64>,
    frequencies: Vec<f64>,
}

impl RadialLoss {
    /// Builds a loss from amplitudes `a_i >= 0` and frequencies `b_i`.
    pub fn new(amplitudes: Vec<f64>, frequencies: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != frequencies.len() {
            return Err(Error::DimensionMismatch {
                context: "radial loss coefficients",
                expected: amplitudes.len(),
                got: frequencies.len(),
            });
        }
        if amplitudes.is_empty() {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "dimension must be at least 1".into(),
            });
        }
        if !all_finite(&amplitudes) || !all_finite(&frequencies) {
            return Err(Error::NonFinite("radial loss coefficients"));
        }
        if amplitudes.iter().any(|&a| a < 0.0) {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                reason: "must be nonnegative".into(),
            });
        }
        Ok(Self {
            amplitudes,
            frequencies,
        })
    }

    /// Certificates from the realized coefficients on the given ball
    /// (amplitude and frequency caps taken as the realized maxima).
    pub fn constants(&self, radius: f64) -> LossConstants {
        let m1 = self.amplitudes.iter().cloned().fold(0.0, f64::max);
        let m2 = self
            .frequencies
            .iter()
            .map(|b| b.abs())
            .fold(0.0, f64::max);
        radial_constants(self.amplitudes.len(), m1, m2, radius)
    }

    /// Shared evaluation core: returns `(t, q(u), grad-q(u) dot products)`
    /// folded directly into value and, when requested, the gradient.
    fn evaluate(&self, x: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let p = self.amplitudes.len();
        debug_assert_eq!(x.len(), p);
        let t = norm(x);
        if t == 0.0 {
            // Removable singularity: f(0) = 0 with vanishing gradient,
            // since both g'(t) and g(t)/t tend to 0 as t tends to 0.
            if let Some(g) = grad.as_deref_mut() {
                g.fill(0.0);
            }
            return 0.0;
        }
        let g_t = t * t / (1.0 + t * t);
        let mut q = 0.0;
        if let Some(gout) = grad.as_deref_mut() {
            // One sin/cos pair per coordinate serves both q (via sin^2) and
            // grad q (via sin(2 theta) = 2 sin cos).
            for i in 0..p {
                let u_i = x[i] / t;
                let (s, c) = (self.frequencies[i] * u_i).sin_cos();
                q += self.amplitudes[i] * s * s;
                gout[i] = self.amplitudes[i] * self.frequencies[i] * 2.0 * s * c;
            }
            let g_prime = 2.0 * t / ((t * t + 1.0) * (t * t + 1.0));
            // grad f = u g'(t) q(u) + (g(t)/t) (I - u u^T) grad q(u).
            let u_dot_gq = dot(x, gout) / t;
            let radial_scale = g_prime * q;
            let tangential_scale = g_t / t;
            for i in 0..p {
                let u_i = x[i] / t;
                gout[i] = u_i * radial_scale + tangential_scale * (gout[i] - u_i * u_dot_gq);
            }
        } else {
            for i in 0..p {
                let s = (self.frequencies[i] * x[i] / t).sin();
                q += self.amplitudes[i] * s * s;
            }
        }
        g_t * q
    }
}

impl Loss for RadialLoss {
    fn dimension(&self) -> usize {
        self.amplitudes.len()
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::testutil::{central_difference_gradient, max_relative_error};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const FD_EPS: f64 = 1e-5;
    const FD_RTOL: f64 = 1e-6;

    fn sample_loss(rng: &mut ChaCha8Rng, p: usize) -> RadialLoss {
        let a = (0..p).map(|_| rng.random_range(0.0..1.0)).collect();
        let b = (0..p).map(|_| rng.random_range(-2.5..2.5)).collect();
        RadialLoss::new(a, b).unwrap()
    }

    #[test]
    fn origin_is_the_minimum() {
        let loss = RadialLoss::new(vec![1.0, 0.5], vec![2.0, -1.0]).unwrap();
        assert_eq!(loss.value(&[0.0, 0.0]), 0.0);
        assert_eq!(loss.gradient(&[0.0, 0.0]), vec![0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-10.0..10.0)).collect();
            assert!(loss.value(&x) >= 0.0);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [1, 3, 7] {
            let loss = sample_loss(&mut rng, p);
            for _ in 0..30 {
                let x: Vec<f64> = (0..p).map(|_| rng.random_range(-5.0..5.0)).collect();
                if norm(&x) < 0.05 {
                    continue;
                }
                let analytic = loss.gradient(&x);
                let numeric = central_difference_gradient(&loss, &x, FD_EPS);
                let err = max_relative_error(&analytic, &numeric);
                assert!(err < FD_RTOL, "p={p}, rel err {err}");
            }
        }
    }

    #[test]
    fn value_and_gradient_agree_with_separate_calls() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let loss = sample_loss(&mut rng, 5);
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mut g = vec![0.0; 5];
        let v = loss.value_and_gradient_into(&x, &mut g);
        assert_eq!(v, loss.value(&x));
        assert_eq!(g, loss.gradient(&x));
    }

    #[test]
    fn lipschitz_certificate_holds_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = 20;
        let radius = 10.0;
        let loss = sample_loss(&mut rng, p);
        let l = loss.constants(radius).lipschitz.unwrap();
        for _ in 0..500 {
            let mut x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let scale = rng.random_range(0.0..radius) / norm(&x).max(1e-9);
            x.iter_mut().for_each(|v| *v *= scale);
            assert!(norm(&loss.gradient(&x)) <= l * (1.0 + 1e-9));
        }
    }

    #[test]
    fn quasar_inequality_with_origin_comparator() {
        // kappa-quasar convexity toward x* = 0 reads
        // <grad f(x), x> >= kappa f(x).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = 10;
        let radius = 5.0;
        let loss = sample_loss(&mut rng, p);
        let kappa = loss.constants(radius).quasar;
        for _ in 0..500 {
            let mut x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let scale = rng.random_range(1e-3..radius) / norm(&x).max(1e-9);
            x.iter_mut().for_each(|v| *v *= scale);
            let f = loss.value(&x);
            let inner = dot(&loss.gradient(&x), &x);
            assert!(
                inner >= kappa * f - 1e-10,
                "quasar violated: <g,x>={inner}, kappa f={}",
                kappa * f
            );
        }
    }

    #[test]
    fn cap_based_constants_match_protocol_values() {
        let c = radial_constants(100, 1.0, 2.5, 100.0);
        assert_eq!(c.lipschitz.unwrap(), 125.0);
        assert!((c.quasar - 1.0 / 10001.0).abs() < 1e-18);
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(RadialLoss::new(vec![], vec![]).is_err());
        assert!(RadialLoss::new(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(RadialLoss::new(vec![-1.0], vec![1.0]).is_err());
        assert!(RadialLoss::new(vec![f64::NAN], vec![1.0]).is_err());
    }
}
