//! Quadratic fractional losses
//!
//! ```text
//! f(x) = g(x) / q(x),
//! g(x) = (1/2) <Ax, x> + <a, x> + alpha,
//! q(x) = (1/2) <Bx, x> + <b, x> + beta,
//! ```
//!
//! with `A` symmetric positive definite and `q` certified to stay inside
//! `[m, M]` with `0 < m < M` on the feasible ball. On that region the
//! family is strongly quasiconvex and `kappa`-quasar-convex with
//! `kappa = m / M`, with a whole family of strong quasar-convexity pairs
//! indexed by a trade-off parameter `lambda`.
//!
//! The denominator-range certificate is verified analytically at
//! construction from norm bounds, which is stronger than spot-checking by
//! sampling.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{FeasibleBall, FeasibleSet};
use crate::linalg::{
    all_finite, dot, frobenius_norm, is_positive_definite, mat_vec, norm, smallest_eigenvalue,
};

use super::{Loss, LossConstants};

/// Symmetry check for a flat-stored square matrix.
fn require_symmetric(m: &[f64], n: usize, context: &'static str) -> Result<()> {
    let scale = frobenius_norm(m).max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[i * n + j] - m[j * n + i]).abs() > 1e-10 * scale {
                return Err(Error::InvalidParameter {
                    name: context,
                    reason: format!("not symmetric at ({i}, {j})"),
                });
            }
        }
    }
    Ok(())
}

/// One quadratic fractional instance together with its denominator range.
#[derive(Debug, Clone)]
pub struct QuadFracLoss {
    a_mat: Vec<f64>,
    a_vec: Vec<f64>,
    alpha: f64,
    /// `None` encodes the zero matrix.
    b_mat: Option<Vec<f64>>,
    b_vec: Vec<f64>,
    beta: f64,
    denom_lo: f64,
    denom_hi: f64,
    dimension: usize,
}

impl QuadFracLoss {
    /// Builds an instance and certifies `denom_lo <= q(x) <= denom_hi` on
    /// the given ball using the norm bounds
    /// `q(x) >= beta - ||b|| R` (for positive semidefinite `B`) and
    /// `q(x) <= beta + ||b|| R + ||B||_F R^2 / 2`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a_mat: Vec<f64>,
        a_vec: Vec<f64>,
        alpha: f64,
        b_mat: Option<Vec<f64>>,
        b_vec: Vec<f64>,
        beta: f64,
        ball: &FeasibleBall,
        denom_lo: f64,
        denom_hi: f64,
    ) -> Result<Self> {
        let p = ball.dimension();
        let r = ball.radius();
        for (len, expected, context) in [
            (a_mat.len(), p * p, "numerator matrix A"),
            (a_vec.len(), p, "numerator vector a"),
            (b_vec.len(), p, "denominator vector b"),
        ] {
            if len != expected {
                return Err(Error::DimensionMismatch {
                    context,
                    expected,
                    got: len,
                });
            }
        }
        if !all_finite(&a_mat) || !all_finite(&a_vec) || !all_finite(&b_vec) {
            return Err(Error::NonFinite("quadratic fractional coefficients"));
        }
        require_symmetric(&a_mat, p, "A")?;
        if !is_positive_definite(&a_mat, p) {
            return Err(Error::NotPositiveDefinite {
                context: "numerator matrix A",
            });
        }
        let mut b_fro = 0.0;
        if let Some(bm) = &b_mat {
            if bm.len() != p * p {
                return Err(Error::DimensionMismatch {
                    context: "quadratic fractional coefficients",
                    expected: p * p,
                    got: bm.len(),
                });
            }
            if !all_finite(bm) {
                return Err(Error::NonFinite("denominator matrix B"));
            }
            require_symmetric(bm, p, "B")?;
            if smallest_eigenvalue(bm, p)? < -1e-10 * frobenius_norm(bm).max(1.0) {
                return Err(Error::InvalidParameter {
                    name: "B",
                    reason: "must be positive semidefinite".into(),
                });
            }
            b_fro = frobenius_norm(bm);
        }
        if !(denom_lo.is_finite() && denom_hi.is_finite() && 0.0 < denom_lo && denom_lo < denom_hi)
        {
            return Err(Error::InvalidParameter {
                name: "denominator range",
                reason: format!("need 0 < m < M, got m = {denom_lo}, M = {denom_hi}"),
            });
        }
        let b_norm = norm(&b_vec);
        let q_min_cert = beta - b_norm * r;
        let q_max_cert = beta + b_norm * r + 0.5 * b_fro * r * r;
        let slack = 1e-9 * denom_hi;
        if q_min_cert < denom_lo - slack || q_max_cert > denom_hi + slack {
            return Err(Error::InvalidParameter {
                name: "denominator range",
                reason: format!(
                    "q ranges over [{q_min_cert}, {q_max_cert}] on the ball, \
                     outside the declared [{denom_lo}, {denom_hi}]"
                ),
            });
        }
        Ok(Self {
            a_mat,
            a_vec,
            alpha,
            b_mat,
            b_vec,
            beta,
            denom_lo,
            denom_hi,
            dimension: p,
        })
    }

    /// Certified lower bound `m` of the denominator on the ball.
    pub fn denom_lo(&self) -> f64 {
        self.denom_lo
    }

    /// Certified upper bound `M` of the denominator on the ball.
    pub fn denom_hi(&self) -> f64 {
        self.denom_hi
    }

    /// Numerator `g(x)`.
    pub fn numerator(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.dimension];
        mat_vec(&self.a_mat, self.dimension, x, &mut ax);
        0.5 * dot(&ax, x) + dot(&self.a_vec, x) + self.alpha
    }

    /// Denominator `q(x)`.
    pub fn denominator(&self, x: &[f64]) -> f64 {
        let mut q = dot(&self.b_vec, x) + self.beta;
        if let Some(bm) = &self.b_mat {
            let mut bx = vec![0.0; self.dimension];
            mat_vec(bm, self.dimension, x, &mut bx);
            q += 0.5 * dot(&bx, x);
        }
        q
    }

    /// Smoothness (Hessian-norm) bound over the ball of radius `radius`,
    ///
    /// ```text
    /// G = ||A||^2 / m
    ///   + 2 (||B|| R + ||b||)(||A|| R + ||a||) / m^2
    ///   + (||A|| R^2 + 2 ||a|| R + 2 alpha)(||B|| R + ||b||)^2 / m^3
    ///   + (||A|| R^2 / 2 + ||a|| R + alpha) ||B||^2 / m^2,
    /// ```
    ///
    /// with Frobenius matrix norms (an upper bound on the operator norm,
    /// so the certificate stays valid).
    pub fn smoothness_bound(&self, radius: f64) -> f64 {
        let m = self.denom_lo;
        let r = radius;
        let na = frobenius_norm(&self.a_mat);
        let nb = self.b_mat.as_deref().map(frobenius_norm).unwrap_or(0.0);
        let nav = norm(&self.a_vec);
        let nbv = norm(&self.b_vec);
        na * na / m
            + 2.0 * (nb * r + nbv) * (na * r + nav) / (m * m)
            + (na * r * r + 2.0 * nav * r + 2.0 * self.alpha) * (nb * r + nbv) * (nb * r + nbv)
                / (m * m * m)
            + (0.5 * na * r * r + nav * r + self.alpha) * nb * nb / (m * m)
    }

    /// Full curvature certificates on the ball of radius `radius`. Runs a
    /// dense eigensolve on `A`, so this is a setup-time call, not a
    /// per-round one.
    pub fn certificates(&self, radius: f64) -> Result<QfCertificates> {
        let sigma_min = smallest_eigenvalue(&self.a_mat, self.dimension)?;
        if sigma_min <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                context: "numerator matrix A",
            });
        }
        let g = self.smoothness_bound(radius);
        let kappa = self.denom_lo / self.denom_hi;
        let strong = strong_quasar_pair(kappa, sigma_min, self.denom_hi, 0.5)?;
        Ok(QfCertificates {
            constants: LossConstants {
                quasar: kappa,
                lipschitz: None,
                // A G-smooth nonnegative loss is 2G-weakly smooth.
                weak_smoothness: Some(2.0 * g),
                smoothness: Some(g),
                strong_quasar: Some(strong),
            },
            sigma_min,
            denom_lo: self.denom_lo,
            denom_hi: self.denom_hi,
        })
    }

    fn evaluate(&self, x: &[f64], mut grad: Option<&mut [f64]>) -> f64 {
        let p = self.dimension;
        debug_assert_eq!(x.len(), p);
        let mut ax = vec![0.0; p];
        mat_vec(&self.a_mat, p, x, &mut ax);
        let g_val = 0.5 * dot(&ax, x) + dot(&self.a_vec, x) + self.alpha;

        let mut bx = vec![0.0; p];
        if let Some(bm) = &self.b_mat {
            mat_vec(bm, p, x, &mut bx);
        }
        let q_val = 0.5 * dot(&bx, x) + dot(&self.b_vec, x) + self.beta;

        if let Some(out) = grad.as_deref_mut() {
            // grad f = (q (Ax + a) - g (Bx + b)) / q^2.
            let inv_q2 = 1.0 / (q_val * q_val);
            for i in 0..p {
                let dg = ax[i] + self.a_vec[i];
                let dq = bx[i] + self.b_vec[i];
                out[i] = (q_val * dg - g_val * dq) * inv_q2;
            }
        }
        g_val / q_val
    }
}

impl Loss for QuadFracLoss {
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

/// The strong quasar-convexity pair indexed by `lambda` in `(0, 1)`:
/// `(lambda kappa, (1 - lambda) kappa sigma_min(A) / (4 M lambda))`.
/// Larger `lambda` favors the quasar constant, smaller `lambda` the
/// quadratic term.
fn strong_quasar_pair(
    kappa: f64,
    sigma_min: f64,
    denom_hi: f64,
    lambda: f64,
) -> Result<(f64, f64)> {
    if !(0.0 < lambda && lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must lie in (0, 1), got {lambda}"),
        });
    }
    Ok((
        lambda * kappa,
        (1.0 - lambda) * kappa * sigma_min / (4.0 * denom_hi * lambda),
    ))
}

/// Curvature certificates of a quadratic fractional instance.
#[derive(Debug, Clone)]
pub struct QfCertificates {
    /// Certificates in the shared format; `strong_quasar` holds the
    /// balanced pair `lambda = 1/2`.
    pub constants: LossConstants,
    /// Smallest eigenvalue of the numerator matrix.
    pub sigma_min: f64,
    /// Certified denominator lower bound `m`.
    pub denom_lo: f64,
    /// Certified denominator upper bound `M`.
    pub denom_hi: f64,
}

impl QfCertificates {
    /// Strict quasiconvexity modulus `sigma_min(A) / M`.
    pub fn quasiconvex_modulus(&self) -> f64 {
        self.sigma_min / self.denom_hi
    }

    /// Quadratic growth constant: with `gamma = sigma_min(A) / M`,
    /// `f(y) >= f(x*) + (gamma / 4) ||y - x*||^2` on the certified region.
    pub fn quadratic_growth(&self) -> f64 {
        self.sigma_min / self.denom_hi
    }

    /// The `(lambda kappa, (1 - lambda) kappa sigma_min / (4 M lambda))`
    /// family of strong quasar-convexity pairs.
    pub fn lambda_family(&self, lambda: f64) -> Result<(f64, f64)> {
        strong_quasar_pair(
            self.constants.quasar,
            self.sigma_min,
            self.denom_hi,
            lambda,
        )
    }
}

/// Slow random walk over quadratic fractional instances with linear
/// denominator (`B = 0`):
///
/// ```text
/// A_t = (A_{t-1} + s t^{-1/2} V_t) / ||.||_F,   V_t = W^T W / ||W^T W||_F,
/// a_t = (a_{t-1} + s t^{-1/2} v_t) / (10 ||.||),
/// b_t = (b_{t-1} + s t^{-1/2} w_t) / (10 ||.||),
/// ```
///
/// with standard normal `W`, `v_t`, `w_t`, keeping `||A_t||_F = 1` and
/// `||a_t|| = ||b_t|| = 1/10`. The affine terms are pinned to the walk:
/// `beta_t = ||b_t|| R + beta_offset` and `alpha_t` is constant, so the
/// denominator range `[beta_offset, ||b_t|| R + beta_t]` is certified every
/// round.
#[derive(Debug, Clone)]
pub struct QfDrift {
    a_mat: Vec<f64>,
    a_vec: Vec<f64>,
    b_vec: Vec<f64>,
    dimension: usize,
    scale: f64,
    alpha: f64,
    beta_offset: f64,
    round: u64,
}

impl QfDrift {
    /// Random-walk parameters of the rolling instance. `scale` is the
    /// perturbation magnitude `s`, `alpha` the constant numerator offset,
    /// `beta_offset` the denominator offset.
    pub fn new(dimension: usize, scale: f64, alpha: f64, beta_offset: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter {
                name: "dimension",
                reason: "must be at least 1".into(),
            });
        }
        if !(scale.is_finite() && scale >= 0.0) || !(beta_offset.is_finite() && beta_offset > 0.0)
        {
            return Err(Error::InvalidParameter {
                name: "drift parameters",
                reason: "need scale >= 0 and beta_offset > 0".into(),
            });
        }
        Ok(Self {
            a_mat: Vec::new(),
            a_vec: Vec::new(),
            b_vec: Vec::new(),
            dimension,
            scale,
            alpha,
            beta_offset,
            round: 0,
        })
    }

    /// Advances the walk and materializes the instance for the next round.
    /// The first call draws the initial parameters.
    pub fn next_loss<R: Rng + ?Sized>(
        &mut self,
        ball: &FeasibleBall,
        rng: &mut R,
    ) -> Result<QuadFracLoss> {
        let p = self.dimension;
        if ball.dimension() != p {
            return Err(Error::DimensionMismatch {
                context: "drift feasible set",
                expected: p,
                got: ball.dimension(),
            });
        }
        self.round += 1;
        if self.round == 1 {
            self.a_mat = random_unit_psd(p, rng)?;
            // The Gram construction yields a positive definite draw almost
            // surely; the constructor below still verifies it.
            self.a_vec = random_direction(p, rng, 0.1);
            self.b_vec = random_direction(p, rng, 0.1);
        } else {
            let step = self.scale / (self.round as f64).sqrt();
            const MAX_RETRIES: usize = 8;
            let mut ok = false;
            for _ in 0..MAX_RETRIES {
                let v = random_unit_psd(p, rng)?;
                let mut candidate = self.a_mat.clone();
                for (c, &vi) in candidate.iter_mut().zip(&v) {
                    *c += step * vi;
                }
                let n = frobenius_norm(&candidate);
                candidate.iter_mut().for_each(|c| *c /= n);
                if is_positive_definite(&candidate, p) {
                    self.a_mat = candidate;
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(Error::NotPositiveDefinite {
                    context: "drifted numerator matrix",
                });
            }
            perturb_to_sphere(&mut self.a_vec, step, 0.1, rng);
            perturb_to_sphere(&mut self.b_vec, step, 0.1, rng);
        }
        let beta = norm(&self.b_vec) * ball.radius() + self.beta_offset;
        let denom_hi = norm(&self.b_vec) * ball.radius() + beta;
        QuadFracLoss::new(
            self.a_mat.clone(),
            self.a_vec.clone(),
            self.alpha,
            None,
            self.b_vec.clone(),
            beta,
            ball,
            self.beta_offset,
            denom_hi,
        )
    }
}

/// Standard normal vector rescaled to the given norm.
fn random_direction<R: Rng + ?Sized>(p: usize, rng: &mut R, target_norm: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
    let n = norm(&v).max(f64::MIN_POSITIVE);
    v.iter_mut().for_each(|z| *z *= target_norm / n);
    v
}

/// `v = (v + step w) * target / ||v + step w||` with standard normal `w`.
fn perturb_to_sphere<R: Rng + ?Sized>(v: &mut [f64], step: f64, target_norm: f64, rng: &mut R) {
    for z in v.iter_mut() {
        let w: f64 = StandardNormal.sample(rng);
        *z += step * w;
    }
    let n = norm(v).max(f64::MIN_POSITIVE);
    v.iter_mut().for_each(|z| *z *= target_norm / n);
}

/// Gram matrix `W^T W` of a standard normal `p x p` draw, rescaled to unit
/// Frobenius norm; positive definite with probability one.
fn random_unit_psd<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<Vec<f64>> {
    let w: Vec<f64> = (0..p * p).map(|_| StandardNormal.sample(rng)).collect();
    let mut gram = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let mut s = 0.0;
            for k in 0..p {
                s += w[k * p + i] * w[k * p + j];
            }
            gram[i * p + j] = s;
            gram[j * p + i] = s;
        }
    }
    let n = frobenius_norm(&gram);
    if n == 0.0 {
        return Err(Error::InvalidParameter {
            name: "gram matrix",
            reason: "degenerate zero draw".into(),
        });
    }
    gram.iter_mut().for_each(|g| *g /= n);
    Ok(gram)
}
