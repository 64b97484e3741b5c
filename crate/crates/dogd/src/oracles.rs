//! Gradient feedback oracles: exact, deterministically perturbed, and
//! zeroth-order (finite-difference) estimates.
//!
//! Every oracle reports, alongside the estimate `r_t`, an error certificate
//! `delta_t >= ||r_t - grad f_t(x_t)||` when one is available, plus the
//! number of function or gradient queries spent. The error certificates feed
//! the inexactness terms `Delta_T = sum delta_t` and `Lambda_T = sum
//! delta_t^2` of the regret bounds; estimates without a certificate leave
//! the bound evaluators without inputs, and those refuse to run rather than
//! guess.
//!
//! The `(p+1)`-point forward-difference estimator of a `G`-smooth loss has
//! error at most `sqrt(p) G h / 2` (each coordinate error is at most
//! `G h / 2` by Taylor's theorem), and the same certificate covers the
//! `2p`-point symmetric version, whose actual error is typically far
//! smaller and vanishes on quadratics.

use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::losses::Loss;

/// A gradient estimate plus its certificate and cost.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    /// The feedback vector `r_t`.
    pub estimate: Vec<f64>,
    /// Certified bound on `||r_t - grad f_t(x_t)||`, when known.
    pub error_bound: Option<f64>,
    /// Function or gradient evaluations consumed.
    pub query_count: u64,
}

/// A routed gradient estimate: what the learner receives at the end of the
/// arrival round for a query issued at the origin round.
#[derive(Debug, Clone)]
pub struct Feedback {
    /// Round `k` at which the query was issued.
    pub origin_round: u64,
    /// Round `k + d_k - 1` at which the estimate becomes available.
    pub arrival_round: u64,
    /// The feedback vector `r_k`.
    pub estimate: Vec<f64>,
    /// Certified bound on the estimation error, when known.
    pub error_bound: Option<f64>,
    /// Queries spent producing the estimate.
    pub query_count: u64,
}

impl GradientEstimate {
    /// Attaches routing information.
    pub fn into_feedback(self, origin_round: u64, arrival_round: u64) -> Feedback {
        Feedback {
            origin_round,
            arrival_round,
            estimate: self.estimate,
            error_bound: self.error_bound,
            query_count: self.query_count,
        }
    }
}

/// Exact first-order feedback `r_t = grad f_t(x_t)`; certificate 0, one
/// query.
pub fn exact_gradient(loss: &dyn Loss, x: &[f64]) -> GradientEstimate {
    GradientEstimate {
        estimate: loss.gradient(x),
        error_bound: Some(0.0),
        query_count: 1,
    }
}

/// Deterministic perturbation shapes for noisy first-order feedback.
///
/// The perturbation at round `t` always has norm exactly `delta_t`, so the
/// reported certificate is tight and the cumulative terms `Delta_T`,
/// `Lambda_T` are exactly the sums of the schedule.
#[derive(Debug, Clone)]
pub enum NoisePattern {
    /// `delta_t e_1` every round.
    FixedAxis,
    /// `delta_t e_i` with `i` cycling through the coordinates.
    CyclicAxis,
    /// `(-1)^t delta_t u` for a fixed unit vector `u`.
    AlternatingVector(Vec<f64>),
}

/// First-order feedback with an additive deterministic perturbation of norm
/// `magnitude`.
pub fn noisy_gradient(
    loss: &dyn Loss,
    x: &[f64],
    t: u64,
    magnitude: f64,
    pattern: &NoisePattern,
) -> Result<GradientEstimate> {
    if !(magnitude.is_finite() && magnitude >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "magnitude",
            reason: format!("must be finite and nonnegative, got {magnitude}"),
        });
    }
    let p = loss.dimension();
    let mut estimate = loss.gradient(x);
    match pattern {
        NoisePattern::FixedAxis => estimate[0] += magnitude,
        NoisePattern::CyclicAxis => estimate[((t - 1) as usize) % p] += magnitude,
        NoisePattern::AlternatingVector(u) => {
            if u.len() != p {
                return Err(Error::DimensionMismatch {
                    context: "noise direction",
                    expected: p,
                    got: u.len(),
                });
            }
            let n = crate::linalg::norm(u);
            if n == 0.0 || !n.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "noise direction",
                    reason: "must be nonzero and finite".into(),
                });
            }
            let sign = if t % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..p {
                estimate[i] += sign * magnitude * u[i] / n;
            }
        }
    }
    Ok(GradientEstimate {
        estimate,
        error_bound: Some(magnitude),
        query_count: 1,
    })
}

/// Certificate shared by both finite-difference estimators:
/// `sqrt(p) G h / 2` when a smoothness bound `G` is supplied.
fn fd_error_bound(p: usize, smoothness: Option<f64>, h: f64) -> Option<f64> {
    smoothness.map(|g| (p as f64).sqrt() * g * h / 2.0)
}

fn check_probe(
    feasible: &dyn FeasibleSet,
    probe: &[f64],
    t: u64,
    coordinate: usize,
) -> Result<()> {
    const MEMBERSHIP_TOL: f64 = 1e-12;
    if !feasible.contains(probe, MEMBERSHIP_TOL) {
        return Err(Error::InfeasibleQuery {
            round: t,
            coordinate,
        });
    }
    Ok(())
}

fn check_h(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("finite-difference step must be positive, got {h}"),
        });
    }
    Ok(())
}

/// `(p+1)`-point forward-difference estimate
/// `r_i = (f(x + h e_i) - f(x)) / h`.
///
/// All probes must lie in `feasible` (the original set, not the shrunken
/// one the iterate lives in); `smoothness` is the `G` entering the error
/// certificate, absent when the loss carries no smoothness bound.
pub fn fd_estimate(
    loss: &dyn Loss,
    x: &[f64],
    t: u64,
    h: f64,
    feasible: &dyn FeasibleSet,
    smoothness: Option<f64>,
) -> Result<GradientEstimate> {
    check_h(h)?;
    let p = loss.dimension();
    let base = loss.value(x);
    let mut probe = x.to_vec();
    let mut estimate = vec![0.0; p];
    for i in 0..p {
        probe[i] = x[i] + h;
        check_probe(feasible, &probe, t, i)?;
        estimate[i] = (loss.value(&probe) - base) / h;
        probe[i] = x[i];
    }
    Ok(GradientEstimate {
        estimate,
        error_bound: fd_error_bound(p, smoothness, h),
        query_count: p as u64 + 1,
    })
}

/// `2p`-point symmetric-difference estimate
/// `r_i = (f(x + h e_i) - f(x - h e_i)) / (2h)`.
///
/// Exact on quadratics; certified by the same bound as the forward version.
pub fn sym_estimate(
    loss: &dyn Loss,
    x: &[f64],
    t: u64,
    h: f64,
    feasible: &dyn FeasibleSet,
    smoothness: Option<f64>,
) -> Result<GradientEstimate> {
    check_h(h)?;
    let p = loss.dimension();
    let mut probe = x.to_vec();
    let mut estimate = vec![0.0; p];
    for i in 0..p {
        probe[i] = x[i] + h;
        check_probe(feasible, &probe, t, i)?;
        let plus = loss.value(&probe);
        probe[i] = x[i] - h;
        check_probe(feasible, &probe, t, i)?;
        let minus = loss.value(&probe);
        probe[i] = x[i];
        estimate[i] = (plus - minus) / (2.0 * h);
    }
    Ok(GradientEstimate {
        estimate,
        error_bound: fd_error_bound(p, smoothness, h),
        query_count: 2 * p as u64,
    })
}

/// Per-round scalar schedule `scale * t^(-exponent)`, used for
/// finite-difference steps `h_t` and perturbation magnitudes `delta_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSchedule {
    scale: f64,
    exponent: f64,
}

impl PowerSchedule {
    /// Constant schedule `value, value, ...`.
    pub fn constant(value: f64) -> Result<Self> {
        Self::new(value, 0.0)
    }

    /// Decaying schedule `scale * t^(-exponent)`.
    pub fn new(scale: f64, exponent: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) || !exponent.is_finite() || exponent < 0.0 {
            return Err(Error::InvalidParameter {
                name: "schedule",
                reason: format!("need finite scale >= 0 and exponent >= 0, got {scale}, {exponent}"),
            });
        }
        Ok(Self { scale, exponent })
    }

    /// Value at round `t >= 1`.
    pub fn at(&self, t: u64) -> f64 {
        if self.exponent == 0.0 {
            self.scale
        } else {
            self.scale * (t as f64).powf(-self.exponent)
        }
    }

    /// Largest value over rounds `1..=horizon`; for nonincreasing schedules
    /// this is the value at `t = 1`.
    pub fn max_over(&self, _horizon: u64) -> f64 {
        self.scale
    }

    /// Sums `(sum_t at(t), sum_t at(t)^2)` over `1..=horizon`, compensated.
    pub fn cumulative(&self, horizon: u64) -> (f64, f64) {
        let mut lin = crate::linalg::KahanSum::new();
        let mut sq = crate::linalg::KahanSum::new();
        for t in 1..=horizon {
            let v = self.at(t);
            lin.add(v);
            sq.add(v * v);
        }
        (lin.value(), sq.value())
    }
}

/// The feedback channel a run is wired to.
#[derive(Debug, Clone)]
pub enum OracleKind {
    /// Exact gradients.
    Exact,
    /// Gradients with a deterministic additive perturbation of magnitude
    /// `delta_t` following the schedule.
    Noisy {
        magnitude: PowerSchedule,
        pattern: NoisePattern,
    },
    /// `(p+1)`-point forward differences with step `h_t`.
    ForwardDifference {
        h: PowerSchedule,
        smoothness: Option<f64>,
    },
    /// `2p`-point symmetric differences with step `h_t`.
    SymmetricDifference {
        h: PowerSchedule,
        smoothness: Option<f64>,
    },
}

impl OracleKind {
    /// Issues the round-`t` query at the current iterate.
    ///
    /// `feasible` is the original feasible set; zeroth-order modes probe it
    /// and fail on infeasible query points.
    pub fn query(
        &self,
        loss: &dyn Loss,
        x: &[f64],
        t: u64,
        feasible: &dyn FeasibleSet,
    ) -> Result<GradientEstimate> {
        match self {
            OracleKind::Exact => Ok(exact_gradient(loss, x)),
            OracleKind::Noisy { magnitude, pattern } => {
                noisy_gradient(loss, x, t, magnitude.at(t), pattern)
            }
            OracleKind::ForwardDifference { h, smoothness } => {
                fd_estimate(loss, x, t, h.at(t), feasible, *smoothness)
            }
            OracleKind::SymmetricDifference { h, smoothness } => {
                sym_estimate(loss, x, t, h.at(t), feasible, *smoothness)
            }
        }
    }

    /// Largest finite-difference step the oracle will use over the horizon;
    /// zero for first-order oracles. This is the shrinkage margin `h` the
    /// iterates need.
    pub fn max_probe_step(&self, horizon: u64) -> f64 {
        match self {
            OracleKind::Exact | OracleKind::Noisy { .. } => 0.0,
            OracleKind::ForwardDifference { h, .. } | OracleKind::SymmetricDifference { h, .. } => {
                h.max_over(horizon)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::FeasibleBall;
    use crate::linalg::{distance, frobenius_norm, norm};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// `f(x) = x^T Q x / 2 + c^T x`, the test bed for estimator error.
    struct Quadratic {
        q: Vec<f64>,
        c: Vec<f64>,
    }

    impl Loss for Quadratic {
        fn dimension(&self) -> usize {
            self.c.len()
        }
        fn value(&self, x: &[f64]) -> f64 {
            let p = self.c.len();
            let mut qx = vec![0.0; p];
            crate::linalg::mat_vec(&self.q, p, x, &mut qx);
            0.5 * crate::linalg::dot(&qx, x) + crate::linalg::dot(&self.c, x)
        }
        fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
            let p = self.c.len();
            crate::linalg::mat_vec(&self.q, p, x, out);
            for i in 0..p {
                out[i] += self.c[i];
            }
        }
    }

    fn identity_quadratic(p: usize) -> Quadratic {
        let mut q = vec![0.0; p * p];
        for i in 0..p {
            q[i * p + i] = 1.0;
        }
        Quadratic { q, c: vec![0.0; p] }
    }

    #[test]
    fn forward_difference_error_is_exactly_the_certificate_on_isotropic_quadratic() {
        // For f = ||x||^2 / 2 the forward estimate is grad f + (h/2) 1, so
        // the error norm equals sqrt(p) h / 2 at every point: the
        // certificate with G = 1 is attained exactly.
        let p = 7;
        let loss = identity_quadratic(p);
        let ball = FeasibleBall::new(p, 100.0).unwrap();
        let x: Vec<f64> = (0..p).map(|i| i as f64 / 3.0 - 1.0).collect();
        for h in [1e-3, 1e-2, 0.5] {
            let est = fd_estimate(&loss, &x, 1, h, &ball, Some(1.0)).unwrap();
            let err = distance(&est.estimate, &loss.gradient(&x));
            let cert = est.error_bound.unwrap();
            assert!((err - cert).abs() <= 1e-9 * cert.max(1.0), "h={h}: {err} vs {cert}");
            assert!((cert - (p as f64).sqrt() * h / 2.0).abs() < 1e-15);
            assert_eq!(est.query_count, p as u64 + 1);
        }
    }

    #[test]
    fn forward_difference_certificate_dominates_on_random_smooth_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = 6;
        let ball = FeasibleBall::new(p, 50.0).unwrap();
        for _ in 0..100 {
            // Symmetric Q scaled so ||Q||_2 <= ||Q||_F = G.
            let g_target = rng.random_range(0.1..4.0);
            let mut q = vec![0.0; p * p];
            for i in 0..p {
                for j in 0..=i {
                    let v = rng.random_range(-1.0..1.0);
                    q[i * p + j] = v;
                    q[j * p + i] = v;
                }
            }
            let scale = g_target / frobenius_norm(&q);
            q.iter_mut().for_each(|v| *v *= scale);
            let c: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let loss = Quadratic { q, c };
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-5.0..5.0)).collect();
            let h = rng.random_range(1e-3..0.3);
            let est = fd_estimate(&loss, &x, 1, h, &ball, Some(g_target)).unwrap();
            let err = distance(&est.estimate, &loss.gradient(&x));
            assert!(
                err <= est.error_bound.unwrap() + 1e-9,
                "error {err} above certificate {}",
                est.error_bound.unwrap()
            );
        }
    }

    #[test]
    fn symmetric_difference_is_exact_on_quadratics() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = 5;
        let ball = FeasibleBall::new(p, 50.0).unwrap();
        let mut q = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..=i {
                let v = rng.random_range(-1.0..1.0);
                q[i * p + j] = v;
                q[j * p + i] = v;
            }
        }
        let c: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let loss = Quadratic { q, c };
        let x: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
        let est = sym_estimate(&loss, &x, 1, 0.25, &ball, Some(2.0)).unwrap();
        let err = distance(&est.estimate, &loss.gradient(&x));
        assert!(err < 1e-11, "symmetric differences should be exact, got {err}");
        assert_eq!(est.query_count, 2 * p as u64);
    }

    #[test]
    fn probes_outside_the_feasible_set_are_rejected() {
        let p = 3;
        let loss = identity_quadratic(p);
        let ball = FeasibleBall::new(p, 1.0).unwrap();
        // x on the boundary: x + h e_1 leaves the ball.
        let x = vec![1.0, 0.0, 0.0];
        let err = fd_estimate(&loss, &x, 4, 0.1, &ball, None).unwrap_err();
        match err {
            Error::InfeasibleQuery { round, .. } => assert_eq!(round, 4),
            other => panic!("unexpected error {other:?}"),
        }
        // From the shrunken set the same probe is fine.
        let shrunk = ball.shrink(0.1).unwrap();
        let x = shrunk.project(&x).unwrap();
        assert!(fd_estimate(&loss, &x, 4, 0.1, &ball, None).is_ok());
    }

    #[test]
    fn missing_smoothness_leaves_no_certificate() {
        let loss = identity_quadratic(2);
        let ball = FeasibleBall::new(2, 10.0).unwrap();
        let est = fd_estimate(&loss, &[0.1, 0.2], 1, 0.01, &ball, None).unwrap();
        assert!(est.error_bound.is_none());
    }

    #[test]
    fn noise_patterns_have_exact_magnitude() {
        let loss = identity_quadratic(4);
        let x = [0.3, -0.2, 0.9, 0.0];
        let grad = loss.gradient(&x);
        for (t, pattern) in [
            (1, NoisePattern::FixedAxis),
            (2, NoisePattern::CyclicAxis),
            (7, NoisePattern::CyclicAxis),
            (3, NoisePattern::AlternatingVector(vec![1.0, 1.0, 1.0, 1.0])),
            (4, NoisePattern::AlternatingVector(vec![2.0, 0.0, 0.0, 0.0])),
        ] {
            let est = noisy_gradient(&loss, &x, t, 0.125, &pattern).unwrap();
            let err = distance(&est.estimate, &grad);
            assert!((err - 0.125).abs() < 1e-15, "pattern {pattern:?}: {err}");
            assert_eq!(est.error_bound, Some(0.125));
        }
        // Alternating pattern flips sign between consecutive rounds.
        let u = NoisePattern::AlternatingVector(vec![1.0, 0.0, 0.0, 0.0]);
        let e3 = noisy_gradient(&loss, &x, 3, 0.5, &u).unwrap();
        let e4 = noisy_gradient(&loss, &x, 4, 0.5, &u).unwrap();
        assert!((e3.estimate[0] - (grad[0] - 0.5)).abs() < 1e-15);
        assert!((e4.estimate[0] - (grad[0] + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn exact_oracle_reports_zero_error_and_one_query() {
        let loss = identity_quadratic(3);
        let est = exact_gradient(&loss, &[1.0, 2.0, 3.0]);
        assert_eq!(est.error_bound, Some(0.0));
        assert_eq!(est.query_count, 1);
        assert_eq!(est.estimate, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn schedules_evaluate_and_accumulate() {
        let s = PowerSchedule::new(2.0, 0.5).unwrap();
        assert_eq!(s.at(1), 2.0);
        assert!((s.at(4) - 1.0).abs() < 1e-15);
        assert_eq!(s.max_over(1000), 2.0);
        let (lin, sq) = s.cumulative(3);
        let expected_lin = 2.0 + 2.0 / (2.0_f64).sqrt() + 2.0 / (3.0_f64).sqrt();
        let expected_sq = 4.0 + 2.0 + 4.0 / 3.0;
        assert!((lin - expected_lin).abs() < 1e-12);
        assert!((sq - expected_sq).abs() < 1e-12);
        assert!(PowerSchedule::new(-1.0, 0.5).is_err());
        assert!(PowerSchedule::new(1.0, -0.5).is_err());
    }

    #[test]
    fn oracle_kind_dispatch_matches_free_functions() {
        let loss = identity_quadratic(3);
        let ball = FeasibleBall::new(3, 10.0).unwrap();
        let x = [0.5, -0.5, 0.25];
        let kind = OracleKind::ForwardDifference {
            h: PowerSchedule::new(0.1, 1.0).unwrap(),
            smoothness: Some(1.0),
        };
        let via_kind = kind.query(&loss, &x, 2, &ball).unwrap();
        let direct = fd_estimate(&loss, &x, 2, 0.05, &ball, Some(1.0)).unwrap();
        assert_eq!(via_kind.estimate, direct.estimate);
        assert_eq!(kind.max_probe_step(100), 0.1);
        assert_eq!(OracleKind::Exact.max_probe_step(100), 0.0);
        let n = norm(&via_kind.estimate);
        assert!(n.is_finite());
    }
}
