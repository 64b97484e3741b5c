//! Dynamic-regret accounting and closed-form bound evaluators.
//!
//! The dynamic (non-stationary) regret over a horizon `T` is
//!
//! ```text
//! R_T = sum_{t=1}^{T} f_t(x_t) - sum_{t=1}^{T} f_t(x*_t),
//! ```
//!
//! with `x*_t` the per-round minimizer. Its upper bounds are driven by the
//! path variation `V_T = sum ||x*_t - x*_{t+1}||`, the cumulative feedback
//! error `Delta_T = sum delta_t`, and its square `Lambda_T = sum delta_t^2`.
//! All ledger sums are compensated; agreement with naive summation is part
//! of the test suite.
//!
//! Three bound evaluators cover the feedback regimes:
//!
//! * [`bound_lipschitz`]: the five-term bound for `L`-Lipschitz losses.
//! * [`bound_weakly_smooth`]: the quadratic-form bound for `Gamma`-weakly
//!   smooth losses, valid below a step-size threshold `1/alpha`.
//! * [`bound_bandit`]: the zeroth-order version for `G`-smooth losses with
//!   finite-difference feedback, consuming the step schedule summary.
//!
//! The threshold constant `alpha` is a caller input rather than being
//! recomputed internally: the delay coefficient differs between the
//! `(d + 4 sqrt(d) (d-1))` and `(d + 2 sqrt(d) (d-1))` variants of the
//! guarantee, and taking it explicitly lets both be evaluated.

use crate::error::{Error, Result};
use crate::linalg::KahanSum;

/// Per-round regret accounting for one run.
#[derive(Debug, Clone, Default)]
pub struct RegretLedger {
    loss_at_iterate: Vec<f64>,
    loss_at_minimizer: Vec<Option<f64>>,
    /// Running compensated value of `R_t` after each round, defined only
    /// while every minimizer value is present.
    regret_running: Vec<f64>,
    regret_acc: KahanSum,
    gaps_complete: bool,
    path_acc: KahanSum,
    delta_acc: Option<KahanSum>,
    lambda_acc: Option<KahanSum>,
    query_counts: Vec<u64>,
}

impl RegretLedger {
    /// Empty ledger.
    pub fn new() -> Self {
        Self {
            gaps_complete: true,
            delta_acc: Some(KahanSum::new()),
            lambda_acc: Some(KahanSum::new()),
            ..Self::default()
        }
    }

    /// Records round `t`'s evaluations: the loss at the iterate, the loss
    /// at the comparator (absent when no comparator value is available),
    /// the feedback error certificate (absent when the oracle has none),
    /// and the queries spent.
    pub fn push_round(
        &mut self,
        loss_at_iterate: f64,
        loss_at_minimizer: Option<f64>,
        error_bound: Option<f64>,
        query_count: u64,
    ) {
        self.loss_at_iterate.push(loss_at_iterate);
        self.loss_at_minimizer.push(loss_at_minimizer);
        match loss_at_minimizer {
            Some(fstar) if self.gaps_complete => {
                self.regret_acc.add(loss_at_iterate - fstar);
                self.regret_running.push(self.regret_acc.value());
            }
            _ => self.gaps_complete = false,
        }
        match (error_bound, self.delta_acc.as_mut(), self.lambda_acc.as_mut()) {
            (Some(delta), Some(dacc), Some(lacc)) => {
                dacc.add(delta);
                lacc.add(delta * delta);
            }
            _ => {
                self.delta_acc = None;
                self.lambda_acc = None;
            }
        }
        self.query_counts.push(query_count);
    }

    /// Records the comparator displacement `||x*_t - x*_{t+1}||` feeding
    /// the path variation.
    pub fn push_path_increment(&mut self, distance: f64) {
        self.path_acc.add(distance);
    }

    /// Number of recorded rounds.
    pub fn rounds(&self) -> u64 {
        self.loss_at_iterate.len() as u64
    }

    /// Loss values at the iterates, one per round.
    pub fn losses_at_iterate(&self) -> &[f64] {
        &self.loss_at_iterate
    }

    /// Loss values at the comparators, one per round.
    pub fn losses_at_minimizer(&self) -> &[Option<f64>] {
        &self.loss_at_minimizer
    }

    /// Total dynamic regret `R_T`, refused when any comparator value is
    /// missing.
    pub fn dynamic_regret(&self) -> Result<f64> {
        self.require_gaps()?;
        Ok(self.regret_acc.value())
    }

    /// Running cumulative regret `R_t` after each round.
    pub fn regret_series(&self) -> Result<&[f64]> {
        self.require_gaps()?;
        Ok(&self.regret_running)
    }

    /// Instantaneous gaps `f_t(x_t) - f_t(x*_t)`.
    pub fn gap_series(&self) -> Result<Vec<f64>> {
        self.require_gaps()?;
        Ok(self
            .loss_at_iterate
            .iter()
            .zip(&self.loss_at_minimizer)
            .map(|(f, fstar)| f - fstar.expect("checked complete"))
            .collect())
    }

    /// Gaps smoothed by a trailing mean over `window` rounds (shorter
    /// prefixes average whatever is available).
    pub fn smoothed_gap_series(&self, window: usize) -> Result<Vec<f64>> {
        let gaps = self.gap_series()?;
        Ok(smooth_trailing(&gaps, window))
    }

    /// Path variation `V_T` accumulated so far.
    pub fn path_variation(&self) -> f64 {
        self.path_acc.value()
    }

    /// `(Delta_T, Lambda_T)`, defined only when every round carried an
    /// error certificate.
    pub fn cumulative_errors(&self) -> Option<(f64, f64)> {
        match (&self.delta_acc, &self.lambda_acc) {
            (Some(d), Some(l)) => Some((d.value(), l.value())),
            _ => None,
        }
    }

    /// Oracle queries per round.
    pub fn query_counts(&self) -> &[u64] {
        &self.query_counts
    }

    /// Total oracle queries.
    pub fn total_queries(&self) -> u64 {
        self.query_counts.iter().sum()
    }

    fn require_gaps(&self) -> Result<()> {
        if !self.gaps_complete {
            return Err(Error::MissingConstant {
                name: "loss_at_minimizer",
                reason: "some rounds lack a comparator value; dynamic regret is undefined".into(),
            });
        }
        Ok(())
    }
}

/// Trailing-window mean: entry `t` averages the last `min(t+1, window)`
/// values. The window is re-summed at every position, keeping the result
/// independent of evaluation order.
pub fn smooth_trailing(series: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(series.len());
    for t in 0..series.len() {
        let lo = t + 1 - w.min(t + 1);
        let mut acc = 0.0;
        for v in &series[lo..=t] {
            acc += v;
        }
        out.push(acc / (t - lo + 1) as f64);
    }
    out
}

/// Path variation `V_T = sum_{t=1}^{T-1} ||x*_t - x*_{t+1}||` of a
/// comparator sequence; zero for a single point.
pub fn path_variation(minimizers: &[Vec<f64>]) -> f64 {
    let mut acc = KahanSum::new();
    for pair in minimizers.windows(2) {
        acc.add(crate::linalg::distance(&pair[0], &pair[1]));
    }
    acc.value()
}

/// `(Delta_T, Lambda_T)` from per-round error certificates.
pub fn cumulative_errors(deltas: &[f64]) -> (f64, f64) {
    let mut lin = KahanSum::new();
    let mut sq = KahanSum::new();
    for &d in deltas {
        lin.add(d);
        sq.add(d * d);
    }
    (lin.value(), sq.value())
}

/// The zeroth-order error sums of a `(p+1)`-point estimator on a `G`-smooth
/// loss with steps `h_t`: per-round certificate `delta_t = sqrt(p) G h_t / 2`,
/// hence
///
/// ```text
/// Delta-bar_T = (sqrt(p) G / 2) sum h_t,
/// Lambda-bar_T = (p G^2 / 4) sum h_t^2.
/// ```
pub fn bandit_cumulative_errors(dimension: usize, smoothness: f64, steps: &[f64]) -> (f64, f64) {
    let p = dimension as f64;
    let mut lin = KahanSum::new();
    let mut sq = KahanSum::new();
    for &h in steps {
        lin.add(h);
        sq.add(h * h);
    }
    (
        p.sqrt() * smoothness / 2.0 * lin.value(),
        p * smoothness * smoothness / 4.0 * sq.value(),
    )
}

/// Everything the bound evaluators can consume. Inapplicable fields stay at
/// their defaults; each evaluator validates what it actually needs.
#[derive(Debug, Clone, Default)]
pub struct BoundInputs {
    /// Feasible-set radius `R`.
    pub radius: f64,
    /// Quasar-convexity constant `kappa`.
    pub quasar: f64,
    /// Largest delay `d`.
    pub max_delay: u32,
    /// Horizon `T`.
    pub horizon: u64,
    /// Constant step size `eta`.
    pub eta: f64,
    /// Path variation `V_T`.
    pub path_variation: f64,
    /// Cumulative error `Delta_T`.
    pub cumulative_error: f64,
    /// Cumulative squared error `Lambda_T`.
    pub cumulative_sq_error: f64,
    /// Lipschitz constant `L`, for [`bound_lipschitz`].
    pub lipschitz: Option<f64>,
    /// Weak-smoothness constant `Gamma`, for [`bound_weakly_smooth`].
    pub weak_smoothness: Option<f64>,
    /// Smoothness constant `G`, for [`bound_bandit`].
    pub smoothness: Option<f64>,
    /// Threshold constant: the `alpha` of `a = 1 - alpha eta`.
    pub alpha: Option<f64>,
    /// Ambient dimension `p`, for [`bound_bandit`].
    pub dimension: Option<usize>,
    /// `(sum h_t, sum h_t^2)` of the finite-difference schedule, for
    /// [`bound_bandit`].
    pub h_sums: Option<(f64, f64)>,
}

fn validate_common(inputs: &BoundInputs) -> Result<()> {
    if !(inputs.eta.is_finite() && inputs.eta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("must be positive, got {}", inputs.eta),
        });
    }
    if !(inputs.quasar > 0.0 && inputs.quasar <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "quasar",
            reason: format!("kappa must lie in (0, 1], got {}", inputs.quasar),
        });
    }
    if !(inputs.radius > 0.0) {
        return Err(Error::InvalidParameter {
            name: "radius",
            reason: format!("must be positive, got {}", inputs.radius),
        });
    }
    if inputs.max_delay == 0 {
        return Err(Error::InvalidParameter {
            name: "max_delay",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

/// Regret bound for `L`-Lipschitz losses with delayed inexact feedback:
///
/// ```text
/// 2R^2/(eta kappa) + (3R + eta L (d-1)) V_T/(eta kappa)
///   + (L^2 d + 4(d-1) L^2) eta T/(2 kappa)
///   + eta d Lambda_T/(2 kappa)
///   + (eta d L + 2R + 2 eta (d-1) L) Delta_T/kappa.
/// ```
pub fn bound_lipschitz(inputs: &BoundInputs) -> Result<f64> {
    validate_common(inputs)?;
    let l = inputs.lipschitz.ok_or(Error::MissingConstant {
        name: "lipschitz",
        reason: "the Lipschitz bound needs L".into(),
    })?;
    let (r, k, eta) = (inputs.radius, inputs.quasar, inputs.eta);
    let d = f64::from(inputs.max_delay);
    let t = inputs.horizon as f64;
    let (v, delta, lambda) = (
        inputs.path_variation,
        inputs.cumulative_error,
        inputs.cumulative_sq_error,
    );
    Ok(2.0 * r * r / (eta * k)
        + (3.0 * r + eta * l * (d - 1.0)) * v / (eta * k)
        + (l * l * d + 4.0 * (d - 1.0) * l * l) * eta * t / (2.0 * k)
        + eta * d * lambda / (2.0 * k)
        + (eta * d * l + 2.0 * r + 2.0 * eta * (d - 1.0) * l) * delta / k)
}

/// The exact-feedback display of the Lipschitz bound,
///
/// ```text
/// 2R^2/(eta kappa) + 3R V_T/(eta kappa) + eta L^2 T d/(2 kappa)
///   + L(d-1) V_T/kappa + 2 eta (d-1) L^2 T/kappa,
/// ```
///
/// algebraically identical to [`bound_lipschitz`] at
/// `Delta_T = Lambda_T = 0`; both are kept verbatim and their agreement is
/// asserted in tests.
pub fn bound_lipschitz_exact_feedback(inputs: &BoundInputs) -> Result<f64> {
    validate_common(inputs)?;
    let l = inputs.lipschitz.ok_or(Error::MissingConstant {
        name: "lipschitz",
        reason: "the Lipschitz bound needs L".into(),
    })?;
    let (r, k, eta) = (inputs.radius, inputs.quasar, inputs.eta);
    let d = f64::from(inputs.max_delay);
    let t = inputs.horizon as f64;
    let v = inputs.path_variation;
    Ok(2.0 * r * r / (eta * k)
        + 3.0 * r * v / (eta * k)
        + eta * l * l * t * d / (2.0 * k)
        + l * (d - 1.0) * v / k
        + 2.0 * eta * (d - 1.0) * l * l * t / k)
}

/// A quadratic-form regret bound together with its coefficients.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticFormBound {
    /// The bound value.
    pub value: f64,
    /// `a = 1 - alpha eta`.
    pub a: f64,
    /// The `sqrt(V_T)` and `sqrt(Lambda_T)` coefficient.
    pub b: f64,
    /// The constant-and-linear-terms coefficient.
    pub c: f64,
}

/// `(b^2 + 2ac + b sqrt(b^2 + 4ac)) / (2a^2)`, the solution of the
/// second-order inequality `a x <= b sqrt(x) + c` for `x >= 0`.
pub fn quadratic_form_bound(a: f64, b: f64, c: f64) -> f64 {
    let disc = (b * b + 4.0 * a * c).sqrt();
    (b * b + 2.0 * a * c + b * disc) / (2.0 * a * a)
}

fn quadratic_bound_from(inputs: &BoundInputs, b: f64, c: f64) -> Result<QuadraticFormBound> {
    let alpha = inputs.alpha.ok_or(Error::MissingConstant {
        name: "alpha",
        reason: "quadratic-form bounds need the threshold constant alpha".into(),
    })?;
    let a = 1.0 - alpha * inputs.eta;
    if a <= 0.0 {
        return Err(Error::StepSizeThreshold {
            eta: inputs.eta,
            threshold: 1.0 / alpha,
            context: "quadratic-form regret bound requires eta < 1/alpha",
        });
    }
    Ok(QuadraticFormBound {
        value: quadratic_form_bound(a, b, c),
        a,
        b,
        c,
    })
}

/// Regret bound for `Gamma`-weakly smooth losses with delayed inexact
/// feedback: `(b^2 + 2ac + b sqrt(b^2 + 4ac)) / (2a^2)` with
///
/// ```text
/// a = 1 - alpha eta,
/// b = sqrt(2R(d-1) Gamma V_T)/kappa
///   + ((sqrt(2d)(d-1) eta + eta d)/kappa) sqrt(Gamma Lambda_T),
/// c = 2R^2/kappa + 3R V_T/kappa + eta d Lambda_T/(2 kappa)
///   + 2R Delta_T/kappa.
/// ```
pub fn bound_weakly_smooth(inputs: &BoundInputs) -> Result<QuadraticFormBound> {
    validate_common(inputs)?;
    let gamma = inputs.weak_smoothness.ok_or(Error::MissingConstant {
        name: "weak_smoothness",
        reason: "the weakly smooth bound needs Gamma".into(),
    })?;
    let (r, k, eta) = (inputs.radius, inputs.quasar, inputs.eta);
    let d = f64::from(inputs.max_delay);
    let (v, delta, lambda) = (
        inputs.path_variation,
        inputs.cumulative_error,
        inputs.cumulative_sq_error,
    );
    let b = (2.0 * r * (d - 1.0) * gamma * v).sqrt() / k
        + ((2.0 * d).sqrt() * (d - 1.0) * eta + eta * d) / k * (gamma * lambda).sqrt();
    let c = 2.0 * r * r / k + 3.0 * r * v / k + eta * d * lambda / (2.0 * k)
        + 2.0 * r * delta / k;
    quadratic_bound_from(inputs, b, c)
}

/// Regret bound for the zeroth-order mode on `G`-smooth losses: the
/// weakly smooth quadratic form at `Gamma = 2G` with the error sums of the
/// `(p+1)`-point estimator,
///
/// ```text
/// Delta-bar_T = (sqrt(p) G / 2) sum h_t,
/// Lambda-bar_T = (p G^2 / 4) sum h_t^2,
/// ```
///
/// and threshold constant `alpha_1` supplied by the caller.
pub fn bound_bandit(inputs: &BoundInputs) -> Result<QuadraticFormBound> {
    validate_common(inputs)?;
    let g = inputs.smoothness.ok_or(Error::MissingConstant {
        name: "smoothness",
        reason: "the zeroth-order bound needs G".into(),
    })?;
    let p = inputs.dimension.ok_or(Error::MissingConstant {
        name: "dimension",
        reason: "the zeroth-order bound needs p".into(),
    })?;
    let (h_sum, h_sq_sum) = inputs.h_sums.ok_or(Error::MissingConstant {
        name: "h_sums",
        reason: "the zeroth-order bound needs (sum h_t, sum h_t^2)".into(),
    })?;
    let pf = p as f64;
    let delta_bar = pf.sqrt() * g / 2.0 * h_sum;
    let lambda_bar = pf * g * g / 4.0 * h_sq_sum;
    let gamma = 2.0 * g;
    let (r, k, eta) = (inputs.radius, inputs.quasar, inputs.eta);
    let d = f64::from(inputs.max_delay);
    let v = inputs.path_variation;
    let b = (2.0 * r * (d - 1.0) * gamma * v).sqrt() / k
        + ((2.0 * d).sqrt() * (d - 1.0) * eta + eta * d) / k * (gamma * lambda_bar).sqrt();
    let c = 2.0 * r * r / k + 3.0 * r * v / k + eta * d * lambda_bar / (2.0 * k)
        + 2.0 * r * delta_bar / k;
    quadratic_bound_from(inputs, b, c)
}

/// Direct form of the delayed double sum,
/// `sum_{t=1}^{T-1} sum_{k=t+1}^{min(T, t+d-1)} a_k`.
pub fn lemma_double_sum_direct(values: &[f64], d: u32) -> f64 {
    let t_max = values.len();
    let d = d as usize;
    let mut acc = KahanSum::new();
    for t in 1..t_max {
        let hi = t_max.min(t + d - 1);
        for k in (t + 1)..=hi {
            acc.add(values[k - 1]);
        }
    }
    acc.value()
}

/// Rearranged form of the same double sum,
/// `sum_{k=2}^{T} (k - max(1, k-d+1)) a_k`. The inner lower limit clamps at
/// 1, which is what makes the rearrangement an exact identity for every
/// `T` and `d`.
pub fn lemma_double_sum_rearranged(values: &[f64], d: u32) -> f64 {
    let t_max = values.len();
    let d = d as i64;
    let mut acc = KahanSum::new();
    for k in 2..=t_max as i64 {
        let count = k - 1.max(k - d + 1);
        acc.add(count as f64 * values[(k - 1) as usize]);
    }
    acc.value()
}

/// The closed upper bound `(d - 1) sum_k a_k` dominating both forms for
/// nonnegative sequences.
pub fn lemma_double_sum_bound(values: &[f64], d: u32) -> f64 {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    f64::from(d - 1) * acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const REL_TOL_NAIVE: f64 = 1e-10;
    const REL_TOL_IDENTITY: f64 = 1e-12;

    fn default_inputs() -> BoundInputs {
        BoundInputs {
            radius: 1.0,
            quasar: 1.0,
            max_delay: 1,
            horizon: 1,
            eta: 1.0,
            ..BoundInputs::default()
        }
    }

    #[test]
    fn ledger_accumulates_and_reports() {
        let mut ledger = RegretLedger::new();
        ledger.push_round(2.0, Some(0.5), Some(0.1), 1);
        ledger.push_round(1.0, Some(0.25), Some(0.2), 3);
        ledger.push_path_increment(3.0);
        assert_eq!(ledger.rounds(), 2);
        assert!((ledger.dynamic_regret().unwrap() - 2.25).abs() < 1e-15);
        assert_eq!(ledger.regret_series().unwrap(), &[1.5, 2.25]);
        assert_eq!(ledger.gap_series().unwrap(), vec![1.5, 0.75]);
        assert_eq!(ledger.path_variation(), 3.0);
        let (d, l) = ledger.cumulative_errors().unwrap();
        assert!((d - 0.3).abs() < 1e-15);
        assert!((l - 0.05).abs() < 1e-15);
        assert_eq!(ledger.total_queries(), 4);
    }

    #[test]
    fn ledger_refuses_regret_with_missing_minimizer_values() {
        let mut ledger = RegretLedger::new();
        ledger.push_round(2.0, Some(0.5), None, 1);
        ledger.push_round(1.0, None, None, 1);
        assert!(ledger.dynamic_regret().is_err());
        assert!(ledger.regret_series().is_err());
        assert!(ledger.cumulative_errors().is_none());
    }

    #[test]
    fn ledger_matches_naive_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ledger = RegretLedger::new();
        let mut naive_regret = 0.0;
        let mut naive_delta = 0.0;
        let mut naive_lambda = 0.0;
        for _ in 0..50_000 {
            let f = rng.random_range(0.0..10.0);
            let fstar = rng.random_range(0.0..10.0);
            let d = rng.random_range(0.0..0.01);
            ledger.push_round(f, Some(fstar), Some(d), 1);
            naive_regret += f - fstar;
            naive_delta += d;
            naive_lambda += d * d;
        }
        let reg = ledger.dynamic_regret().unwrap();
        assert!((reg - naive_regret).abs() <= REL_TOL_NAIVE * naive_regret.abs().max(1.0));
        let (dd, ll) = ledger.cumulative_errors().unwrap();
        assert!((dd - naive_delta).abs() <= REL_TOL_NAIVE * naive_delta.max(1.0));
        assert!((ll - naive_lambda).abs() <= REL_TOL_NAIVE * naive_lambda.max(1.0));
    }

    #[test]
    fn smoothing_window_means() {
        let s = [4.0, 2.0, 6.0, 0.0];
        assert_eq!(smooth_trailing(&s, 2), vec![4.0, 3.0, 4.0, 3.0]);
        assert_eq!(smooth_trailing(&s, 1), s.to_vec());
        // Window longer than the series averages the whole prefix.
        assert_eq!(smooth_trailing(&s, 10), vec![4.0, 3.0, 4.0, 3.0]);
    }

    #[test]
    fn path_variation_examples() {
        assert_eq!(path_variation(&[vec![1.0, 2.0]]), 0.0);
        let walk = vec![vec![0.0, 0.0], vec![3.0, 4.0], vec![3.0, 4.0]];
        assert_eq!(path_variation(&walk), 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let path: Vec<Vec<f64>> = (0..2000)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let direct: f64 = path
            .windows(2)
            .map(|w| crate::linalg::distance(&w[0], &w[1]))
            .sum();
        assert!((path_variation(&path) - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn cumulative_error_examples() {
        assert_eq!(cumulative_errors(&[]), (0.0, 0.0));
        assert_eq!(cumulative_errors(&[0.0, 0.0]), (0.0, 0.0));
        let (d, l) = cumulative_errors(&[1.0, 2.0]);
        assert_eq!((d, l), (3.0, 5.0));
    }

    #[test]
    fn bandit_error_sums_match_direct_formulas() {
        let (p, g) = (4, 2.0);
        let steps: Vec<f64> = (1..=100).map(|t| 1.0 / t as f64).collect();
        let (delta_bar, lambda_bar) = bandit_cumulative_errors(p, g, &steps);
        let h_sum: f64 = steps.iter().sum();
        let h_sq: f64 = steps.iter().map(|h| h * h).sum();
        assert!((delta_bar - (p as f64).sqrt() * g / 2.0 * h_sum).abs() < 1e-12);
        assert!((lambda_bar - p as f64 * g * g / 4.0 * h_sq).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_bound_direct_substitution() {
        // R=1, eta=1, kappa=1, L=1, d=1, T=1, V=Delta=Lambda=0:
        // 2 + 0 + 0.5 + 0 + 0 = 2.5.
        let inputs = BoundInputs {
            lipschitz: Some(1.0),
            ..default_inputs()
        };
        assert!((bound_lipschitz(&inputs).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn lipschitz_bound_agrees_with_exact_feedback_display() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let inputs = BoundInputs {
                radius: rng.random_range(0.1..100.0),
                quasar: rng.random_range(0.01..1.0),
                max_delay: rng.random_range(1..30),
                horizon: rng.random_range(1..100_000),
                eta: rng.random_range(1e-4..1.0),
                path_variation: rng.random_range(0.0..50.0),
                lipschitz: Some(rng.random_range(0.1..200.0)),
                ..BoundInputs::default()
            };
            let five_term = bound_lipschitz(&inputs).unwrap();
            let corollary = bound_lipschitz_exact_feedback(&inputs).unwrap();
            assert!(
                (five_term - corollary).abs() <= REL_TOL_IDENTITY * five_term.abs(),
                "{five_term} vs {corollary}"
            );
        }
    }

    #[test]
    fn lipschitz_bound_increases_with_delay() {
        let base = BoundInputs {
            radius: 2.0,
            quasar: 0.5,
            horizon: 1000,
            eta: 0.01,
            path_variation: 5.0,
            lipschitz: Some(3.0),
            ..default_inputs()
        };
        let mut previous = bound_lipschitz(&base).unwrap();
        for d in [2, 4, 8, 16] {
            let inputs = BoundInputs {
                max_delay: d,
                ..base.clone()
            };
            let value = bound_lipschitz(&inputs).unwrap();
            assert!(value > previous);
            previous = value;
        }
    }

    #[test]
    fn quadratic_form_examples() {
        assert!((quadratic_form_bound(1.0, 0.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((quadratic_form_bound(1.0, 2.0, 0.0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_form_equals_squared_root_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let a = rng.random_range(1e-3..1.0);
            let b = rng.random_range(0.0..100.0);
            let c = rng.random_range(0.0..1e4);
            let direct = quadratic_form_bound(a, b, c);
            let root = (b + (b * b + 4.0 * a * c).sqrt()) / (2.0 * a);
            let squared = root * root;
            assert!(
                (direct - squared).abs() <= REL_TOL_IDENTITY * squared.max(1.0),
                "{direct} vs {squared}"
            );
        }
    }

    #[test]
    fn weakly_smooth_bound_delay_free_reduction() {
        // d = 1, Delta = Lambda = 0 collapses b to 0 and the bound to
        // c/a = (2R^2 + 3R V_T) / ((1 - alpha eta) kappa).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let alpha = rng.random_range(0.1..10.0);
            let eta = rng.random_range(0.01..0.99) / alpha;
            let inputs = BoundInputs {
                radius: rng.random_range(0.1..50.0),
                quasar: rng.random_range(0.01..1.0),
                max_delay: 1,
                horizon: 1000,
                eta,
                path_variation: rng.random_range(0.0..20.0),
                weak_smoothness: Some(rng.random_range(0.01..10.0)),
                alpha: Some(alpha),
                ..BoundInputs::default()
            };
            let bound = bound_weakly_smooth(&inputs).unwrap();
            let closed = (2.0 * inputs.radius * inputs.radius
                + 3.0 * inputs.radius * inputs.path_variation)
                / ((1.0 - alpha * eta) * inputs.quasar);
            assert!(
                (bound.value - closed).abs() <= REL_TOL_IDENTITY * closed,
                "{} vs {closed}",
                bound.value
            );
            assert_eq!(bound.b, 0.0);
        }
    }

    #[test]
    fn weakly_smooth_bound_rejects_threshold_violation() {
        let inputs = BoundInputs {
            weak_smoothness: Some(1.0),
            alpha: Some(2.0),
            eta: 0.5,
            ..default_inputs()
        };
        match bound_weakly_smooth(&inputs) {
            Err(Error::StepSizeThreshold { .. }) => {}
            other => panic!("expected threshold rejection, got {other:?}"),
        }
    }

    #[test]
    fn bandit_bound_reduces_to_weakly_smooth_at_zero_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let g = rng.random_range(0.1..5.0);
            let alpha = rng.random_range(0.1..5.0);
            let eta = rng.random_range(0.01..0.99) / alpha;
            let common = BoundInputs {
                radius: rng.random_range(0.5..20.0),
                quasar: rng.random_range(0.1..1.0),
                max_delay: rng.random_range(1..10),
                horizon: 500,
                eta,
                path_variation: rng.random_range(0.0..10.0),
                alpha: Some(alpha),
                ..BoundInputs::default()
            };
            let bandit = bound_bandit(&BoundInputs {
                smoothness: Some(g),
                dimension: Some(8),
                h_sums: Some((0.0, 0.0)),
                ..common.clone()
            })
            .unwrap();
            let weakly = bound_weakly_smooth(&BoundInputs {
                weak_smoothness: Some(2.0 * g),
                ..common
            })
            .unwrap();
            assert!(
                (bandit.value - weakly.value).abs() <= REL_TOL_IDENTITY * weakly.value.max(1.0)
            );
        }
    }

    #[test]
    fn bandit_bound_delay_free_zero_path_reduction() {
        // d = 1, h = 0, V = 0: bound = 2R^2 / ((1 - alpha_1 eta) kappa).
        let inputs = BoundInputs {
            radius: 3.0,
            quasar: 0.5,
            eta: 0.1,
            smoothness: Some(1.0),
            dimension: Some(4),
            h_sums: Some((0.0, 0.0)),
            alpha: Some(2.0),
            horizon: 100,
            ..default_inputs()
        };
        let bound = bound_bandit(&inputs).unwrap();
        let closed = 2.0 * 9.0 / ((1.0 - 0.2) * 0.5);
        assert!((bound.value - closed).abs() <= REL_TOL_IDENTITY * closed);
    }

    #[test]
    fn bandit_bound_monotone_in_probe_steps() {
        let base = BoundInputs {
            radius: 3.0,
            quasar: 0.5,
            max_delay: 4,
            horizon: 100,
            eta: 0.01,
            path_variation: 1.0,
            smoothness: Some(1.0),
            dimension: Some(6),
            alpha: Some(2.0),
            ..BoundInputs::default()
        };
        let mut previous = 0.0;
        for scale in [0.0, 0.5, 1.0, 2.0] {
            let inputs = BoundInputs {
                h_sums: Some((scale * 10.0, scale * scale * 5.0)),
                ..base.clone()
            };
            let value = bound_bandit(&inputs).unwrap().value;
            assert!(value >= previous);
            previous = value;
        }
    }

    #[test]
    fn lemma_rearrangement_is_exact_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for t_max in 1..=30 {
            for d in 1..=6 {
                for _ in 0..20 {
                    let values: Vec<f64> =
                        (0..t_max).map(|_| rng.random_range(0.0..10.0)).collect();
                    let direct = lemma_double_sum_direct(&values, d);
                    let rearranged = lemma_double_sum_rearranged(&values, d);
                    assert!(
                        (direct - rearranged).abs() <= 1e-12 * direct.max(1.0),
                        "T={t_max}, d={d}: {direct} vs {rearranged}"
                    );
                    assert!(direct <= lemma_double_sum_bound(&values, d) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn lemma_rearrangement_small_case_by_hand() {
        // T = 3, d = 2: direct = a_2 + a_3; the count of t values hitting
        // k = 2 is 1 only because the lower limit clamps at 1.
        let values = [5.0, 7.0, 11.0];
        assert_eq!(lemma_double_sum_direct(&values, 2), 18.0);
        assert_eq!(lemma_double_sum_rearranged(&values, 2), 18.0);
        assert_eq!(lemma_double_sum_bound(&values, 2), 23.0);
    }
}
