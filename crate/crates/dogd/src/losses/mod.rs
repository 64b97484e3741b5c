//! Loss families and the per-round stream abstraction.
//!
//! Each family implements [`Loss`] (value and gradient at feasible points)
//! and exposes certified curvature constants through [`LossConstants`]:
//!
//! * `quasar`: the constant `kappa` of quasar-convexity with respect to the
//!   round's minimizer, `f(x*) >= f(x) + (1/kappa) <grad f(x), x* - x>`.
//! * `lipschitz`: a bound `L` on the gradient norm over the feasible set.
//! * `weak_smoothness`: a constant `Gamma` with
//!   `||grad f(x)||^2 <= Gamma (f(x) - f(x*))`.
//! * `smoothness`: a bound `G` on the Hessian norm; a `G`-smooth function is
//!   `2G`-weakly smooth, which is how the zeroth-order analysis consumes it.
//! * `strong_quasar`: a pair `(kappa, gamma)` strengthening quasar-convexity
//!   by a quadratic term `(gamma/2) ||x* - x||^2`.
//!
//! Absent entries mean "no certificate", and downstream consumers that need
//! one (bound evaluators, error-bound bookkeeping) refuse to run rather than
//! silently assume a value.

pub mod drift;
pub mod glm;
pub mod quadfrac;
pub mod radial;

pub use drift::{DriftDirection, MinimizerDrift};
pub use glm::{sigmoid, sigmoid_prime, GlmLoss};
pub use quadfrac::{QfCertificates, QfDrift, QuadFracLoss};
pub use radial::{radial_constants, RadialLoss};

/// Curvature certificates for a loss over a fixed feasible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConstants {
    /// Quasar-convexity constant `kappa` in `(0, 1]`.
    pub quasar: f64,
    /// Gradient-norm bound `L`, when certified.
    pub lipschitz: Option<f64>,
    /// Weak-smoothness constant `Gamma`, when certified.
    pub weak_smoothness: Option<f64>,
    /// Smoothness (Hessian-norm) bound `G`, when certified.
    pub smoothness: Option<f64>,
    /// Strong quasar-convexity pair `(kappa, gamma)`, when certified.
    pub strong_quasar: Option<(f64, f64)>,
}

/// A differentiable loss on a subset of `R^p`.
pub trait Loss: Sync {
    /// Ambient dimension `p`.
    fn dimension(&self) -> usize;

    /// Function value at `x`.
    fn value(&self, x: &[f64]) -> f64;

    /// Writes the gradient at `x` into `out`.
    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    /// Gradient at `x` as a fresh vector.
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        self.gradient_into(x, &mut out);
        out
    }

    /// Value and gradient in one pass. Families whose value and gradient
    /// share intermediate quantities override this.
    fn value_and_gradient_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        self.gradient_into(x, out);
        self.value(x)
    }
}

impl<T: Loss + ?Sized> Loss for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient_into(x, out)
    }
    fn value_and_gradient_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        (**self).value_and_gradient_into(x, out)
    }
}

/// One round of an online sequence: the loss revealed at round `t` together
/// with its per-round minimizer (the comparator of dynamic regret).
pub struct Round<'a> {
    /// The loss `f_t`.
    pub loss: &'a dyn Loss,
    /// The comparator `x*_t`, a minimizer of `f_t` over the feasible set.
    pub minimizer: &'a [f64],
    /// `f_t(x*_t)` when known analytically; `None` asks the consumer to
    /// evaluate the loss at the minimizer.
    pub minimum_value: Option<f64>,
}

/// A finite sequence of rounds revealed one at a time.
///
/// `next_round` is called exactly once for `t = 1, ..., horizon()` in
/// increasing order; the returned view borrows storage owned by the stream
/// and is consumed before the next call.
pub trait LossStream {
    /// Ambient dimension `p`.
    fn dimension(&self) -> usize;

    /// Number of rounds `T`.
    fn horizon(&self) -> u64;

    /// Reveals the next round.
    fn next_round(&mut self) -> Round<'_>;
}


/// A stream backed by pre-generated rounds, mainly for tests and examples.
pub struct StoredStream<L: Loss> {
    rounds: Vec<(L, Vec<f64>, Option<f64>)>,
    cursor: usize,
    dimension: usize,
}

impl<L: Loss> StoredStream<L> {
    /// Wraps `(loss, minimizer, minimum_value)` triples.
    pub fn new(rounds: Vec<(L, Vec<f64>, Option<f64>)>) -> Self {
        assert!(!rounds.is_empty(), "stream needs at least one round");
        let dimension = rounds[0].0.dimension();
        Self {
            rounds,
            cursor: 0,
            dimension,
        }
    }
}

impl<L: Loss> LossStream for StoredStream<L> {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn horizon(&self) -> u64 {
        self.rounds.len() as u64
    }

    fn next_round(&mut self) -> Round<'_> {
        let (loss, minimizer, minimum) = &self.rounds[self.cursor];
        self.cursor += 1;
        Round {
            loss,
            minimizer,
            minimum_value: *minimum,
        }
    }
}
