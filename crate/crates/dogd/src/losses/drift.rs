//! Slowly moving comparators.
//!
//! The non-stationary experiments move the per-round minimizer by a
//! projected random walk with polynomially decaying step,
//!
//! ```text
//! x*_{t+1} = P_X( x*_t + scale * t^(-exponent) * v_t ),
//! ```
//!
//! so the path variation `V_T = sum_t ||x*_{t+1} - x*_t||` is finite-rate
//! tunable through the exponent. The direction `v_t` is either a standard
//! Gaussian draw or a uniform draw from the unit sphere; the latter makes
//! the displacement magnitude exactly `scale * t^(-exponent)` whenever the
//! projection is inactive.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{FeasibleBall, FeasibleSet};
use crate::linalg::norm;

/// Law of the drift direction `v_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftDirection {
    /// `v_t ~ N(0, I_p)`; displacement magnitude concentrates around
    /// `scale * t^(-exponent) * sqrt(p)`.
    Gaussian,
    /// `v_t` uniform on the unit sphere; displacement magnitude is exactly
    /// `scale * t^(-exponent)` away from the boundary.
    UnitSphere,
}

/// A projected random walk for the per-round minimizer.
#[derive(Debug, Clone)]
pub struct MinimizerDrift {
    scale: f64,
    exponent: f64,
    direction: DriftDirection,
}

impl MinimizerDrift {
    /// Drift with displacement `scale * t^(-exponent)`; `scale >= 0` and a
    /// finite exponent are required. `exponent = 0` gives a constant-speed
    /// walk, larger exponents give decaying speed.
    pub fn new(scale: f64, exponent: f64, direction: DriftDirection) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: format!("must be finite and nonnegative, got {scale}"),
            });
        }
        if !exponent.is_finite() {
            return Err(Error::InvalidParameter {
                name: "exponent",
                reason: "must be finite".into(),
            });
        }
        Ok(Self {
            scale,
            exponent,
            direction,
        })
    }

    /// Magnitude multiplier at round `t`, `scale * t^(-exponent)`.
    pub fn step_scale(&self, t: u64) -> f64 {
        self.scale * (t as f64).powf(-self.exponent)
    }

    /// Advances the comparator one round: draws `v_t`, takes the step, and
    /// projects back onto the ball.
    pub fn step<R: Rng + ?Sized>(
        &self,
        current: &[f64],
        t: u64,
        ball: &FeasibleBall,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let raw: Vec<f64> = (0..current.len())
            .map(|_| StandardNormal.sample(rng))
            .collect();
        self.step_along(current, t, ball, &raw)
    }

    /// The same update with a caller-supplied raw Gaussian draw, so that
    /// several drift processes can move along one shared direction.
    pub fn step_along(
        &self,
        current: &[f64],
        t: u64,
        ball: &FeasibleBall,
        raw_direction: &[f64],
    ) -> Result<Vec<f64>> {
        if current.len() != ball.dimension() || raw_direction.len() != ball.dimension() {
            return Err(Error::DimensionMismatch {
                context: "drift state",
                expected: ball.dimension(),
                got: current.len().min(raw_direction.len()),
            });
        }
        if t == 0 {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: "rounds are 1-based".into(),
            });
        }
        let mut v = raw_direction.to_vec();
        if self.direction == DriftDirection::UnitSphere {
            let n = norm(&v).max(f64::MIN_POSITIVE);
            v.iter_mut().for_each(|z| *z /= n);
        }
        let s = self.step_scale(t);
        let mut next = current.to_vec();
        for i in 0..next.len() {
            next[i] += s * v[i];
        }
        ball.project_mut(&mut next)?;
        Ok(next)
    }
}
