//! Feasible sets and Euclidean projection.
//!
//! The algorithms operate over a closed Euclidean ball `X = {x : ||x|| <= R}`
//! centered at the origin. Zeroth-order mode additionally needs the shrunken
//! set `(1 - h/R) X`, a ball of radius `R - h`, chosen so that every
//! finite-difference query `x + h_t e_i` launched from inside it stays
//! feasible for the original set.

use crate::error::{Error, Result};
use crate::linalg::{all_finite, norm};

/// A closed convex feasible set supporting Euclidean projection.
pub trait FeasibleSet: Sync {
    /// Ambient dimension `p`.
    fn dimension(&self) -> usize;

    /// Radius of the largest origin-centered ball contained in the set.
    /// For balls this is simply the radius.
    fn effective_radius(&self) -> f64;

    /// Projects `x` onto the set in place.
    fn project_mut(&self, x: &mut [f64]) -> Result<()>;

    /// Membership test with relative slack `tol` on the defining constraint.
    fn contains(&self, x: &[f64], tol: f64) -> bool;

    /// Projects `x` onto the set, returning a new vector.
    fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = x.to_vec();
        self.project_mut(&mut out)?;
        Ok(out)
    }
}

/// Closed ball of radius `radius` centered at the origin.
#[derive(Debug, Clone)]
pub struct FeasibleBall {
    dimension: usize,
    radius: f64,
}

impl FeasibleBall {
    /// Creates a ball; the radius must be finite and positive.
    pub fn new(dimension: usize, radius: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter {
                name: "dimension",
                reason: "must be at least 1".into(),
            });
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: format!("must be finite and positive, got {radius}"),
            });
        }
        Ok(Self { dimension, radius })
    }

    /// Ball radius `R`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The shrunken set `(1 - h/R) X`, a ball of radius `R - h`.
    ///
    /// Requires `0 < h < R`. Points of the shrunken set keep a margin of
    /// `h` to the boundary of `X`, so coordinate perturbations of size at
    /// most `h` remain feasible for `X`.
    pub fn shrink(&self, h: f64) -> Result<ShrunkenBall> {
        if !h.is_finite() || h <= 0.0 || h >= self.radius {
            return Err(Error::InvalidParameter {
                name: "h",
                reason: format!(
                    "shrinkage must satisfy 0 < h < R = {}, got {h}",
                    self.radius
                ),
            });
        }
        Ok(ShrunkenBall {
            dimension: self.dimension,
            base_radius: self.radius,
            margin: h,
        })
    }
}

/// Projects onto an origin-centered ball of the given radius.
fn project_onto_ball(x: &mut [f64], radius: f64) -> Result<()> {
    if !all_finite(x) {
        return Err(Error::NonFinite("projection input"));
    }
    let n = norm(x);
    if n > radius {
        let scale = radius / n;
        for v in x.iter_mut() {
            *v *= scale;
        }
    }
    Ok(())
}

/// Ball membership with relative tolerance on the radius.
fn ball_contains(x: &[f64], radius: f64, tol: f64) -> bool {
    all_finite(x) && norm(x) <= radius * (1.0 + tol)
}

impl FeasibleSet for FeasibleBall {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn effective_radius(&self) -> f64 {
        self.radius
    }

    fn project_mut(&self, x: &mut [f64]) -> Result<()> {
        self.check_dimension(x)?;
        project_onto_ball(x, self.radius)
    }

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dimension && ball_contains(x, self.radius, tol)
    }
}

impl FeasibleBall {
    fn check_dimension(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                context: "ball projection",
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// The shrunken feasible set `(1 - h/R) X`: a ball of radius `R - h`.
///
/// Iterates of the zeroth-order algorithm live here while its comparator
/// ranges over the full set; the gap between the two is controlled by the
/// margin `h`.
#[derive(Debug, Clone)]
pub struct ShrunkenBall {
    dimension: usize,
    base_radius: f64,
    margin: f64,
}

impl ShrunkenBall {
    /// Radius `R` of the original set.
    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    /// The margin `h` kept to the boundary of the original set.
    pub fn margin(&self) -> f64 {
        self.margin
    }
}

impl FeasibleSet for ShrunkenBall {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn effective_radius(&self) -> f64 {
        self.base_radius - self.margin
    }

    fn project_mut(&self, x: &mut [f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                context: "shrunken-ball projection",
                expected: self.dimension,
                got: x.len(),
            });
        }
        project_onto_ball(x, self.base_radius - self.margin)
    }

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dimension && ball_contains(x, self.base_radius - self.margin, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Membership slack used throughout the crate.
    const MEMBERSHIP_TOL: f64 = 1e-12;

    /// Tolerance for the variational-inequality optimality certificate.
    const VI_ATOL: f64 = 1e-9;

    fn random_vector(rng: &mut ChaCha8Rng, p: usize, scale: f64) -> Vec<f64> {
        (0..p).map(|_| rng.random_range(-scale..scale)).collect()
    }

    /// Independent optimality certificate for Euclidean projection: z is the
    /// projection of x onto convex C iff <x - z, y - z> <= 0 for all y in C.
    /// Checked against many random feasible points before the closed form
    /// was trusted anywhere else.
    #[test]
    fn projection_satisfies_variational_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ball = FeasibleBall::new(6, 2.5).unwrap();
        for _ in 0..200 {
            let x = random_vector(&mut rng, 6, 8.0);
            let z = ball.project(&x).unwrap();
            assert!(ball.contains(&z, MEMBERSHIP_TOL));
            for _ in 0..50 {
                let mut y = random_vector(&mut rng, 6, 2.5);
                ball.project_mut(&mut y).unwrap();
                let mut inner = 0.0;
                for i in 0..6 {
                    inner += (x[i] - z[i]) * (y[i] - z[i]);
                }
                assert!(inner <= VI_ATOL, "VI violated: {inner}");
            }
        }
    }

    #[test]
    fn interior_points_are_fixed() {
        let ball = FeasibleBall::new(3, 5.0).unwrap();
        let x = vec![1.0, -2.0, 0.5];
        assert_eq!(ball.project(&x).unwrap(), x);
    }

    #[test]
    fn exterior_points_land_on_boundary() {
        let ball = FeasibleBall::new(2, 1.0).unwrap();
        let z = ball.project(&[3.0, 4.0]).unwrap();
        assert!((z[0] - 0.6).abs() < 1e-15);
        assert!((z[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_finite_and_mismatched_input() {
        let ball = FeasibleBall::new(2, 1.0).unwrap();
        assert!(ball.project(&[f64::NAN, 0.0]).is_err());
        assert!(ball.project(&[1.0, 2.0, 3.0]).is_err());
        assert!(FeasibleBall::new(0, 1.0).is_err());
        assert!(FeasibleBall::new(2, -1.0).is_err());
    }

    #[test]
    fn shrink_validates_margin() {
        let ball = FeasibleBall::new(4, 10.0).unwrap();
        assert!(ball.shrink(0.0).is_err());
        assert!(ball.shrink(10.0).is_err());
        let sh = ball.shrink(1.0).unwrap();
        assert_eq!(sh.effective_radius(), 9.0);
        assert_eq!(sh.base_radius(), 10.0);
    }

    #[test]
    fn shrunken_points_admit_coordinate_probes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ball = FeasibleBall::new(5, 3.0).unwrap();
        let h = 0.25;
        let sh = ball.shrink(h).unwrap();
        for _ in 0..200 {
            let mut x = random_vector(&mut rng, 5, 6.0);
            sh.project_mut(&mut x).unwrap();
            for i in 0..5 {
                let mut probe = x.clone();
                probe[i] += h;
                assert!(ball.contains(&probe, MEMBERSHIP_TOL));
                probe[i] -= 2.0 * h;
                assert!(ball.contains(&probe, MEMBERSHIP_TOL));
            }
        }
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(
            coords in proptest::collection::vec(-100.0_f64..100.0, 1..8),
            radius in 0.1_f64..50.0,
        ) {
            let ball = FeasibleBall::new(coords.len(), radius).unwrap();
            let once = ball.project(&coords).unwrap();
            let twice = ball.project(&once).unwrap();
            for i in 0..coords.len() {
                prop_assert!((once[i] - twice[i]).abs() <= 1e-15 * radius);
            }
            prop_assert!(ball.contains(&once, MEMBERSHIP_TOL));
        }

        #[test]
        fn projection_is_nonexpansive(
            a in proptest::collection::vec(-100.0_f64..100.0, 4),
            b in proptest::collection::vec(-100.0_f64..100.0, 4),
            radius in 0.1_f64..50.0,
        ) {
            let ball = FeasibleBall::new(4, radius).unwrap();
            let pa = ball.project(&a).unwrap();
            let pb = ball.project(&b).unwrap();
            let before = crate::linalg::distance(&a, &b);
            let after = crate::linalg::distance(&pa, &pb);
            prop_assert!(after <= before + 1e-12 * before.max(1.0));
        }
    }
}
