//! Quadratic fractional losses: curvature certificates and the offline
//! subsolver.
//!
//! A ratio of a positive definite quadratic to a positive affine-quadratic
//! denominator is quasiconvex but not convex. With a certified denominator
//! window m <= q(x) <= M it is kappa-quasar-convex for kappa = m/M, smooth
//! with a computable G, and even strongly quasar-convex for a family of
//! (kappa, gamma) pairs. The projected-descent subsolver locates the
//! constrained minimizer, and the quasar inequality is then checked against
//! it at random feasible points.

use dogd::descent::{offline_solve, step_size_weakly_smooth, SolveSettings};
use dogd::geometry::{FeasibleBall, FeasibleSet};
use dogd::linalg::{dot, norm};
use dogd::losses::{Loss, QuadFracLoss};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dogd::Result<()> {
    let p = 6;
    let ball = FeasibleBall::new(p, 3.0)?;

    // Diagonally dominant numerator matrix, mildly tilted denominator.
    let mut a_mat = vec![0.0; p * p];
    for i in 0..p {
        a_mat[i * p + i] = 1.0 + 0.1 * i as f64;
        if i + 1 < p {
            a_mat[i * p + i + 1] = 0.2;
            a_mat[(i + 1) * p + i] = 0.2;
        }
    }
    let a_vec = vec![0.3; p];
    let mut b_vec = vec![0.0; p];
    b_vec[0] = 0.2;
    let beta = 2.0;
    // The denominator b'x + beta ranges over [beta - ||b|| R, beta + ||b|| R].
    let (denom_lo, denom_hi) = (beta - 0.2 * ball.radius(), beta + 0.2 * ball.radius());
    let loss = QuadFracLoss::new(
        a_mat,
        a_vec,
        5.0,
        None,
        b_vec,
        beta,
        &ball,
        denom_lo,
        denom_hi,
    )?;

    let certificates = loss.certificates(ball.radius())?;
    let smoothness = certificates
        .constants
        .smoothness
        .expect("fractional losses certify G");
    println!("certificates over the radius-{} ball", ball.radius());
    println!("  denominator window  [{denom_lo}, {denom_hi}]");
    println!("  kappa = m/M         {:.6}", certificates.constants.quasar);
    println!("  smoothness G        {smoothness:.6}");
    println!(
        "  quadratic growth    {:.6} (from sigma_min = {:.4})",
        certificates.quadratic_growth(),
        certificates.sigma_min
    );
    println!("  strong quasar-convexity pairs (kappa_lambda, gamma_lambda):");
    for lambda in [0.25, 0.5, 0.75] {
        let (kappa_l, gamma_l) = certificates.lambda_family(lambda)?;
        println!("    lambda={lambda:<5} ({kappa_l:.6}, {gamma_l:.6})");
    }

    // Locate the constrained minimizer with projected descent.
    let eta = step_size_weakly_smooth(certificates.constants.quasar, 2.0 * smoothness, 1, 0.99)?;
    let settings = SolveSettings::first_order(&ball, eta);
    let solve = offline_solve(&loss, &vec![0.0; p], &settings)?;
    println!();
    println!(
        "subsolver: {} iterations, converged = {}",
        solve.iterations, solve.converged
    );
    println!(
        "  minimizer norm {:.6}, value {:.8}",
        norm(&solve.minimizer),
        solve.value
    );

    // Quasar convexity at the solved minimizer: for every feasible x,
    // f(x*) >= f(x) + (1/kappa) <grad f(x), x* - x>.
    let kappa = certificates.constants.quasar;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..2000 {
        let draw: Vec<f64> = (0..p).map(|_| rng.random_range(-4.0..4.0)).collect();
        let x = ball.project(&draw)?;
        let gradient = loss.gradient(&x);
        let offset: Vec<f64> = solve
            .minimizer
            .iter()
            .zip(&x)
            .map(|(s, xi)| s - xi)
            .collect();
        let violation = loss.value(&x) + dot(&gradient, &offset) / kappa - solve.value;
        worst = worst.max(violation);
    }
    println!("  worst quasar-inequality violation over 2000 points: {worst:.2e} (non-positive means it holds)");
    Ok(())
}
