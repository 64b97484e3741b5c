//! Projection onto a Euclidean ball and the shrunken set that keeps
//! zeroth-order probes feasible.
//!
//! Three facts the solver relies on: projection leaves interior points
//! alone and rescales exterior ones onto the sphere, projection never
//! increases distances, and an iterate held inside the shrunken ball can be
//! probed along every coordinate axis without leaving the full set.

use dogd::geometry::{FeasibleBall, FeasibleSet};
use dogd::linalg::{distance, norm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point<R: Rng>(rng: &mut R, dimension: usize, span: f64) -> Vec<f64> {
    (0..dimension).map(|_| rng.random_range(-span..span)).collect()
}

fn main() -> dogd::Result<()> {
    let ball = FeasibleBall::new(3, 2.0)?;

    println!("projection onto the radius-2 ball in R^3");
    let inside = [0.3, -0.4, 0.5];
    let outside = [3.0, 0.0, -4.0];
    let projected = ball.project(&outside)?;
    println!("  {:?} stays put: {:?}", inside, ball.project(&inside)?);
    println!(
        "  {:?} (norm {}) lands on the sphere: {:?} (norm {})",
        outside,
        norm(&outside),
        projected,
        norm(&projected)
    );

    // Projection is 1-Lipschitz; the worst observed expansion over random
    // pairs should never exceed 1.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0_f64;
    for _ in 0..2000 {
        let x = random_point(&mut rng, 3, 6.0);
        let y = random_point(&mut rng, 3, 6.0);
        let before = distance(&x, &y);
        if before == 0.0 {
            continue;
        }
        let after = distance(&ball.project(&x)?, &ball.project(&y)?);
        worst = worst.max(after / before);
    }
    println!("  largest distance ratio after projecting 2000 pairs: {worst:.12}");

    // The zeroth-order mode keeps iterates in the shrunken ball so that
    // axis probes of step h stay inside the full set.
    let full = FeasibleBall::new(8, 10.0)?;
    let h = 1.0;
    let probes = full.shrink(h)?;
    println!();
    println!(
        "shrunken ball: radius {} with margin {} inside radius {}",
        probes.effective_radius(),
        probes.margin(),
        full.radius()
    );
    let mut checked = 0;
    for _ in 0..500 {
        let x = probes.project(&random_point(&mut rng, 8, 20.0))?;
        for i in 0..8 {
            let mut probe = x.clone();
            probe[i] += h;
            assert!(full.contains(&probe, 1e-12));
            checked += 1;
        }
    }
    println!("  {checked} axis probes of step {h} all stayed feasible");
    Ok(())
}
