//! Comparator drift and the path-variation price of chasing it.
//!
//! A minimizer that moves by t^(-a) each round accumulates path variation
//! V_T that grows like T^(1-a), so larger exponents mean a calmer target.
//! Replaying the same feature realization against several exponents shows
//! regret falling as the target settles down.

use dogd::analysis::path_variation;
use dogd::bench::{ProviderSpec, ProviderStream};
use dogd::delay::DelaySchedule;
use dogd::descent::{run, step_size_weakly_smooth, RunSettings, StepSizePolicy};
use dogd::geometry::{FeasibleBall, FeasibleSet};
use dogd::losses::{sigmoid_prime, DriftDirection, MinimizerDrift};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> dogd::Result<()> {
    let ball = FeasibleBall::new(12, 1.0)?;
    let horizon = 5000_u64;

    // One drifting path per exponent, all from the same start.
    println!("path variation of a t^(-a) drift over T={horizon} rounds");
    println!("{:>8} {:>12}", "a", "V_T");
    for a in [0.125, 0.5, 1.0] {
        let drift = MinimizerDrift::new(0.1, a, DriftDirection::UnitSphere)?;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut current = ball.project(&vec![0.2; 12])?;
        let mut path = vec![current.clone()];
        for t in 1..horizon {
            current = drift.step(&current, t, &ball, &mut rng)?;
            path.push(current.clone());
        }
        println!("{:>8} {:>12.3}", a, path_variation(&path));
    }

    // The same effect inside a full run: sigmoid regression at delay 4,
    // identical features per round, one comparator path per exponent.
    let (horizon, dimension, radius, delay) = (3000_u64, 20_usize, 1.0_f64, 4_u32);
    let exponents = vec![0.125, 0.5, 1.0];
    let spec = ProviderSpec::Glm {
        dimension,
        radius,
        samples: 200,
        drift_scale: 0.25,
        drift_exponents: exponents.clone(),
    };
    let gamma = 0.125;
    let quasar = (8.0 * sigmoid_prime(radius)).min(1.0);
    let eta = step_size_weakly_smooth(quasar, gamma, delay, 0.99)?;
    let set = FeasibleBall::new(dimension, radius)?;
    let start = set.project(&vec![1.0; dimension])?;
    let schedule = DelaySchedule::constant(delay, horizon)?;
    let policy = StepSizePolicy::Constant { eta };

    // Averages over a few feature realizations; one run can land either
    // way for neighboring exponents once the target is nearly still.
    let reps = 4_u64;
    println!();
    println!("sigmoid regression at delay {delay}: calmer targets cost less (mean of {reps} reps)");
    println!("{:>8} {:>12} {:>14} {:>12}", "a", "V_T", "regret R_T", "R_T / T");
    for (group, a) in exponents.iter().enumerate() {
        let mut variation = 0.0;
        let mut regret = 0.0;
        for rep in 0..reps {
            let mut stream = ProviderStream::new(&spec, 29 + rep, horizon, group)?;
            let settings = RunSettings {
                oracle: &dogd::oracles::OracleKind::Exact,
                schedule: &schedule,
                policy: &policy,
                iterate_set: &set,
                probe_set: &set,
                initial: &start,
                record_trajectory: false,
            };
            let outcome = run(&mut stream, &settings)?;
            variation += outcome.ledger.path_variation();
            regret += outcome.ledger.dynamic_regret()?;
        }
        variation /= reps as f64;
        regret /= reps as f64;
        println!(
            "{:>8} {:>12.3} {:>14.3} {:>12.6}",
            a,
            variation,
            regret,
            regret / horizon as f64
        );
    }
    Ok(())
}
