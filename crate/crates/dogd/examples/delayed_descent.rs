//! Projected gradient descent under delayed feedback.
//!
//! The same seeded stream of radial losses is replayed at several constant
//! delays and once under uniformly random delays. Feedback for round t only
//! arrives at the end of round t + d_t - 1, so larger delays act on staler
//! information: the step size must shrink with the worst-case delay, the
//! optimality gap takes longer to fall, and regret grows. The d = 1 row is
//! plain projected online gradient descent.

use dogd::bench::{ProviderSpec, ProviderStream};
use dogd::delay::DelaySchedule;
use dogd::descent::{run, RunSettings, StepSizePolicy};
use dogd::geometry::{FeasibleBall, FeasibleSet};
use dogd::losses::radial_constants;
use dogd::oracles::OracleKind;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GAP_TARGET: f64 = 0.1;

fn main() -> dogd::Result<()> {
    let (horizon, dimension, radius) = (4000_u64, 10_usize, 2.0_f64);
    let (amplitude_cap, frequency_cap) = (1.0, 2.5);
    let spec = ProviderSpec::Radial {
        dimension,
        radius,
        amplitude_cap,
        frequency_cap,
    };
    let constants = radial_constants(dimension, amplitude_cap, frequency_cap, radius);
    let lipschitz = constants
        .lipschitz
        .expect("the radial family always certifies L");
    let ball = FeasibleBall::new(dimension, radius)?;
    let start = ball.project(&vec![0.3; dimension])?;

    println!("radial stream: T={horizon} p={dimension} R={radius} L={lipschitz:.3}");
    println!(
        "{:>12} {:>12} {:>14} {:>12} {:>18}",
        "delays", "eta", "regret R_T", "R_T / T", "rounds to gap<0.1"
    );
    for delay in [1_u32, 5, 20] {
        let schedule = DelaySchedule::constant(delay, horizon)?;
        let label = format!("d={delay}");
        report(&spec, &ball, &start, lipschitz, schedule, &label)?;
    }

    // A random schedule with the same worst case as the largest constant
    // one; regret lands between the constant extremes.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let schedule = DelaySchedule::uniform(20, horizon, &mut rng)?;
    report(&spec, &ball, &start, lipschitz, schedule, "d~U[1,20]")?;
    Ok(())
}

fn report(
    spec: &ProviderSpec,
    ball: &FeasibleBall,
    start: &[f64],
    lipschitz: f64,
    schedule: DelaySchedule,
    label: &str,
) -> dogd::Result<()> {
    let horizon = schedule.horizon();
    // Replaying from the same seed gives every schedule the identical loss
    // sequence, so rows differ only in delay.
    let mut stream = ProviderStream::new(spec, 11, horizon, 0)?;
    let policy = StepSizePolicy::LipschitzOptimal {
        radius: ball.radius(),
        lipschitz,
        horizon,
        max_delay: schedule.d_max(),
        path_variation: 0.0,
    };
    let settings = RunSettings {
        oracle: &OracleKind::Exact,
        schedule: &schedule,
        policy: &policy,
        iterate_set: ball,
        probe_set: ball,
        initial: start,
        record_trajectory: false,
    };
    let outcome = run(&mut stream, &settings)?;
    let regret = outcome.ledger.dynamic_regret()?;
    let smoothed = outcome.ledger.smoothed_gap_series(50)?;
    let crossing = smoothed
        .iter()
        .position(|&g| g < GAP_TARGET)
        .map_or_else(|| "-".to_string(), |i| (i + 1).to_string());
    println!(
        "{:>12} {:>12.6} {:>14.2} {:>12.6} {:>18}",
        label,
        outcome.eta,
        regret,
        regret / horizon as f64,
        crossing
    );
    Ok(())
}
