//! Certified dynamic-regret bounds next to realized regret.
//!
//! Two runs with exact feedback: a Lipschitz radial stream whose minimizer
//! stays put, and a weakly smooth sigmoid-regression stream whose minimizer
//! drifts. Each realized regret is compared against the matching bound
//! evaluated at the certified constants, and the weakly smooth bound is
//! shown refusing a step size above its threshold.

use dogd::analysis::{bound_lipschitz, bound_weakly_smooth, BoundInputs};
use dogd::bench::{ProviderSpec, ProviderStream};
use dogd::delay::DelaySchedule;
use dogd::descent::{run, step_size_weakly_smooth, RunSettings, StepSizePolicy};
use dogd::geometry::{FeasibleBall, FeasibleSet};
use dogd::losses::{radial_constants, sigmoid_prime};
use dogd::oracles::OracleKind;

fn main() -> dogd::Result<()> {
    lipschitz_side()?;
    weakly_smooth_side()?;
    Ok(())
}

fn lipschitz_side() -> dogd::Result<()> {
    let (horizon, dimension, radius, delay) = (3000_u64, 15_usize, 4.0_f64, 6_u32);
    let spec = ProviderSpec::Radial {
        dimension,
        radius,
        amplitude_cap: 1.0,
        frequency_cap: 2.5,
    };
    let constants = radial_constants(dimension, 1.0, 2.5, radius);
    let lipschitz = constants
        .lipschitz
        .expect("the radial family always certifies L");
    let ball = FeasibleBall::new(dimension, radius)?;
    let start = ball.project(&vec![1.0; dimension])?;

    let mut stream = ProviderStream::new(&spec, 5, horizon, 0)?;
    let schedule = DelaySchedule::constant(delay, horizon)?;
    let policy = StepSizePolicy::LipschitzOptimal {
        radius,
        lipschitz,
        horizon,
        max_delay: delay,
        path_variation: 0.0,
    };
    let settings = RunSettings {
        oracle: &OracleKind::Exact,
        schedule: &schedule,
        policy: &policy,
        iterate_set: &ball,
        probe_set: &ball,
        initial: &start,
        record_trajectory: false,
    };
    let outcome = run(&mut stream, &settings)?;
    let realized = outcome.ledger.dynamic_regret()?;

    let inputs = BoundInputs {
        radius,
        quasar: constants.quasar,
        max_delay: delay,
        horizon,
        eta: outcome.eta,
        path_variation: outcome.ledger.path_variation(),
        lipschitz: Some(lipschitz),
        ..BoundInputs::default()
    };
    let certified = bound_lipschitz(&inputs)?;
    println!("Lipschitz radial stream (T={horizon}, d={delay}, exact feedback)");
    println!("  realized regret  {realized:14.3}");
    println!("  certified bound  {certified:14.3}");
    println!("  slack factor     {:14.3}", certified / realized);
    Ok(())
}

fn weakly_smooth_side() -> dogd::Result<()> {
    let (horizon, dimension, radius, delay) = (3000_u64, 20_usize, 1.0_f64, 4_u32);
    let spec = ProviderSpec::Glm {
        dimension,
        radius,
        samples: 200,
        drift_scale: 0.05,
        drift_exponents: vec![0.5],
    };
    // Unit-normalized feature rows certify Gamma = 1/8; the curvature
    // constant comes from the steepest sigmoid margin reachable in the ball.
    let gamma = 0.125;
    let quasar = (8.0 * sigmoid_prime(radius)).min(1.0);
    let eta = step_size_weakly_smooth(quasar, gamma, delay, 0.99)?;
    let ball = FeasibleBall::new(dimension, radius)?;
    let start = ball.project(&vec![1.0; dimension])?;

    let mut stream = ProviderStream::new(&spec, 5, horizon, 0)?;
    let schedule = DelaySchedule::constant(delay, horizon)?;
    let policy = StepSizePolicy::Constant { eta };
    let settings = RunSettings {
        oracle: &OracleKind::Exact,
        schedule: &schedule,
        policy: &policy,
        iterate_set: &ball,
        probe_set: &ball,
        initial: &start,
        record_trajectory: false,
    };
    let outcome = run(&mut stream, &settings)?;
    let realized = outcome.ledger.dynamic_regret()?;
    let realized_path = outcome.ledger.path_variation();

    let d = f64::from(delay);
    let alpha = (d + 2.0 * d.sqrt() * (d - 1.0)) * gamma / (2.0 * quasar);
    let inputs = BoundInputs {
        radius,
        quasar,
        max_delay: delay,
        horizon,
        eta,
        path_variation: realized_path,
        weak_smoothness: Some(gamma),
        alpha: Some(alpha),
        ..BoundInputs::default()
    };
    let certified = bound_weakly_smooth(&inputs)?;
    println!();
    println!("weakly smooth sigmoid regression (T={horizon}, d={delay}, drifting minimizer)");
    println!("  realized V_T     {realized_path:14.3}");
    println!("  realized regret  {realized:14.3}");
    println!("  certified bound  {:14.3}", certified.value);
    println!(
        "  quadratic form   a={:.4} b={:.4} c={:.4}",
        certified.a, certified.b, certified.c
    );

    // The quadratic form only solves when eta stays under 1/alpha; a step
    // size past the threshold is refused rather than extrapolated.
    let rejected = BoundInputs {
        eta: 1.01 / alpha,
        ..inputs
    };
    match bound_weakly_smooth(&rejected) {
        Err(err) => println!("  eta past the threshold: {err}"),
        Ok(_) => unreachable!("eta above 1/alpha must be refused"),
    }
    Ok(())
}
