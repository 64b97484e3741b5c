//! Gradient estimation from function values only.
//!
//! First the two finite-difference estimators are measured against the true
//! gradient of a smooth fractional loss, next to the certified error bound
//! sqrt(p) G h / 2 of the forward scheme. Then a full zeroth-order run is
//! compared with its exact-feedback twin on the same realization: the
//! iterates live in a shrunken ball so every probe stays feasible, each
//! round costs p + 1 evaluations instead of 1, and the bookkeeping of the
//! per-round error certificates matches the closed-form schedule sums.

use dogd::analysis::bandit_cumulative_errors;
use dogd::bench::{quadfrac_certificates, ProviderSpec, ProviderStream};
use dogd::delay::DelaySchedule;
use dogd::descent::{run, step_size_weakly_smooth, RunSettings, StepSizePolicy};
use dogd::geometry::{FeasibleBall, FeasibleSet};
use dogd::linalg::distance;
use dogd::losses::{Loss, QuadFracLoss};
use dogd::oracles::{fd_estimate, sym_estimate, OracleKind, PowerSchedule};

fn main() -> dogd::Result<()> {
    estimator_accuracy()?;
    zeroth_order_run()?;
    Ok(())
}

/// A quadratic written as a fractional loss with constant denominator 1.
/// The certified window must be a strict bracket, so the constants below
/// are mildly conservative.
fn quadratic_probe(ball: &FeasibleBall) -> dogd::Result<QuadFracLoss> {
    let p = ball.dimension();
    let mut a_mat = vec![0.0; p * p];
    for i in 0..p {
        a_mat[i * p + i] = 1.0;
        if i + 1 < p {
            a_mat[i * p + i + 1] = 0.2;
            a_mat[(i + 1) * p + i] = 0.2;
        }
    }
    let a_vec = vec![0.1; p];
    QuadFracLoss::new(a_mat, a_vec, 1.0, None, vec![0.0; p], 1.0, ball, 0.9, 1.1)
}

fn estimator_accuracy() -> dogd::Result<()> {
    let ball = FeasibleBall::new(8, 2.0)?;
    let loss = quadratic_probe(&ball)?;
    let certificates = loss.certificates(ball.radius())?;
    let smoothness = certificates
        .constants
        .smoothness
        .expect("fractional losses certify G");

    let x = ball.project(&vec![0.31; 8])?;
    let truth = loss.gradient(&x);
    println!("estimator error against the true gradient (p=8, G={smoothness:.3})");
    println!(
        "{:>8} {:>14} {:>14} {:>14}",
        "h", "forward", "certified", "symmetric"
    );
    for h in [1e-1, 1e-2, 1e-3] {
        let fd = fd_estimate(&loss, &x, 1, h, &ball, Some(smoothness))?;
        let sym = sym_estimate(&loss, &x, 1, h, &ball, Some(smoothness))?;
        println!(
            "{:>8} {:>14.3e} {:>14.3e} {:>14.3e}",
            h,
            distance(&fd.estimate, &truth),
            fd.error_bound.expect("G was supplied"),
            distance(&sym.estimate, &truth),
        );
    }
    Ok(())
}

fn zeroth_order_run() -> dogd::Result<()> {
    let (horizon, dimension, radius) = (400_u64, 10_usize, 2.0_f64);
    let (numerator_offset, denominator_offset) = (10.0, 100.0);
    let (quasar, smoothness) =
        quadfrac_certificates(dimension, radius, numerator_offset, denominator_offset)?;
    let eta = step_size_weakly_smooth(quasar, 2.0 * smoothness, 1, 0.99)?;
    let spec = ProviderSpec::Quadfrac {
        dimension,
        radius,
        drift_scale: 0.02,
        alpha: numerator_offset,
        beta_offset: denominator_offset,
        solver_eta: eta,
        solver_tol: 1e-8,
    };
    let schedule = DelaySchedule::constant(1, horizon)?;
    let policy = StepSizePolicy::Constant { eta };
    let full = FeasibleBall::new(dimension, radius)?;

    let probes = PowerSchedule::new(0.5, 0.8)?;
    let oracle = OracleKind::ForwardDifference {
        h: probes.clone(),
        smoothness: Some(smoothness),
    };
    // Iterates keep a margin of the largest probe step, so queries at
    // x + h e_i never leave the full ball.
    let inner = FeasibleBall::new(dimension, radius - oracle.max_probe_step(horizon))?;
    // A start in the inner ball is feasible for both arms, so the rows
    // differ only in the feedback channel.
    let start = inner.project(&vec![radius; dimension])?;

    println!();
    println!("zeroth order against exact feedback on one realization (T={horizon}, p={dimension})");
    println!(
        "{:>12} {:>10} {:>12} {:>14}",
        "feedback", "queries", "regret R_T", "R_T / T"
    );
    let mut zeroth_ledger = None;
    for (label, oracle, set) in [
        ("exact", &OracleKind::Exact, &full),
        ("(p+1)-point", &oracle, &inner),
    ] {
        let mut stream = ProviderStream::new(&spec, 17, horizon, 0)?;
        let settings = RunSettings {
            oracle,
            schedule: &schedule,
            policy: &policy,
            iterate_set: set,
            probe_set: &full,
            initial: &start,
            record_trajectory: false,
        };
        let outcome = run(&mut stream, &settings)?;
        let regret = outcome.ledger.dynamic_regret()?;
        println!(
            "{:>12} {:>10} {:>12.4} {:>14.6}",
            label,
            outcome.ledger.total_queries(),
            regret,
            regret / horizon as f64
        );
        if !matches!(oracle, OracleKind::Exact) {
            zeroth_ledger = Some(outcome.ledger);
        }
    }

    // The ledger accumulated one certificate per round; the closed-form
    // sums over the probe schedule reproduce them.
    let ledger = zeroth_ledger.expect("the zeroth-order arm ran");
    let (delta, lambda) = ledger
        .cumulative_errors()
        .expect("certificates were recorded");
    let steps: Vec<f64> = (1..=horizon).map(|t| probes.at(t)).collect();
    let (delta_closed, lambda_closed) = bandit_cumulative_errors(dimension, smoothness, &steps);
    println!();
    println!("cumulative error certificates of the zeroth-order arm");
    println!("  ledger       Delta={delta:.6} Lambda={lambda:.8}");
    println!("  closed form  Delta={delta_closed:.6} Lambda={lambda_closed:.8}");
    Ok(())
}
