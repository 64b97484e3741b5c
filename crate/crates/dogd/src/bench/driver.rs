//! Multi-arm benchmark execution.
//!
//! One repetition realizes a single loss stream and replays it through
//! every arm in lockstep, so arms are compared on identical draws. The
//! per-arm round processing mirrors [`crate::descent::run`] operation for
//! operation; a unit test pins the two to bit-identical results.
//!
//! Repetitions run in parallel and their outputs are merged in a fixed
//! order, so a given plan and seed always produce the same records.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::analysis::RegretLedger;
use crate::delay::{DelaySchedule, FeedbackBuffer};
use crate::descent::step;
use crate::error::{Error, Result};
use crate::geometry::{FeasibleBall, FeasibleSet};
use crate::linalg::distance;
use crate::oracles::{Feedback, GradientEstimate, OracleKind};

use super::csvio::RunRecord;
use super::experiments::{auxiliary_rng, realization_rng, ProviderSpec};

/// One benchmark arm: a delay level, feedback channel, step size, and
/// comparator group, replayed against the shared stream.
#[derive(Debug, Clone)]
pub struct ArmSpec {
    /// Value of the records' experiment column; arms that a delay level
    /// cannot distinguish qualify the experiment id with their label.
    pub record_id: String,
    /// Short arm name ("d=5", "full", "a=0.25").
    pub label: String,
    /// Constant feedback delay.
    pub delay: u32,
    /// Constant step size.
    pub eta: f64,
    /// Feedback channel.
    pub oracle: OracleKind,
    /// Radius of the ball the iterates are projected onto; smaller than
    /// the probe radius for finite-difference arms.
    pub iterate_radius: f64,
    /// Comparator group read from each realized round.
    pub group: usize,
}

/// A fully resolved experiment: arms, horizon, replication and output
/// policy, and the loss provider.
#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    /// Experiment identifier.
    pub id: String,
    /// Query rounds per repetition.
    pub horizon: u64,
    /// Repetitions.
    pub reps: u32,
    /// Repetition `r` is seeded with `base_seed + r`.
    pub base_seed: u64,
    /// Keep one record every `stride` rounds (plus the final round).
    pub stride: u64,
    /// Smoothed-gap level whose first crossing the summary reports.
    pub threshold: f64,
    /// Trailing window of the smoothed gap series.
    pub window: usize,
    /// Radius of the ball oracle probes are checked against.
    pub probe_radius: f64,
    /// The arms, all replayed per repetition.
    pub arms: Vec<ArmSpec>,
    /// Loss stream generator.
    pub provider: ProviderSpec,
}

impl ExperimentPlan {
    /// Ambient dimension, as fixed by the provider.
    pub fn dimension(&self) -> usize {
        self.provider.dimension()
    }
}

/// Aggregate statistics of one arm across repetitions.
#[derive(Debug, Clone)]
pub struct ArmSummary {
    /// The arm's experiment-column id.
    pub experiment: String,
    /// Constant delay.
    pub delay: u32,
    /// Step size used.
    pub eta: f64,
    /// First round where the cross-repetition mean smoothed gap drops
    /// below the threshold; `None` when it never does.
    pub iter_threshold: Option<u64>,
    /// Mean over repetitions of the final average regret `R_T / T`.
    pub mean_final_regret: f64,
    /// Sample standard deviation of the final average regret.
    pub std_final: f64,
    /// Mean wall-clock seconds of arm-specific work per repetition
    /// (oracle queries and updates; shared stream realization excluded).
    pub time_mean_s: f64,
    /// Mean oracle evaluations per repetition.
    pub mean_queries: f64,
    /// Repetitions aggregated.
    pub reps: u32,
}

/// Everything a run produces: sampled per-round records in a fixed order
/// and one summary per arm.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// Sampled records, ordered by arm, then repetition, then round.
    pub records: Vec<RunRecord>,
    /// Per-arm aggregates, in arm order.
    pub summaries: Vec<ArmSummary>,
}

/// Per-arm, per-repetition results carried out of the parallel section.
struct ArmRepResult {
    records: Vec<RunRecord>,
    smoothed: Vec<f64>,
    final_avg_regret: f64,
    queries: u64,
    seconds: f64,
}

/// In-flight state of one arm during a repetition.
struct ArmState {
    x: Vec<f64>,
    set: FeasibleBall,
    buffer: FeedbackBuffer<Feedback>,
    ledger: RegretLedger,
    previous_minimizer: Option<Vec<f64>>,
    gradient_scratch: Vec<f64>,
    seconds: f64,
}

/// Runs every repetition of the plan and merges the results.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentOutput> {
    validate_plan(plan)?;
    let schedules = build_schedules(plan)?;

    let rep_results: Vec<Vec<ArmRepResult>> = (0..plan.reps)
        .into_par_iter()
        .map(|rep| run_one_rep(plan, &schedules, rep))
        .collect::<Result<_>>()?;

    // Fixed merge order: arm-major, then repetition, then round.
    let mut records = Vec::new();
    let mut summaries = Vec::with_capacity(plan.arms.len());
    for (arm_index, arm) in plan.arms.iter().enumerate() {
        let mut mean_smoothed = vec![0.0; plan.horizon as usize];
        let mut finals = Vec::with_capacity(plan.reps as usize);
        let mut queries = 0.0;
        let mut seconds = 0.0;
        for rep in &rep_results {
            let result = &rep[arm_index];
            records.extend_from_slice(&result.records);
            for (acc, v) in mean_smoothed.iter_mut().zip(&result.smoothed) {
                *acc += v;
            }
            finals.push(result.final_avg_regret);
            queries += result.queries as f64;
            seconds += result.seconds;
        }
        let n = plan.reps as f64;
        mean_smoothed.iter_mut().for_each(|v| *v /= n);
        let iter_threshold = mean_smoothed
            .iter()
            .position(|&gap| gap < plan.threshold)
            .map(|i| i as u64 + 1);
        let mean_final = finals.iter().sum::<f64>() / n;
        let std_final = if plan.reps > 1 {
            (finals
                .iter()
                .map(|v| (v - mean_final) * (v - mean_final))
                .sum::<f64>()
                / (n - 1.0))
                .sqrt()
        } else {
            0.0
        };
        summaries.push(ArmSummary {
            experiment: arm.record_id.clone(),
            delay: arm.delay,
            eta: arm.eta,
            iter_threshold,
            mean_final_regret: mean_final,
            std_final,
            time_mean_s: seconds / n,
            mean_queries: queries / n,
            reps: plan.reps,
        });
    }
    Ok(ExperimentOutput { records, summaries })
}

fn validate_plan(plan: &ExperimentPlan) -> Result<()> {
    if plan.arms.is_empty() {
        return Err(Error::Config("plan has no arms".into()));
    }
    if plan.horizon == 0 || plan.reps == 0 || plan.stride == 0 || plan.window == 0 {
        return Err(Error::Config(
            "horizon, reps, stride, and window must all be at least 1".into(),
        ));
    }
    let dimension = plan.dimension();
    for arm in &plan.arms {
        if arm.group >= plan.provider.groups() {
            return Err(Error::Config(format!(
                "arm '{}' reads group {} of a {}-group provider",
                arm.label,
                arm.group,
                plan.provider.groups()
            )));
        }
        if !(arm.eta.is_finite() && arm.eta > 0.0) {
            return Err(Error::Config(format!(
                "arm '{}' has step size {}, expected a positive value",
                arm.label, arm.eta
            )));
        }
        if !(arm.iterate_radius.is_finite()
            && arm.iterate_radius > 0.0
            && arm.iterate_radius <= plan.probe_radius)
        {
            return Err(Error::Config(format!(
                "arm '{}' iterate radius {} must lie in (0, {}]",
                arm.label, arm.iterate_radius, plan.probe_radius
            )));
        }
    }
    FeasibleBall::new(dimension, plan.probe_radius).map(|_| ()).map_err(|e| {
        Error::Config(format!("probe set: {e}"))
    })
}

/// One schedule per distinct delay level, shared by every repetition.
fn build_schedules(plan: &ExperimentPlan) -> Result<BTreeMap<u32, DelaySchedule>> {
    let mut schedules = BTreeMap::new();
    for arm in &plan.arms {
        if !schedules.contains_key(&arm.delay) {
            schedules.insert(arm.delay, DelaySchedule::constant(arm.delay, plan.horizon)?);
        }
    }
    Ok(schedules)
}

fn run_one_rep(
    plan: &ExperimentPlan,
    schedules: &BTreeMap<u32, DelaySchedule>,
    rep: u32,
) -> Result<Vec<ArmRepResult>> {
    let dimension = plan.dimension();
    let seed = plan.base_seed + u64::from(rep);
    let mut realization = realization_rng(seed);
    let mut auxiliary = auxiliary_rng(seed);

    let mut provider = plan.provider.begin_rep(&mut realization)?;
    let shared_start = plan.provider.initial_iterate(&mut auxiliary);
    let probe_set = FeasibleBall::new(dimension, plan.probe_radius)?;

    let mut states = Vec::with_capacity(plan.arms.len());
    for arm in &plan.arms {
        let set = FeasibleBall::new(dimension, arm.iterate_radius)?;
        let mut x = shared_start.clone();
        set.project_mut(&mut x)?;
        states.push(ArmState {
            x,
            set,
            buffer: FeedbackBuffer::new(),
            ledger: RegretLedger::new(),
            previous_minimizer: None,
            gradient_scratch: vec![0.0; dimension],
            seconds: 0.0,
        });
    }

    let last_round = plan
        .arms
        .iter()
        .map(|arm| schedules[&arm.delay].last_arrival())
        .max()
        .expect("plans have at least one arm");

    for t in 1..=last_round {
        if t <= plan.horizon {
            provider.next_round(t, &mut realization)?;
        }
        for (arm, state) in plan.arms.iter().zip(&mut states) {
            let schedule = &schedules[&arm.delay];
            if t > schedule.last_arrival() {
                continue;
            }
            let start = Instant::now();
            if t <= plan.horizon {
                let round = provider.round(arm.group);
                let (loss_at_iterate, estimate) = match &arm.oracle {
                    OracleKind::Exact => {
                        let value = round
                            .loss
                            .value_and_gradient_into(&state.x, &mut state.gradient_scratch);
                        (
                            value,
                            GradientEstimate {
                                estimate: state.gradient_scratch.clone(),
                                error_bound: Some(0.0),
                                query_count: 1,
                            },
                        )
                    }
                    other => {
                        let value = round.loss.value(&state.x);
                        (value, other.query(round.loss, &state.x, t, &probe_set)?)
                    }
                };
                let loss_at_minimizer = match round.minimum_value {
                    Some(v) => v,
                    None => round.loss.value(round.minimizer),
                };
                state.ledger.push_round(
                    loss_at_iterate,
                    Some(loss_at_minimizer),
                    estimate.error_bound,
                    estimate.query_count,
                );
                if let Some(previous) = &state.previous_minimizer {
                    state
                        .ledger
                        .push_path_increment(distance(previous, round.minimizer));
                }
                match state.previous_minimizer.as_mut() {
                    Some(slot) => slot.copy_from_slice(round.minimizer),
                    None => state.previous_minimizer = Some(round.minimizer.to_vec()),
                }
                let arrival = schedule.arrival_of(t);
                state.buffer.push(arrival, estimate.into_feedback(t, arrival))?;
            }
            let arrived = state.buffer.drain_round(t)?;
            let outcome = step(&state.x, &arrived, arm.eta, &state.set)?;
            state.x = outcome.next;
            state.seconds += start.elapsed().as_secs_f64();
        }
    }

    let mut results = Vec::with_capacity(plan.arms.len());
    for (arm, state) in plan.arms.iter().zip(states) {
        debug_assert!(state.buffer.is_empty());
        let regret = state.ledger.regret_series()?;
        let smoothed = state.ledger.smoothed_gap_series(plan.window)?;
        let mut records = Vec::new();
        for t in 1..=plan.horizon {
            if t % plan.stride == 1 % plan.stride || t == plan.horizon {
                let cum = regret[(t - 1) as usize];
                records.push(RunRecord {
                    experiment: arm.record_id.clone(),
                    rep,
                    delay: arm.delay,
                    t,
                    regret_cum: cum,
                    regret_avg: cum / t as f64,
                    gap_smoothed: smoothed[(t - 1) as usize],
                    eta: arm.eta,
                    seed,
                });
            }
        }
        let final_avg_regret = regret[(plan.horizon - 1) as usize] / plan.horizon as f64;
        let queries = state.ledger.total_queries();
        results.push(ArmRepResult {
            records,
            smoothed,
            final_avg_regret,
            queries,
            seconds: state.seconds,
        });
    }
    Ok(results)
}

/// Rebuilds per-arm summaries from previously written records; the
/// threshold crossing is resolved on the sampled grid and timing is not
/// recoverable, so [`ArmSummary::time_mean_s`] is reported as NaN.
pub fn summarize_records(records: &[RunRecord], threshold: Option<f64>) -> Vec<ArmSummary> {
    // Group by (experiment, delay, eta) in first-appearance order.
    let mut order: Vec<(String, u32)> = Vec::new();
    let mut groups: BTreeMap<(String, u32), Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        let key = (record.experiment.clone(), record.delay);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(record);
    }
    let mut summaries = Vec::with_capacity(order.len());
    for key in order {
        let rows = &groups[&key];
        let reps: std::collections::BTreeSet<u32> = rows.iter().map(|r| r.rep).collect();
        let n = reps.len() as f64;
        // Mean smoothed gap per sampled round, for the crossing.
        let mut by_round: BTreeMap<u64, (f64, u32)> = BTreeMap::new();
        for r in rows {
            let entry = by_round.entry(r.t).or_insert((0.0, 0));
            entry.0 += r.gap_smoothed;
            entry.1 += 1;
        }
        let iter_threshold = threshold.and_then(|level| {
            by_round
                .iter()
                .find(|(_, (sum, count))| sum / f64::from(*count) < level)
                .map(|(t, _)| *t)
        });
        let last_round = by_round.keys().next_back().copied().unwrap_or(0);
        let finals: Vec<f64> = rows
            .iter()
            .filter(|r| r.t == last_round)
            .map(|r| r.regret_avg)
            .collect();
        let mean_final = finals.iter().sum::<f64>() / (finals.len().max(1) as f64);
        let std_final = if finals.len() > 1 {
            (finals
                .iter()
                .map(|v| (v - mean_final) * (v - mean_final))
                .sum::<f64>()
                / (finals.len() as f64 - 1.0))
                .sqrt()
        } else {
            0.0
        };
        summaries.push(ArmSummary {
            experiment: key.0,
            delay: key.1,
            eta: rows[0].eta,
            iter_threshold,
            mean_final_regret: mean_final,
            std_final,
            time_mean_s: f64::NAN,
            mean_queries: f64::NAN,
            reps: n as u32,
        });
    }
    summaries
}
