//! Benchmark presets and per-repetition loss providers.
//!
//! [`build_plan`] turns a parsed configuration into a concrete
//! [`ExperimentPlan`]: one arm per delay level, drift rate, or feedback
//! channel, each with its certificate-derived step size. A [`Provider`]
//! then realizes the loss stream one repetition at a time; every arm of a
//! repetition reads the same realized rounds, so arm comparisons are
//! paired.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::descent::{
    offline_solve, step_size_lipschitz_optimal, step_size_weakly_smooth, SolveSettings,
};
use crate::error::{Error, Result};
use crate::geometry::{FeasibleBall, FeasibleSet};
use crate::linalg::norm;
use crate::losses::{
    radial_constants, sigmoid_prime, DriftDirection, GlmLoss, LossStream, MinimizerDrift, QfDrift,
    QuadFracLoss, RadialLoss, Round,
};
use crate::oracles::{OracleKind, PowerSchedule};

use super::config::ExperimentConfig;
use super::driver::{ArmSpec, ExperimentPlan};

/// Default smoothing window for the reported gap series.
pub const DEFAULT_WINDOW: usize = 50;

/// Safety factor applied to threshold-type step-size rules.
pub const DEFAULT_FACTOR: f64 = 0.99;

/// How a provider realizes its loss stream; the plan-level description
/// from which per-repetition state is built.
#[derive(Debug, Clone)]
pub enum ProviderSpec {
    /// Fresh radial draws every round, minimizer pinned at the origin.
    Radial {
        /// Ambient dimension.
        dimension: usize,
        /// Ball radius.
        radius: f64,
        /// Amplitude cap `m1`.
        amplitude_cap: f64,
        /// Frequency cap `m2`.
        frequency_cap: f64,
    },
    /// Sigmoid regression on fresh unit-row features with a drifting
    /// realized minimizer; one comparator path per drift exponent.
    Glm {
        /// Ambient dimension.
        dimension: usize,
        /// Ball radius.
        radius: f64,
        /// Samples per round.
        samples: usize,
        /// Drift magnitude multiplier.
        drift_scale: f64,
        /// One comparator path per exponent; groups index this list.
        drift_exponents: Vec<f64>,
    },
    /// Slowly drifting quadratic fractional instances with the comparator
    /// tracked by a warm-started projected-descent subsolver.
    Quadfrac {
        /// Ambient dimension.
        dimension: usize,
        /// Ball radius.
        radius: f64,
        /// Parameter random-walk magnitude.
        drift_scale: f64,
        /// Constant numerator offset.
        alpha: f64,
        /// Denominator offset, also the certified denominator floor.
        beta_offset: f64,
        /// Subsolver step size.
        solver_eta: f64,
        /// Subsolver relative displacement tolerance.
        solver_tol: f64,
    },
}

impl ProviderSpec {
    /// Ambient dimension of the generated losses.
    pub fn dimension(&self) -> usize {
        match self {
            ProviderSpec::Radial { dimension, .. }
            | ProviderSpec::Glm { dimension, .. }
            | ProviderSpec::Quadfrac { dimension, .. } => *dimension,
        }
    }

    /// Number of distinct comparator groups a round carries.
    pub fn groups(&self) -> usize {
        match self {
            ProviderSpec::Glm {
                drift_exponents, ..
            } => drift_exponents.len(),
            _ => 1,
        }
    }

    /// Radius of the ball the losses are certified on (also where
    /// comparators live and probes are checked).
    pub fn radius(&self) -> f64 {
        match self {
            ProviderSpec::Radial { radius, .. }
            | ProviderSpec::Glm { radius, .. }
            | ProviderSpec::Quadfrac { radius, .. } => *radius,
        }
    }

    /// Draws the shared starting point of a repetition. Radial runs start
    /// coordinate-wise uniform in `(0.2, 0.4)`, sigmoid regression on the
    /// unit sphere, fractional runs uniform in the ball.
    pub fn initial_iterate<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let p = self.dimension();
        match self {
            ProviderSpec::Radial { .. } => {
                (0..p).map(|_| rng.random_range(0.2..0.4)).collect()
            }
            ProviderSpec::Glm { .. } => unit_sphere_point(p, rng),
            ProviderSpec::Quadfrac { radius, .. } => {
                let mut x = unit_sphere_point(p, rng);
                let u: f64 = rng.random_range(0.0..1.0);
                let r = radius * u.powf(1.0 / p as f64);
                x.iter_mut().for_each(|z| *z *= r);
                x
            }
        }
    }

    /// Builds the per-repetition state, performing any start-of-stream
    /// draws (the initial comparator, for drifting families).
    pub fn begin_rep<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Provider> {
        match self {
            ProviderSpec::Radial {
                dimension,
                amplitude_cap,
                frequency_cap,
                ..
            } => Ok(Provider::Radial(RadialState {
                dimension: *dimension,
                amplitude_cap: *amplitude_cap,
                frequency_cap: *frequency_cap,
                origin: vec![0.0; *dimension],
                current: None,
            })),
            ProviderSpec::Glm {
                dimension,
                radius,
                samples,
                drift_scale,
                drift_exponents,
            } => {
                let ball = FeasibleBall::new(*dimension, *radius)?;
                let mut first = unit_sphere_point(*dimension, rng);
                ball.project_mut(&mut first)?;
                let drifts = drift_exponents
                    .iter()
                    .map(|&e| MinimizerDrift::new(*drift_scale, e, DriftDirection::UnitSphere))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Provider::Glm(GlmState {
                    dimension: *dimension,
                    samples: *samples,
                    ball,
                    drifts,
                    states: vec![first; drift_exponents.len()],
                    losses: Vec::new(),
                    raw_direction: vec![0.0; *dimension],
                }))
            }
            ProviderSpec::Quadfrac {
                dimension,
                radius,
                drift_scale,
                alpha,
                beta_offset,
                solver_eta,
                solver_tol,
            } => Ok(Provider::Quadfrac(QfState {
                ball: FeasibleBall::new(*dimension, *radius)?,
                drift: QfDrift::new(*dimension, *drift_scale, *alpha, *beta_offset)?,
                solver_eta: *solver_eta,
                solver_tol: *solver_tol,
                current: None,
                minimizer: vec![0.0; *dimension],
                minimum: 0.0,
            })),
        }
    }
}

/// Per-repetition realization state. Created by
/// [`ProviderSpec::begin_rep`], advanced once per round, and read once per
/// arm through [`Provider::round`].
pub enum Provider {
    /// Fresh radial draws.
    Radial(RadialState),
    /// Sigmoid regression with drifting comparators.
    Glm(GlmState),
    /// Drifting quadratic fractional instances.
    Quadfrac(QfState),
}

/// Radial realization state.
pub struct RadialState {
    dimension: usize,
    amplitude_cap: f64,
    frequency_cap: f64,
    origin: Vec<f64>,
    current: Option<RadialLoss>,
}

/// Sigmoid-regression realization state.
pub struct GlmState {
    dimension: usize,
    samples: usize,
    ball: FeasibleBall,
    drifts: Vec<MinimizerDrift>,
    states: Vec<Vec<f64>>,
    losses: Vec<GlmLoss>,
    raw_direction: Vec<f64>,
}

/// Quadratic-fractional realization state.
pub struct QfState {
    ball: FeasibleBall,
    drift: QfDrift,
    solver_eta: f64,
    solver_tol: f64,
    current: Option<QuadFracLoss>,
    minimizer: Vec<f64>,
    minimum: f64,
}

impl Provider {
    /// Ambient dimension.
    pub fn dimension(&self) -> usize {
        match self {
            Provider::Radial(s) => s.dimension,
            Provider::Glm(s) => s.dimension,
            Provider::Quadfrac(s) => s.ball.dimension(),
        }
    }

    /// Realizes round `t` (1-based): moves every comparator, draws the
    /// round's loss data, and for the fractional family re-solves the
    /// comparator from a warm start.
    pub fn next_round<R: Rng + ?Sized>(&mut self, t: u64, rng: &mut R) -> Result<()> {
        match self {
            Provider::Radial(s) => {
                let amplitudes = (0..s.dimension)
                    .map(|_| rng.random_range(0.0..s.amplitude_cap))
                    .collect();
                let frequencies = (0..s.dimension)
                    .map(|_| rng.random_range(-s.frequency_cap..s.frequency_cap))
                    .collect();
                s.current = Some(RadialLoss::new(amplitudes, frequencies)?);
                Ok(())
            }
            Provider::Glm(s) => {
                if t >= 2 {
                    // One shared direction moves every comparator path, so
                    // the paths differ only through their decay exponents.
                    for z in s.raw_direction.iter_mut() {
                        *z = StandardNormal.sample(rng);
                    }
                    for (state, drift) in s.states.iter_mut().zip(&s.drifts) {
                        *state = drift.step_along(state, t - 1, &s.ball, &s.raw_direction)?;
                    }
                }
                let mut features = vec![0.0; s.samples * s.dimension];
                for row in features.chunks_mut(s.dimension) {
                    for z in row.iter_mut() {
                        *z = StandardNormal.sample(rng);
                    }
                    let n = norm(row).max(f64::MIN_POSITIVE);
                    row.iter_mut().for_each(|z| *z /= n);
                }
                let shared: Arc<[f64]> = features.into();
                s.losses.clear();
                for state in &s.states {
                    let targets = GlmLoss::realized_targets(&shared, s.dimension, state);
                    s.losses
                        .push(GlmLoss::with_shared_features(shared.clone(), targets, s.dimension)?);
                }
                Ok(())
            }
            Provider::Quadfrac(s) => {
                let loss = s.drift.next_loss(&s.ball, rng)?;
                let settings = SolveSettings {
                    oracle: &OracleKind::Exact,
                    set: &s.ball,
                    eta: s.solver_eta,
                    rel_tol: s.solver_tol,
                    max_iter: 100_000,
                };
                let solve = offline_solve(&loss, &s.minimizer, &settings)?;
                if !solve.converged {
                    return Err(Error::Run(format!(
                        "comparator subsolver did not converge at round {t} \
                         within {} iterations",
                        solve.iterations
                    )));
                }
                s.minimizer = solve.minimizer;
                s.minimum = solve.value;
                s.current = Some(loss);
                Ok(())
            }
        }
    }

    /// The current round as seen by one comparator group.
    ///
    /// Panics if called before [`Provider::next_round`]; the driver always
    /// realizes a round before reading it.
    pub fn round(&self, group: usize) -> Round<'_> {
        match self {
            Provider::Radial(s) => {
                assert_eq!(group, 0, "radial streams have a single group");
                Round {
                    loss: s.current.as_ref().expect("round realized before read"),
                    minimizer: &s.origin,
                    minimum_value: Some(0.0),
                }
            }
            Provider::Glm(s) => Round {
                // Targets are realized from the comparator, so its loss
                // value is exactly zero.
                loss: &s.losses[group],
                minimizer: &s.states[group],
                minimum_value: Some(0.0),
            },
            Provider::Quadfrac(s) => {
                assert_eq!(group, 0, "fractional streams have a single group");
                Round {
                    loss: s.current.as_ref().expect("round realized before read"),
                    minimizer: &s.minimizer,
                    minimum_value: Some(s.minimum),
                }
            }
        }
    }
}

/// Adapts one comparator group of a [`Provider`] to the [`LossStream`]
/// interface, drawing from its own generator. Built from the same
/// specification and seed as a benchmark repetition, it replays exactly
/// the stream the benchmark arms saw.
///
/// Round realization panics on the (setup-level) errors the benchmark
/// driver would report, so this adapter is meant for examples and tests
/// over well-posed specifications.
pub struct ProviderStream {
    provider: Provider,
    rng: ChaCha8Rng,
    horizon: u64,
    group: usize,
    t: u64,
}

impl ProviderStream {
    /// Stream over `group` of the realization that `seed` produces.
    pub fn new(spec: &ProviderSpec, seed: u64, horizon: u64, group: usize) -> Result<Self> {
        if group >= spec.groups() {
            return Err(Error::InvalidParameter {
                name: "group",
                reason: format!("spec has {} groups, got index {group}", spec.groups()),
            });
        }
        let mut rng = realization_rng(seed);
        let provider = spec.begin_rep(&mut rng)?;
        Ok(Self {
            provider,
            rng,
            horizon,
            group,
            t: 0,
        })
    }
}

impl LossStream for ProviderStream {
    fn dimension(&self) -> usize {
        self.provider.dimension()
    }

    fn horizon(&self) -> u64 {
        self.horizon
    }

    fn next_round(&mut self) -> Round<'_> {
        self.t += 1;
        self.provider
            .next_round(self.t, &mut self.rng)
            .expect("stream realization failed");
        self.provider.round(self.group)
    }
}

/// The generator realizing the loss stream of repetition `seed`; stream 0
/// of the seeded generator, independent of the auxiliary stream.
pub fn realization_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// The generator for auxiliary draws (the starting point); stream 1, so
/// adding or removing arms never perturbs the realized losses.
pub fn auxiliary_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Uniform draw from the unit sphere (a normalized Gaussian).
fn unit_sphere_point<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
    let n = norm(&x).max(f64::MIN_POSITIVE);
    x.iter_mut().for_each(|z| *z /= n);
    x
}

/// Everything a preset pins down before overrides are applied.
struct Preset {
    horizon: u64,
    dimension: usize,
    radius: f64,
    delays: Vec<u32>,
    reps: u32,
    threshold: f64,
}

fn base_preset(experiment: &str, family: Option<&str>) -> Result<Preset> {
    Ok(match experiment {
        "radial" => Preset {
            horizon: 20_000,
            dimension: 100,
            radius: 100.0,
            delays: vec![1, 5, 10, 20],
            reps: 20,
            threshold: 0.1,
        },
        "high-delay-radial" => Preset {
            horizon: 200_000,
            dimension: 100,
            radius: 100.0,
            delays: vec![20, 50, 100, 150, 200],
            reps: 20,
            threshold: 0.1,
        },
        "glm" => Preset {
            horizon: 20_000,
            dimension: 100,
            radius: 1.0,
            delays: vec![1, 5, 10, 20],
            reps: 20,
            threshold: 1e-4,
        },
        "glm-vt-sweep" => Preset {
            horizon: 20_000,
            dimension: 100,
            radius: 1.0,
            delays: vec![5],
            reps: 20,
            threshold: 1e-4,
        },
        "quadfrac" => Preset {
            horizon: 20_000,
            dimension: 50,
            radius: 10.0,
            delays: vec![1, 5, 10, 20],
            reps: 20,
            threshold: 1e-5,
        },
        "quadfrac-bandit" => Preset {
            horizon: 20_000,
            dimension: 50,
            radius: 10.0,
            delays: vec![5],
            reps: 20,
            threshold: 1e-5,
        },
        "custom" => {
            let family = family.ok_or_else(|| {
                Error::Config("experiment 'custom' requires the 'family' key".into())
            })?;
            let (radius, threshold) = match family {
                "radial" => (100.0, 0.1),
                "glm" => (1.0, 1e-4),
                "quadfrac" => (10.0, 1e-5),
                other => {
                    return Err(Error::Config(format!(
                        "unknown family '{other}' (expected radial, glm, or quadfrac)"
                    )))
                }
            };
            Preset {
                horizon: 2_000,
                dimension: 20,
                radius,
                delays: vec![1, 5, 10],
                reps: 5,
                threshold,
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown experiment '{other}'"
            )))
        }
    })
}

/// Wraps certificate or step-size computation failures as configuration
/// errors: everything in plan building is driven by the configuration.
fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

/// Builds the concrete plan for a parsed configuration: presets first,
/// overrides on top, arms and their certificate-derived step sizes last.
pub fn build_plan(config: &ExperimentConfig) -> Result<ExperimentPlan> {
    let experiment = config.experiment.as_str();
    let family = match experiment {
        "radial" | "high-delay-radial" => "radial",
        "glm" | "glm-vt-sweep" => "glm",
        "quadfrac" | "quadfrac-bandit" => "quadfrac",
        "custom" => config.family.as_deref().unwrap_or(""),
        _ => "",
    };
    let preset = base_preset(experiment, config.family.as_deref())?;
    let o = &config.overrides;

    let horizon = o.horizon.unwrap_or(preset.horizon);
    let dimension = o.dimension.unwrap_or(preset.dimension);
    let radius = o.radius.unwrap_or(preset.radius);
    let delays = o.delays.clone().unwrap_or(preset.delays);
    let reps = o.reps.unwrap_or(preset.reps);
    let base_seed = o.seed.unwrap_or(1);
    let threshold = o.threshold.unwrap_or(preset.threshold);
    let stride = o.stride.unwrap_or_else(|| (horizon / 2000).max(1));
    let window = o.window.unwrap_or(DEFAULT_WINDOW);
    let factor = o.factor.unwrap_or(DEFAULT_FACTOR);

    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    if dimension == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Config(format!("radius must be positive, got {radius}")));
    }
    if delays.is_empty() || delays.contains(&0) {
        return Err(Error::Config("delays must be positive integers".into()));
    }
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    if window == 0 {
        return Err(Error::Config("window must be at least 1".into()));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::Config(format!(
            "threshold must be positive, got {threshold}"
        )));
    }

    let single_delay = |context: &str| -> Result<u32> {
        if delays.len() != 1 {
            return Err(Error::Config(format!(
                "{context} runs at a single delay level; got delays {delays:?}"
            )));
        }
        Ok(delays[0])
    };

    let (provider, arms) = match family {
        "radial" => {
            let amplitude_cap = o.amplitude_cap.unwrap_or(1.0);
            let frequency_cap = o.frequency_cap.unwrap_or(2.5);
            let constants = radial_constants(dimension, amplitude_cap, frequency_cap, radius);
            let lipschitz = constants.lipschitz.expect("radial family is Lipschitz");
            let arms = delays
                .iter()
                .map(|&d| {
                    let eta =
                        step_size_lipschitz_optimal(radius, lipschitz, horizon, d, 0.0)
                            .map_err(config_err)?;
                    Ok(ArmSpec {
                        record_id: experiment.to_string(),
                        label: format!("d={d}"),
                        delay: d,
                        eta,
                        oracle: OracleKind::Exact,
                        iterate_radius: radius,
                        group: 0,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            (
                ProviderSpec::Radial {
                    dimension,
                    radius,
                    amplitude_cap,
                    frequency_cap,
                },
                arms,
            )
        }
        "glm" => {
            let samples = o.samples.unwrap_or(if experiment == "custom" {
                200
            } else {
                1000
            });
            if samples == 0 {
                return Err(Error::Config("samples must be at least 1".into()));
            }
            let drift_scale = o.drift_scale.unwrap_or(0.1);
            // Rows are normalized to unit length, so the certificates use
            // a unit feature bound.
            let quasar = (8.0 * sigmoid_prime(radius)).min(1.0);
            let gamma = 1.0 / 8.0;
            let sweep = experiment == "glm-vt-sweep";
            let exponents = if sweep {
                o.drift_exponents
                    .clone()
                    .unwrap_or_else(|| vec![0.0625, 0.125, 0.25, 0.5, 1.0])
            } else {
                vec![o.drift_exponent.unwrap_or(0.5)]
            };
            if exponents.is_empty() {
                return Err(Error::Config("drift_exponents must be non-empty".into()));
            }
            let arms = if sweep {
                let delay = single_delay("glm-vt-sweep")?;
                let eta = step_size_weakly_smooth(quasar, gamma, delay, factor)
                    .map_err(config_err)?;
                exponents
                    .iter()
                    .enumerate()
                    .map(|(group, &a)| ArmSpec {
                        record_id: format!("{experiment}/a={a}"),
                        label: format!("a={a}"),
                        delay,
                        eta,
                        oracle: OracleKind::Exact,
                        iterate_radius: radius,
                        group,
                    })
                    .collect()
            } else {
                delays
                    .iter()
                    .map(|&d| {
                        let eta = step_size_weakly_smooth(quasar, gamma, d, factor)
                            .map_err(config_err)?;
                        Ok(ArmSpec {
                            record_id: experiment.to_string(),
                            label: format!("d={d}"),
                            delay: d,
                            eta,
                            oracle: OracleKind::Exact,
                            iterate_radius: radius,
                            group: 0,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            (
                ProviderSpec::Glm {
                    dimension,
                    radius,
                    samples,
                    drift_scale,
                    drift_exponents: exponents,
                },
                arms,
            )
        }
        "quadfrac" => {
            let drift_scale = o.drift_scale.unwrap_or(0.01);
            let alpha = 10.0;
            let beta_offset = 100.0;
            let solver_tol = o.subsolver_tol.unwrap_or(1e-6);
            if !(solver_tol.is_finite() && solver_tol > 0.0) {
                return Err(Error::Config(format!(
                    "subsolver_tol must be positive, got {solver_tol}"
                )));
            }
            let (quasar, smoothness) =
                quadfrac_certificates(dimension, radius, alpha, beta_offset)
                    .map_err(config_err)?;
            let weak = 2.0 * smoothness;
            let solver_eta =
                step_size_weakly_smooth(quasar, weak, 1, factor).map_err(config_err)?;
            let bandit = experiment == "quadfrac-bandit";
            let arms = if bandit {
                let delay = single_delay("quadfrac-bandit")?;
                let eta = step_size_weakly_smooth(quasar, weak, delay, factor)
                    .map_err(config_err)?;
                let h_scale = o.h_scale.unwrap_or(1.0);
                let h_exponents = o
                    .h_exponents
                    .clone()
                    .unwrap_or_else(|| vec![0.4, 0.6, 0.8, 1.0]);
                if h_exponents.is_empty() {
                    return Err(Error::Config("h_exponents must be non-empty".into()));
                }
                let mut arms = vec![ArmSpec {
                    record_id: format!("{experiment}/full"),
                    label: "full".to_string(),
                    delay,
                    eta,
                    oracle: OracleKind::Exact,
                    iterate_radius: radius,
                    group: 0,
                }];
                for &a in &h_exponents {
                    let schedule = PowerSchedule::new(h_scale, a).map_err(config_err)?;
                    let oracle = OracleKind::ForwardDifference {
                        h: schedule,
                        smoothness: Some(smoothness),
                    };
                    let margin = oracle.max_probe_step(horizon);
                    if margin >= radius {
                        return Err(Error::Config(format!(
                            "probe step {margin} leaves no room inside radius {radius}"
                        )));
                    }
                    arms.push(ArmSpec {
                        record_id: format!("{experiment}/h=t^-{a}"),
                        label: format!("h=t^-{a}"),
                        delay,
                        eta,
                        oracle,
                        iterate_radius: radius - margin,
                        group: 0,
                    });
                }
                arms
            } else {
                delays
                    .iter()
                    .map(|&d| {
                        let eta = step_size_weakly_smooth(quasar, weak, d, factor)
                            .map_err(config_err)?;
                        Ok(ArmSpec {
                            record_id: experiment.to_string(),
                            label: format!("d={d}"),
                            delay: d,
                            eta,
                            oracle: OracleKind::Exact,
                            iterate_radius: radius,
                            group: 0,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            (
                ProviderSpec::Quadfrac {
                    dimension,
                    radius,
                    drift_scale,
                    alpha,
                    beta_offset,
                    solver_eta,
                    solver_tol,
                },
                arms,
            )
        }
        other => {
            return Err(Error::Config(format!(
                "experiment '{experiment}' has no loss family ('{other}')"
            )))
        }
    };

    Ok(ExperimentPlan {
        id: experiment.to_string(),
        horizon,
        reps,
        base_seed,
        stride,
        threshold,
        window,
        probe_radius: radius,
        arms,
        provider,
    })
}

/// Curvature certificates `(kappa, G)` of the drifting fractional family.
///
/// The random walk pins every norm it draws (unit-Frobenius numerator
/// matrix, both vectors at norm 1/10, denominator offset fixed), and the
/// certificates depend on the parameters only through those norms, so one
/// deterministic instance with the same norms yields the exact constants
/// of every round.
pub fn quadfrac_certificates(
    dimension: usize,
    radius: f64,
    alpha: f64,
    beta_offset: f64,
) -> Result<(f64, f64)> {
    let p = dimension;
    let ball = FeasibleBall::new(p, radius)?;
    let mut a_mat = vec![0.0; p * p];
    let diag = 1.0 / (p as f64).sqrt();
    for i in 0..p {
        a_mat[i * p + i] = diag;
    }
    let mut a_vec = vec![0.0; p];
    a_vec[0] = 0.1;
    let b_vec = a_vec.clone();
    let beta = 0.1 * radius + beta_offset;
    let denom_hi = 0.1 * radius + beta;
    let probe = QuadFracLoss::new(
        a_mat,
        a_vec,
        alpha,
        None,
        b_vec,
        beta,
        &ball,
        beta_offset,
        denom_hi,
    )?;
    Ok((
        probe.denom_lo() / probe.denom_hi(),
        probe.smoothness_bound(radius),
    ))
}
