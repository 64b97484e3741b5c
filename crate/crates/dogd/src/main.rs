//! Command-line front end over the library: run experiments, evaluate the
//! regret bounds for a loss family, recompute summaries from a records file,
//! and render plots.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for run failures,
//! 4 for I/O failures.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dogd::analysis::{
    bound_bandit, bound_lipschitz, bound_lipschitz_exact_feedback, bound_weakly_smooth,
    BoundInputs, QuadraticFormBound,
};
use dogd::bench::csvio::write_text;
use dogd::bench::{
    build_plan, parse_config_file, quadfrac_certificates, read_records, render_plot,
    run_experiment, summarize_records, write_records, write_summary, ArmSummary,
    ExperimentConfig, Overrides,
};
use dogd::descent::{step_size_lipschitz_optimal, step_size_weakly_smooth};
use dogd::losses::{radial_constants, sigmoid_prime};
use dogd::oracles::PowerSchedule;
use dogd::{Error, Result};

#[derive(Parser)]
#[command(
    name = "dogd",
    version,
    about = "Delayed online gradient descent on quasar-convex loss streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write records.csv plus summary.csv.
    Run(RunArgs),
    /// Evaluate the regret bounds for a loss family at given parameters.
    Bounds(BoundsArgs),
    /// Recompute summary statistics from a records file.
    Summarize(SummarizeArgs),
    /// Render an average-regret plot from a records file.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to a `key = value` configuration file.
    #[arg(conflicts_with = "experiment")]
    config: Option<PathBuf>,
    /// Built-in experiment id: radial, glm, glm-vt-sweep, quadfrac,
    /// quadfrac-bandit, or high-delay-radial.
    #[arg(long)]
    experiment: Option<String>,
    /// Base seed; repetition r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of repetitions.
    #[arg(long)]
    reps: Option<u32>,
    /// Query rounds per run.
    #[arg(long)]
    horizon: Option<u64>,
    /// Comma-separated delay levels, one arm per level.
    #[arg(long, value_delimiter = ',')]
    delays: Option<Vec<u32>>,
    /// Directory for records.csv and summary.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Record subsampling stride.
    #[arg(long)]
    stride: Option<u64>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Loss family: radial, glm, or quadfrac.
    #[arg(long)]
    family: String,
    /// Comma-separated key=value overrides, e.g. "T=20000,d=5,V=1.5".
    #[arg(long)]
    params: Option<String>,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Records CSV produced by `run`.
    csv: PathBuf,
    /// Threshold for the crossing-iteration column.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct PlotArgs {
    /// Records CSV produced by `run`.
    csv: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version displays succeed; anything else is a usage
            // problem, reported with the configuration-error code.
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Bounds(args) => bounds(args),
        Command::Summarize(args) => summarize(args),
        Command::Plot(args) => plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err {
                Error::Config(_) => 2,
                Error::Io { .. } => 4,
                _ => 3,
            })
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = match (&args.config, &args.experiment) {
        (Some(path), None) => parse_config_file(path)?,
        (None, Some(id)) => ExperimentConfig {
            experiment: id.clone(),
            family: None,
            overrides: Overrides::default(),
        },
        (None, None) => {
            return Err(Error::Config(
                "pass a configuration file or --experiment <id>".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects a config file with --experiment"),
    };
    let flags = Overrides {
        horizon: args.horizon,
        delays: args.delays.clone(),
        reps: args.reps,
        seed: args.seed,
        stride: args.stride,
        out_dir: args.out_dir.as_ref().map(|p| p.display().to_string()),
        ..Overrides::default()
    };
    config.overrides = config.overrides.layered_under(&flags);

    let plan = build_plan(&config)?;
    println!(
        "experiment: {} (T={}, reps={}, arms={}, seed={})",
        plan.id,
        plan.horizon,
        plan.reps,
        plan.arms.len(),
        plan.base_seed
    );
    let output = run_experiment(&plan)?;

    let out_dir = PathBuf::from(config.overrides.out_dir.as_deref().unwrap_or("."));
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let records_path = out_dir.join("records.csv");
    let summary_path = out_dir.join("summary.csv");
    write_records(&records_path, &output.records)?;
    write_summary(&summary_path, &output.summaries)?;

    print_summaries(&output.summaries);
    println!();
    println!("records: {}", records_path.display());
    println!("summary: {}", summary_path.display());
    Ok(())
}

fn summarize(args: SummarizeArgs) -> Result<()> {
    if let Some(t) = args.threshold {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Config(format!(
                "--threshold must be positive, got {t}"
            )));
        }
    }
    let records = read_records(&args.csv)?;
    let summaries = summarize_records(&records, args.threshold);
    print_summaries(&summaries);
    Ok(())
}

fn plot(args: PlotArgs) -> Result<()> {
    let records = read_records(&args.csv)?;
    let svg = render_plot(&records)?;
    write_text(&args.out, &svg)?;
    println!("plot: {}", args.out.display());
    Ok(())
}

fn print_summaries(summaries: &[ArmSummary]) {
    println!(
        "{:<32} {:>6} {:>14} {:>12} {:>12}",
        "experiment", "delay", "iter_threshold", "std_final", "time_mean_s"
    );
    for s in summaries {
        let crossing = s
            .iter_threshold
            .map_or_else(|| "-".to_string(), |t| t.to_string());
        let time = if s.time_mean_s.is_finite() {
            format!("{:.2}", s.time_mean_s)
        } else {
            "-".to_string()
        };
        println!(
            "{:<32} {:>6} {:>14} {:>12} {:>12}",
            s.experiment,
            s.delay,
            crossing,
            format!("{:.3e}", s.std_final),
            time
        );
    }
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let params = parse_params(args.params.as_deref())?;
    let family = args.family.as_str();
    let allowed: &[&str] = match family {
        "radial" => &[
            "T",
            "d",
            "R",
            "p",
            "eta",
            "V",
            "Delta",
            "Lambda",
            "kappa",
            "L",
            "amplitude_cap",
            "frequency_cap",
        ],
        "glm" => &[
            "T", "d", "R", "eta", "V", "Delta", "Lambda", "kappa", "Gamma", "alpha", "factor",
        ],
        "quadfrac" => &[
            "T",
            "d",
            "R",
            "p",
            "eta",
            "V",
            "Delta",
            "Lambda",
            "kappa",
            "G",
            "alpha",
            "factor",
            "h_exponent",
            "h_scale",
            "alpha1",
            "eta1",
        ],
        other => {
            return Err(Error::Config(format!(
                "unknown loss family '{other}'; expected radial, glm, or quadfrac"
            )))
        }
    };
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!(
                "parameter '{key}' does not apply to family '{family}'"
            )));
        }
    }
    match family {
        "radial" => bounds_radial(&params),
        "glm" => bounds_glm(&params),
        _ => bounds_quadfrac(&params),
    }
}

/// `--params` string into a key -> number map.
fn parse_params(raw: Option<&str>) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    let Some(raw) = raw else { return Ok(map) };
    for piece in raw.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((key, value)) = piece.split_once('=') else {
            return Err(Error::Config(format!(
                "parameter '{piece}' is not of the form key=value"
            )));
        };
        let key = key.trim();
        let value: f64 = value.trim().parse().map_err(|_| {
            Error::Config(format!("parameter '{key}' has a non-numeric value"))
        })?;
        if key.is_empty() {
            return Err(Error::Config(format!(
                "parameter '{piece}' has an empty key"
            )));
        }
        if map.insert(key.to_string(), value).is_some() {
            return Err(Error::Config(format!("parameter '{key}' appears twice")));
        }
    }
    Ok(map)
}

fn value(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn count(params: &BTreeMap<String, f64>, key: &str, default: f64) -> Result<u64> {
    let raw = value(params, key, default);
    if !(raw.is_finite() && raw >= 1.0 && raw.fract() == 0.0) {
        return Err(Error::Config(format!(
            "parameter '{key}' must be a positive integer, got {raw}"
        )));
    }
    Ok(raw as u64)
}

fn delay_level(params: &BTreeMap<String, f64>) -> Result<u32> {
    let raw = count(params, "d", 1.0)?;
    u32::try_from(raw).map_err(|_| Error::Config(format!("parameter 'd' is too large: {raw}")))
}

/// Reports parameter-driven evaluation failures with the configuration exit
/// code, mirroring how plan building classifies them.
fn config_err(err: Error) -> Error {
    match err {
        Error::Config(_) => err,
        other => Error::Config(other.to_string()),
    }
}

fn print_quadratic(label: &str, bound: &QuadraticFormBound) {
    println!("{label}: {}", bound.value);
    println!(
        "  coefficients: a={} b={} c={}",
        bound.a, bound.b, bound.c
    );
}

fn bounds_radial(params: &BTreeMap<String, f64>) -> Result<()> {
    let horizon = count(params, "T", 20000.0)?;
    let delay = delay_level(params)?;
    let radius = value(params, "R", 100.0);
    let p = count(params, "p", 100.0)? as usize;
    let amplitude_cap = value(params, "amplitude_cap", 1.0);
    let frequency_cap = value(params, "frequency_cap", 2.5);
    let defaults = radial_constants(p, amplitude_cap, frequency_cap, radius);
    let lipschitz = params
        .get("L")
        .copied()
        .or(defaults.lipschitz)
        .expect("the radial family always certifies L");
    let quasar = value(params, "kappa", defaults.quasar);
    let v = value(params, "V", 0.0);
    let delta = value(params, "Delta", 0.0);
    let lambda = value(params, "Lambda", 0.0);
    let eta = match params.get("eta") {
        Some(&e) => e,
        None => step_size_lipschitz_optimal(radius, lipschitz, horizon, delay, v)
            .map_err(config_err)?,
    };
    let inputs = BoundInputs {
        radius,
        quasar,
        max_delay: delay,
        horizon,
        eta,
        path_variation: v,
        cumulative_error: delta,
        cumulative_sq_error: lambda,
        lipschitz: Some(lipschitz),
        ..BoundInputs::default()
    };
    let general = bound_lipschitz(&inputs).map_err(config_err)?;
    println!("family: radial");
    println!("T={horizon} d={delay} R={radius} p={p}");
    println!("L={lipschitz} kappa={quasar}");
    println!("V_T={v} Delta_T={delta} Lambda_T={lambda} eta={eta}");
    println!("Lipschitz regret bound: {general}");
    if delta == 0.0 && lambda == 0.0 {
        let exact = bound_lipschitz_exact_feedback(&inputs).map_err(config_err)?;
        println!("exact-feedback form: {exact}");
    }
    Ok(())
}

fn bounds_glm(params: &BTreeMap<String, f64>) -> Result<()> {
    let horizon = count(params, "T", 20000.0)?;
    let delay = delay_level(params)?;
    let radius = value(params, "R", 1.0);
    // Unit-normalized feature rows: Gamma = 1/8 and kappa certified at the
    // largest attainable margin, radius * 1.
    let gamma = value(params, "Gamma", 0.125);
    let quasar = value(params, "kappa", (8.0 * sigmoid_prime(radius)).min(1.0));
    let factor = value(params, "factor", 0.99);
    let d = f64::from(delay);
    let alpha = value(
        params,
        "alpha",
        (d + 2.0 * d.sqrt() * (d - 1.0)) * gamma / (2.0 * quasar),
    );
    let eta = match params.get("eta") {
        Some(&e) => e,
        None => step_size_weakly_smooth(quasar, gamma, delay, factor).map_err(config_err)?,
    };
    let v = value(params, "V", 0.0);
    let delta = value(params, "Delta", 0.0);
    let lambda = value(params, "Lambda", 0.0);
    let inputs = BoundInputs {
        radius,
        quasar,
        max_delay: delay,
        horizon,
        eta,
        path_variation: v,
        cumulative_error: delta,
        cumulative_sq_error: lambda,
        weak_smoothness: Some(gamma),
        alpha: Some(alpha),
        ..BoundInputs::default()
    };
    let bound = bound_weakly_smooth(&inputs).map_err(config_err)?;
    println!("family: glm");
    println!("T={horizon} d={delay} R={radius}");
    println!("Gamma={gamma} kappa={quasar}");
    println!("V_T={v} Delta_T={delta} Lambda_T={lambda}");
    println!("alpha={alpha} (eta must stay below {}) eta={eta}", 1.0 / alpha);
    print_quadratic("weakly smooth regret bound", &bound);
    Ok(())
}

fn bounds_quadfrac(params: &BTreeMap<String, f64>) -> Result<()> {
    let horizon = count(params, "T", 20000.0)?;
    let delay = delay_level(params)?;
    let radius = value(params, "R", 10.0);
    let p = count(params, "p", 50.0)? as usize;
    let (kappa_default, g_default) =
        quadfrac_certificates(p, radius, 10.0, 100.0).map_err(config_err)?;
    let quasar = value(params, "kappa", kappa_default);
    let g = value(params, "G", g_default);
    let gamma = 2.0 * g;
    let factor = value(params, "factor", 0.99);
    let d = f64::from(delay);
    let alpha = value(
        params,
        "alpha",
        (d + 2.0 * d.sqrt() * (d - 1.0)) * gamma / (2.0 * quasar),
    );
    let eta = match params.get("eta") {
        Some(&e) => e,
        None => step_size_weakly_smooth(quasar, gamma, delay, factor).map_err(config_err)?,
    };
    let v = value(params, "V", 0.0);
    let delta = value(params, "Delta", 0.0);
    let lambda = value(params, "Lambda", 0.0);
    let inputs = BoundInputs {
        radius,
        quasar,
        max_delay: delay,
        horizon,
        eta,
        path_variation: v,
        cumulative_error: delta,
        cumulative_sq_error: lambda,
        weak_smoothness: Some(gamma),
        alpha: Some(alpha),
        ..BoundInputs::default()
    };
    let bound = bound_weakly_smooth(&inputs).map_err(config_err)?;
    println!("family: quadfrac");
    println!("T={horizon} d={delay} R={radius} p={p}");
    println!("G={g} Gamma={gamma} kappa={quasar}");
    println!("V_T={v} Delta_T={delta} Lambda_T={lambda}");
    println!("alpha={alpha} (eta must stay below {}) eta={eta}", 1.0 / alpha);
    print_quadratic("weakly smooth regret bound", &bound);

    // With a probe-step schedule the zeroth-order bound applies as well; its
    // error sums come from the schedule, not from Delta/Lambda.
    if let Some(&exponent) = params.get("h_exponent") {
        let h_scale = value(params, "h_scale", 1.0);
        let schedule = PowerSchedule::new(h_scale, exponent).map_err(config_err)?;
        let (h_sum, h_sq_sum) = schedule.cumulative(horizon);
        let alpha1 = value(
            params,
            "alpha1",
            (d + 4.0 * d.sqrt() * (d - 1.0)) * g / quasar,
        );
        let eta1 = value(params, "eta1", factor / alpha1);
        let pf = p as f64;
        let delta_bar = pf.sqrt() * g / 2.0 * h_sum;
        let lambda_bar = pf * g * g / 4.0 * h_sq_sum;
        let bandit_inputs = BoundInputs {
            radius,
            quasar,
            max_delay: delay,
            horizon,
            eta: eta1,
            path_variation: v,
            smoothness: Some(g),
            alpha: Some(alpha1),
            dimension: Some(p),
            h_sums: Some((h_sum, h_sq_sum)),
            ..BoundInputs::default()
        };
        let bandit = bound_bandit(&bandit_inputs).map_err(config_err)?;
        println!();
        println!("probe schedule: h_t = {h_scale} * t^-{exponent}");
        println!("schedule sums: sum h={h_sum} sum h^2={h_sq_sum}");
        println!("implied error sums: Delta_bar={delta_bar} Lambda_bar={lambda_bar}");
        println!(
            "alpha1={alpha1} (eta must stay below {}) eta1={eta1}",
            1.0 / alpha1
        );
        print_quadratic("zeroth-order regret bound", &bandit);
    }
    Ok(())
}
