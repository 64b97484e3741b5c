//! The experiment harness end to end.
//!
//! A configuration string is parsed into a plan, the plan runs its seeded
//! repetitions in parallel, and the results land in a records file, a
//! summary file, and an SVG plot. A second run from the same configuration
//! produces byte-identical records, and recomputing the summary from the
//! written file reproduces the in-memory crossing iterations.

use dogd::bench::csvio::{read_text, write_text};
use dogd::bench::{
    build_plan, parse_config_str, read_records, render_plot, run_experiment, summarize_records,
    write_records, write_summary,
};
use dogd::Error;

const CONFIG: &str = "\
# paired comparison across delays on a small sigmoid-regression stream
experiment = custom
family = glm
horizon = 1200
dimension = 15
samples = 100
delays = 1, 4, 10
reps = 4
seed = 9
threshold = 0.001
# full-resolution records so the summary can be recomputed exactly
stride = 1
";

fn main() -> dogd::Result<()> {
    let config = parse_config_str(CONFIG)?;
    let plan = build_plan(&config)?;
    println!(
        "plan: {} with {} arms, T={}, reps={}, stride={}",
        plan.id,
        plan.arms.len(),
        plan.horizon,
        plan.reps,
        plan.stride
    );

    let output = run_experiment(&plan)?;
    println!(
        "{:>8} {:>16} {:>12} {:>12}",
        "delay", "iter_threshold", "std_final", "queries"
    );
    for s in &output.summaries {
        let crossing = s
            .iter_threshold
            .map_or_else(|| "-".to_string(), |t| t.to_string());
        println!(
            "{:>8} {:>16} {:>12.3e} {:>12}",
            s.delay, crossing, s.std_final, s.mean_queries
        );
    }

    let dir = std::env::temp_dir().join("dogd-harness-example");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let records_path = dir.join("records.csv");
    let summary_path = dir.join("summary.csv");
    let plot_path = dir.join("plot.svg");
    write_records(&records_path, &output.records)?;
    write_summary(&summary_path, &output.summaries)?;
    write_text(&plot_path, &render_plot(&output.records)?)?;
    println!();
    println!("wrote {}", records_path.display());
    println!("wrote {}", summary_path.display());
    println!("wrote {}", plot_path.display());

    // Same configuration, fresh run: the records file must not change by a
    // single byte.
    let rerun = run_experiment(&build_plan(&config)?)?;
    let rerun_path = dir.join("records_rerun.csv");
    write_records(&rerun_path, &rerun.records)?;
    let identical = read_text(&records_path)? == read_text(&rerun_path)?;
    println!();
    println!("re-run records byte-identical: {identical}");

    // The written file carries everything the summary needs.
    let recovered = summarize_records(&read_records(&records_path)?, Some(plan.threshold));
    let same_crossings = recovered
        .iter()
        .zip(&output.summaries)
        .all(|(a, b)| a.iter_threshold == b.iter_threshold);
    println!("summary crossings recovered from the file: {same_crossings}");
    Ok(())
}
