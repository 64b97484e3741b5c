//! Deterministic SVG rendering of benchmark records.
//!
//! One curve per `(experiment, delay)` series: the cross-repetition mean
//! of the average regret on a log scale, with a `+-1` standard deviation
//! band. Everything is emitted with fixed formatting and in sorted series
//! order, so the same records always render to the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

use super::csvio::RunRecord;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 230.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// Fixed palette, reused cyclically past eight series.
const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc949", "#b07aa1", "#9c755f",
];

/// Smallest value the log axis distinguishes; values at or below zero
/// clamp here.
const FLOOR: f64 = 1e-12;

/// One aggregated series: per sampled round, the mean and standard
/// deviation of the average regret across repetitions.
struct Series {
    name: String,
    rounds: Vec<u64>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

fn aggregate(records: &[RunRecord]) -> Result<Vec<Series>> {
    let mut grouped: BTreeMap<(String, u32), BTreeMap<u64, Vec<f64>>> = BTreeMap::new();
    for record in records {
        if !record.regret_avg.is_finite() {
            return Err(Error::Config(format!(
                "non-finite average regret at round {} of '{}'",
                record.t, record.experiment
            )));
        }
        grouped
            .entry((record.experiment.clone(), record.delay))
            .or_default()
            .entry(record.t)
            .or_default()
            .push(record.regret_avg);
    }
    if grouped.is_empty() {
        return Err(Error::Config("no records to plot".into()));
    }
    let mut series = Vec::with_capacity(grouped.len());
    for ((experiment, delay), by_round) in grouped {
        let mut rounds = Vec::with_capacity(by_round.len());
        let mut mean = Vec::with_capacity(by_round.len());
        let mut std = Vec::with_capacity(by_round.len());
        for (t, values) in by_round {
            let n = values.len() as f64;
            let m = values.iter().sum::<f64>() / n;
            let s = if values.len() > 1 {
                (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            rounds.push(t);
            mean.push(m);
            std.push(s);
        }
        series.push(Series {
            name: format!("{experiment} d={delay}"),
            rounds,
            mean,
            std,
        });
    }
    Ok(series)
}

fn log_clamped(v: f64) -> f64 {
    v.max(FLOOR).log10()
}

/// Renders records to a standalone SVG document.
pub fn render_plot(records: &[RunRecord]) -> Result<String> {
    let series = aggregate(records)?;

    let t_max = series
        .iter()
        .flat_map(|s| s.rounds.iter().copied())
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for s in &series {
        for i in 0..s.mean.len() {
            y_lo = y_lo.min(log_clamped(s.mean[i] - s.std[i]));
            y_hi = y_hi.max(log_clamped(s.mean[i] + s.std[i]));
        }
    }
    if !(y_lo.is_finite() && y_hi.is_finite()) {
        return Err(Error::Config("records contain no finite regret values".into()));
    }
    let y_lo_tick = y_lo.floor();
    let y_hi_tick = y_hi.ceil().max(y_lo_tick + 1.0);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |t: f64| MARGIN_LEFT + (t - 1.0) / (t_max - 1.0).max(1.0) * plot_w;
    let sy =
        |log_v: f64| MARGIN_TOP + (y_hi_tick - log_v) / (y_hi_tick - y_lo_tick) * plot_h;

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    );
    let _ = write!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>\n"
    );

    // Axes frame.
    let _ = write!(
        svg,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
        MARGIN_LEFT, MARGIN_TOP, plot_w, plot_h
    );

    // Horizontal gridlines and tick labels at decades.
    let mut decade = y_lo_tick;
    while decade <= y_hi_tick + 1e-9 {
        let y = sy(decade);
        let _ = write!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"12\" \
             fill=\"#333333\">1e{}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0,
            decade as i64
        );
        decade += 1.0;
    }

    // Vertical ticks at quarters of the horizon.
    for i in 0..=4u32 {
        let t = 1.0 + f64::from(i) / 4.0 * (t_max - 1.0);
        let x = sx(t);
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        );
        let _ = write!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\" \
             fill=\"#333333\">{}</text>\n",
            MARGIN_TOP + plot_h + 18.0,
            t.round() as u64
        );
    }

    // Axis titles.
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\" \
         fill=\"#333333\">iteration</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = write!(
        svg,
        "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"14\" \
         fill=\"#333333\" transform=\"rotate(-90 20 {:.2})\">average regret</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    // Bands first so every mean line draws above them.
    for (index, s) in series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let mut band = String::new();
        for (i, &t) in s.rounds.iter().enumerate() {
            let _ = write!(
                band,
                "{:.2},{:.2} ",
                sx(t as f64),
                sy(log_clamped(s.mean[i] + s.std[i]))
            );
        }
        for (i, &t) in s.rounds.iter().enumerate().rev() {
            let _ = write!(
                band,
                "{:.2},{:.2} ",
                sx(t as f64),
                sy(log_clamped(s.mean[i] - s.std[i]))
            );
        }
        let _ = write!(
            svg,
            "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n",
            band.trim_end()
        );
    }
    for (index, s) in series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let mut line = String::new();
        for (i, &t) in s.rounds.iter().enumerate() {
            let _ = write!(
                line,
                "{:.2},{:.2} ",
                sx(t as f64),
                sy(log_clamped(s.mean[i]))
            );
        }
        let _ = write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            line.trim_end()
        );
    }

    // Legend.
    for (index, s) in series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let y = MARGIN_TOP + 10.0 + index as f64 * 20.0;
        let x = MARGIN_LEFT + plot_w + 16.0;
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>\n",
            x + 22.0
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"#333333\">{}</text>\n",
            x + 28.0,
            y + 4.0,
            escape(&s.name)
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Escapes the XML special characters that can appear in series names.
fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(experiment: &str, rep: u32, delay: u32, t: u64, avg: f64) -> RunRecord {
        RunRecord {
            experiment: experiment.to_string(),
            rep,
            delay,
            t,
            regret_cum: avg * t as f64,
            regret_avg: avg,
            gap_smoothed: avg,
            eta: 0.1,
            seed: 7 + u64::from(rep),
        }
    }

    fn sample() -> Vec<RunRecord> {
        let mut records = Vec::new();
        for rep in 0..3u32 {
            for (i, t) in [1u64, 10, 20].into_iter().enumerate() {
                let base = 1.0 / (i + 1) as f64;
                records.push(record("radial", rep, 1, t, base * (1.0 + 0.1 * rep as f64)));
                records.push(record("radial", rep, 5, t, 2.0 * base));
            }
        }
        records
    }

    #[test]
    fn renders_one_line_and_band_per_series() {
        let svg = render_plot(&sample()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert!(svg.contains("radial d=1"));
        assert!(svg.contains("radial d=5"));
        assert!(svg.contains("iteration"));
        assert!(svg.contains("average regret"));
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn rendering_is_byte_stable() {
        let records = sample();
        assert_eq!(
            render_plot(&records).unwrap(),
            render_plot(&records).unwrap()
        );
        // Record order must not matter: aggregation sorts.
        let mut reversed = records.clone();
        reversed.reverse();
        assert_eq!(
            render_plot(&records).unwrap(),
            render_plot(&reversed).unwrap()
        );
    }

    #[test]
    fn empty_and_degenerate_inputs_are_rejected() {
        assert!(render_plot(&[]).is_err());
        let nan = vec![record("radial", 0, 1, 1, f64::NAN)];
        assert!(render_plot(&nan).is_err());
    }

    #[test]
    fn zero_values_clamp_to_the_floor() {
        let records = vec![
            record("glm", 0, 1, 1, 0.5),
            record("glm", 0, 1, 2, 0.0),
        ];
        let svg = render_plot(&records).unwrap();
        assert!(svg.contains("1e-12"));
    }
}
