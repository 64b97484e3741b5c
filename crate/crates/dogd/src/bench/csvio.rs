//! Record and summary files.
//!
//! Records hold the sampled per-round trajectories of every arm and
//! repetition; the summary holds one aggregate row per arm. Floating
//! point values are written in shortest round-trip form, so reading a
//! records file back yields bit-identical values and rewriting an
//! unchanged run yields byte-identical files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::driver::ArmSummary;

/// One sampled round of one arm in one repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Experiment id, qualified by arm label where delay is not enough to
    /// tell arms apart.
    pub experiment: String,
    /// Repetition index.
    pub rep: u32,
    /// Constant feedback delay of the arm.
    pub delay: u32,
    /// Round (1-based).
    pub t: u64,
    /// Cumulative dynamic regret through round `t`.
    pub regret_cum: f64,
    /// `regret_cum / t`.
    pub regret_avg: f64,
    /// Trailing-window average of the per-round gap at `t`.
    pub gap_smoothed: f64,
    /// Step size of the arm.
    pub eta: f64,
    /// Seed of the repetition.
    pub seed: u64,
}

/// Column order of the records file.
const RECORD_HEADER: [&str; 9] = [
    "experiment",
    "rep",
    "delay",
    "t",
    "regret_cum",
    "regret_avg",
    "gap_smoothed",
    "eta",
    "seed",
];

/// Column order of the summary file.
const SUMMARY_HEADER: [&str; 5] = [
    "experiment",
    "delay",
    "iter_threshold",
    "std_final",
    "time_mean_s",
];

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path.display().to_string(), io),
            _ => unreachable!("is_io_error guarantees an I/O kind"),
        }
    } else {
        Error::Config(format!("{}: {e}", path.display()))
    }
}

/// Writes the records file, header included even when no records exist.
pub fn write_records(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    writer
        .write_record(RECORD_HEADER)
        .map_err(|e| csv_error(path, e))?;
    for record in records {
        writer.serialize(record).map_err(|e| csv_error(path, e))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Reads a records file back.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    {
        let headers = reader.headers().map_err(|e| csv_error(path, e))?;
        let got: Vec<&str> = headers.iter().collect();
        if got != RECORD_HEADER {
            return Err(Error::Config(format!(
                "{}: unexpected header {:?}",
                path.display(),
                got
            )));
        }
    }
    reader
        .deserialize()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

/// Writes the per-arm summary file. A crossing that never happens is
/// written as `-`; non-finite timing (from summaries rebuilt off records)
/// likewise.
pub fn write_summary(path: &Path, summaries: &[ArmSummary]) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    writer
        .write_record(SUMMARY_HEADER)
        .map_err(|e| csv_error(path, e))?;
    for s in summaries {
        let crossing = match s.iter_threshold {
            Some(t) => t.to_string(),
            None => "-".to_string(),
        };
        let time = if s.time_mean_s.is_finite() {
            s.time_mean_s.to_string()
        } else {
            "-".to_string()
        };
        writer
            .write_record([
                s.experiment.as_str(),
                &s.delay.to_string(),
                &crossing,
                &s.std_final.to_string(),
                &time,
            ])
            .map_err(|e| csv_error(path, e))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Reads a whole file to a string with the crate's error mapping.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes a string to a file with the crate's error mapping.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample_records() -> Vec<RunRecord> {
        vec![
            RunRecord {
                experiment: "radial".to_string(),
                rep: 0,
                delay: 1,
                t: 1,
                regret_cum: 0.625,
                regret_avg: 0.625,
                gap_smoothed: 0.625,
                eta: 0.1,
                seed: 7,
            },
            RunRecord {
                experiment: "radial".to_string(),
                rep: 0,
                delay: 1,
                t: 2,
                regret_cum: 1.0 / 3.0,
                regret_avg: 1.0 / 6.0,
                gap_smoothed: 0.228_843_815_243_812_27,
                eta: 0.1,
                seed: 7,
            },
        ]
    }

    #[test]
    fn records_round_trip_exactly() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("records.csv");
        let records = sample_records();
        write_records(&path, &records).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(back, records);
        // Bit-exact floats survive the text round trip.
        assert_eq!(back[1].regret_cum, 1.0 / 3.0);
    }

    #[test]
    fn empty_records_still_write_the_header() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("records.csv");
        write_records(&path, &[]).unwrap();
        let text = read_text(&path).unwrap();
        assert_eq!(
            text,
            "experiment,rep,delay,t,regret_cum,regret_avg,gap_smoothed,eta,seed\n"
        );
        assert!(read_records(&path).unwrap().is_empty());
    }

    #[test]
    fn rewriting_the_same_records_is_byte_identical() {
        let dir = tempdir().unwrap();
        let one = dir.path().join("a.csv");
        let two = dir.path().join("b.csv");
        let records = sample_records();
        write_records(&one, &records).unwrap();
        write_records(&two, &records).unwrap();
        assert_eq!(read_text(&one).unwrap(), read_text(&two).unwrap());
    }

    #[test]
    fn summary_marks_missing_crossings() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("summary.csv");
        let summaries = vec![
            ArmSummary {
                experiment: "radial".to_string(),
                delay: 1,
                eta: 0.1,
                iter_threshold: Some(1476),
                mean_final_regret: 0.05,
                std_final: 0.003,
                time_mean_s: 1.25,
                mean_queries: 20_000.0,
                reps: 20,
            },
            ArmSummary {
                experiment: "quadfrac-bandit/h=t^-0.4".to_string(),
                delay: 5,
                eta: 4.0,
                iter_threshold: None,
                mean_final_regret: 0.2,
                std_final: 0.01,
                time_mean_s: f64::NAN,
                mean_queries: f64::NAN,
                reps: 20,
            },
        ];
        write_summary(&path, &summaries).unwrap();
        let text = read_text(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "experiment,delay,iter_threshold,std_final,time_mean_s"
        );
        assert_eq!(lines[1], "radial,1,1476,0.003,1.25");
        assert_eq!(lines[2], "quadfrac-bandit/h=t^-0.4,5,-,0.01,-");
    }

    #[test]
    fn malformed_records_are_configuration_errors() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        write_text(&path, "nope,really\n1,2\n").unwrap();
        assert!(matches!(read_records(&path), Err(Error::Config(_))));
        let missing = dir.path().join("missing.csv");
        assert!(matches!(read_records(&missing), Err(Error::Io { .. })));
    }
}
