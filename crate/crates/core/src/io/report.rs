//! Run reports.
//!
//! JSON: one object with the keys, in order, `m, n, epsilon_target,
//! epsilon_achieved, max_sigma, weight_sum, duality_gap, logdet, iterations,
//! wall_ms, seed, algorithm, certified`. Reals carry 17 significant digits;
//! non-finite reals are written as `null`.
//!
//! CSV: header `iter,max_sigma,weight_sum,wall_ms`, one row per trace record.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::trace::SolveTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Domain(format!("unknown report format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub m: usize,
    pub n: usize,
    pub epsilon_target: f64,
    pub epsilon_achieved: f64,
    pub max_sigma: f64,
    pub weight_sum: f64,
    pub duality_gap: f64,
    pub logdet: f64,
    pub iterations: usize,
    pub wall_ms: f64,
    pub seed: u64,
    pub algorithm: String,
    pub certified: bool,
}

fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl RunReport {
    /// The JSON object, one key per line.
    pub fn to_json(&self) -> String {
        let fields = [
            ("m", self.m.to_string()),
            ("n", self.n.to_string()),
            ("epsilon_target", real(self.epsilon_target)),
            ("epsilon_achieved", real(self.epsilon_achieved)),
            ("max_sigma", real(self.max_sigma)),
            ("weight_sum", real(self.weight_sum)),
            ("duality_gap", real(self.duality_gap)),
            ("logdet", real(self.logdet)),
            ("iterations", self.iterations.to_string()),
            ("wall_ms", real(self.wall_ms)),
            ("seed", self.seed.to_string()),
            ("algorithm", json_string(&self.algorithm)),
            ("certified", self.certified.to_string()),
        ];
        let body: Vec<String> = fields.iter().map(|(k, v)| format!("  \"{k}\": {v}")).collect();
        format!("{{\n{}\n}}\n", body.join(",\n"))
    }
}

pub fn trace_csv(trace: &SolveTrace) -> String {
    let mut out = String::from("iter,max_sigma,weight_sum,wall_ms\n");
    for r in &trace.records {
        let _ = writeln!(out, "{},{},{},{}", r.iter, real(r.max_sigma), real(r.weight_sum), real(r.wall_ms));
    }
    out
}

pub fn write_report(
    report: &RunReport,
    trace: &SolveTrace,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Csv => trace_csv(trace),
    };
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceRecord;

    fn sample() -> RunReport {
        RunReport {
            m: 5,
            n: 5,
            epsilon_target: 0.1,
            epsilon_achieved: 0.0,
            max_sigma: 1.0,
            weight_sum: 5.0,
            duality_gap: 0.0,
            logdet: 0.0,
            iterations: 1,
            wall_ms: 0.25,
            seed: 0,
            algorithm: "fixed-point".into(),
            certified: true,
        }
    }

    #[test]
    fn json_has_fixed_keys_and_digits() {
        let json = sample().to_json();
        let keys: Vec<&str> =
            json.lines().filter_map(|l| l.trim().strip_prefix('"')).map(|l| l.split('"').next().unwrap()).collect();
        assert_eq!(
            keys,
            [
                "m",
                "n",
                "epsilon_target",
                "epsilon_achieved",
                "max_sigma",
                "weight_sum",
                "duality_gap",
                "logdet",
                "iterations",
                "wall_ms",
                "seed",
                "algorithm",
                "certified"
            ]
        );
        assert!(json.contains("\"epsilon_target\": 1.0000000000000001e-1"));
        assert!(json.contains("\"epsilon_achieved\": 0.0000000000000000e0"));
        assert!(json.contains("\"certified\": true"));
        assert_eq!(real(f64::NAN), "null");
    }

    #[test]
    fn csv_has_one_row_per_record() {
        let records =
            (1..=60).map(|k| TraceRecord { iter: k, max_sigma: 1.5, weight_sum: 10.0, wall_ms: k as f64 }).collect();
        let trace = SolveTrace { iterations: 60, wall_ms: 60.0, records };
        let csv = trace_csv(&trace);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 61);
        assert_eq!(lines[0], "iter,max_sigma,weight_sum,wall_ms");
        assert!(lines[60].starts_with("60,"));
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("report.json");
        let err = write_report(&sample(), &SolveTrace::default(), &path, ReportFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }

    #[test]
    fn algorithm_names_are_escaped() {
        assert_eq!(json_string("a\"b\\c\n"), "\"a\\\"b\\\\c\\u000a\"");
    }
}
