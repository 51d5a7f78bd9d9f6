use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::export::{compensated_sum, fmt_f64};

/// One line of a flat experiment report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub metric: String,
    pub n: usize,
    pub a: f64,
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
}

impl ReportRow {
    pub fn new(metric: impl Into<String>, n: usize, a: f64, t: f64, value: f64, stderr: f64) -> Self {
        Self {
            metric: metric.into(),
            n,
            a,
            t,
            value,
            stderr,
        }
    }
}

pub fn write_report_csv<W: Write>(rows: &[ReportRow], out: &mut W) -> Result<()> {
    writeln!(out, "metric,n,a,t,value,stderr")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.metric,
            r.n,
            fmt_f64(r.a),
            fmt_f64(r.t),
            fmt_f64(r.value),
            fmt_f64(r.stderr)
        )?;
    }
    Ok(())
}

/// Sample mean and its standard error (`NaN` error for a single value).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut out = Vec::new();
        write_report_csv(&[ReportRow::new("w1_x", 8, 0.5, 1.0, 0.25, 0.01)], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "metric,n,a,t,value,stderr");
        assert!(lines[1].starts_with("w1_x,8,5.0000000000000000e-1,"));
    }

    #[test]
    fn stderr_of_constant_is_zero() {
        assert_eq!(mean_and_stderr(&[2.0, 2.0, 2.0]), (2.0, 0.0));
        let (m, s) = mean_and_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
