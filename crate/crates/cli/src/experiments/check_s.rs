use serde_json::json;

use rbmlab_core::srbm::{is_completely_s, is_completely_s_lp, spectral_radius_abs, ReflectionSpec};
use rbmlab_core::stats::ReportRow;

use super::{row, Context};
use crate::config::Config;
use crate::output::num;
use crate::CliError;

/// Homogeneous matrices above this size skip the enumeration column.
const LP_COLUMN_LIMIT: usize = 10;

pub fn run(config: &Config, ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let mut cases: Vec<(usize, f64, ReflectionSpec)> = Vec::new();
    if let Some(rows) = &config.matrix {
        let spec = ReflectionSpec::explicit(rows)?;
        cases.push((spec.n(), f64::NAN, spec));
    } else {
        for n in config.n_values()? {
            for a in config.a_values()? {
                cases.push((n, a, ReflectionSpec::homogeneous(n, a)?));
            }
        }
    }
    let mut table = Vec::new();
    let mut report = Vec::new();
    let mut negatives = 0usize;
    for (n, a, spec) in &cases {
        let verdict = is_completely_s(spec)?;
        let enumerated = if *n <= LP_COLUMN_LIMIT {
            let lp = is_completely_s_lp(&spec.to_rows())?;
            lp.to_string()
        } else {
            String::new()
        };
        let radius = spectral_radius_abs(spec);
        if !verdict {
            negatives += 1;
        }
        let label = if a.is_nan() {
            format!("n={n} matrix")
        } else {
            format!("n={n} a={a}")
        };
        println!("{label} completely_s={verdict}");
        table.push(vec![
            n.to_string(),
            num(*a),
            verdict.to_string(),
            enumerated,
            num(radius),
        ]);
        report.push(row("completely_s", *n, *a, 0.0, f64::from(u8::from(verdict)), 0.0));
        report.push(row("spectral_radius_abs", *n, *a, 0.0, radius, 0.0));
    }
    ctx.artifacts.table(
        "check_s.csv",
        "n,a,completely_s,completely_s_enumerated,spectral_radius_abs",
        &table,
    )?;
    ctx.note("cases", json!(cases.len()));
    ctx.note("not_completely_s", json!(negatives));
    Ok(report)
}
