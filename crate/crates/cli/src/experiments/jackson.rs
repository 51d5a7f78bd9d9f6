use serde_json::json;

use rbmlab_core::environment::{reflection_to_routing, routing_to_reflection};
use rbmlab_core::srbm::{is_completely_s, spectral_radius_abs, ReflectionSpec};
use rbmlab_core::stats::ReportRow;

use super::{row, Context};
use crate::config::Config;
use crate::output::num;
use crate::CliError;

pub fn run(config: &Config, ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let (routing, rho) = match (&config.routing, &config.rho_matrix) {
        (Some(p), None) => {
            let n = config.n.unwrap_or(p.len());
            (p.clone(), routing_to_reflection(p, n)?)
        }
        (None, Some(rho)) => {
            let n = config.n.unwrap_or(rho.len());
            (reflection_to_routing(rho, n)?, rho.clone())
        }
        _ => {
            return Err(CliError::Schema(
                "give exactly one of `routing` and `rho_matrix`".into(),
            ))
        }
    };
    let n = rho.len();
    let scale = (n - 1) as f64;
    let reflection: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { rho[i][j] / scale })
                .collect()
        })
        .collect();
    let spec = ReflectionSpec::explicit(&reflection)?;
    let mut table = Vec::new();
    for i in 0..n {
        for j in 0..n {
            table.push(vec![
                i.to_string(),
                j.to_string(),
                num(routing[i][j]),
                num(rho[i][j]),
                num(reflection[i][j]),
            ]);
        }
    }
    ctx.artifacts.table("jackson.csv", "i,j,routing,rho,reflection", &table)?;
    let radius = spectral_radius_abs(&spec);
    let completely_s = is_completely_s(&spec)?;
    println!("n={n} completely_s={completely_s} spectral_radius_abs={radius}");
    ctx.note("completely_s", json!(completely_s));
    Ok(vec![
        row("completely_s", n, f64::NAN, 0.0, f64::from(u8::from(completely_s)), 0.0),
        row("spectral_radius_abs", n, f64::NAN, 0.0, radius, 0.0),
    ])
}
