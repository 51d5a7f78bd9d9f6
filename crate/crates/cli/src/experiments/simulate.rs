use serde_json::json;

use rbmlab_core::srbm::{simulate_particle_system, ParticleSystemConfig, SolverChoice, DEFAULT_TOL};
use rbmlab_core::stats::{mean_boundary, ReportRow};

use super::{grid, reflection, row, stderr_of, Context};
use crate::config::Config;
use crate::output::num;
use crate::CliError;

pub fn run(config: &Config, ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let n = match (&config.matrix, config.n) {
        (Some(m), _) => m.len(),
        (None, _) => config.require_n()?,
    };
    let spec = reflection(config, n, config.a)?;
    let grid = grid(config, 1000)?;
    let mut sys = ParticleSystemConfig::new(spec.clone(), grid, config.seed);
    sys.initial = config.initial;
    sys.drift = config.b;
    sys.volatility = config.sigma;
    sys.tol = config.tol.unwrap_or(DEFAULT_TOL);
    sys.solver = config.solver.unwrap_or(SolverChoice::Auto {
        epsilon: config.epsilon,
    });
    ctx.progress(format!("simulating n = {n} on {} steps", grid.steps()));
    let run = simulate_particle_system(&sys)?;
    let sol = &run.solution;

    ctx.artifacts.csv("paths.csv", |buf| Ok(sol.write_csv(buf)?))?;
    let mut drivers = Vec::with_capacity(n * grid.len());
    for (i, (w, x0)) in run.brownian.paths().iter().zip(&run.x0).enumerate() {
        for (k, v) in w.values().iter().enumerate() {
            drivers.push(vec![num(grid.time(k)), i.to_string(), num(x0 + v)]);
        }
    }
    ctx.artifacts.table("drivers.csv", "t,i,Z", &drivers)?;
    ctx.artifacts.json("summary.json", &sol.summary())?;

    let t = grid.horizon();
    let a = spec.homogeneous_coefficient().unwrap_or(f64::NAN);
    let l_end = sol.l_at(grid.steps());
    let mut report = vec![
        row("mean_boundary", n, a, t, mean_boundary(sol, t)?, stderr_of(&l_end)),
        row("min_x", n, a, t, sol.min_x(), 0.0),
        row("iterations", n, a, t, sol.iterations() as f64, 0.0),
        row("fixed_point_residual", n, a, t, sol.fixed_point_residual(), 0.0),
        row(
            "max_complementarity_residual",
            n,
            a,
            t,
            sol.max_complementarity_residual(),
            0.0,
        ),
    ];
    if sol.approximate() {
        report.push(row("approximate", n, a, t, 1.0, 0.0));
    }
    ctx.note("solver", json!(sol.solver()));
    ctx.note("iterations", json!(sol.iterations()));
    Ok(report)
}
