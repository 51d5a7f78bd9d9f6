use rayon::prelude::*;
use serde_json::json;

use rbmlab_core::environment::{
    annealed_replicates, coupled_run, quenched_replicates, sample_environment, CouplingReport,
    RunSetup,
};
use rbmlab_core::mckean_vlasov::solve_nlr;
use rbmlab_core::rng::replicate_seed;
use rbmlab_core::srbm::{SrbmSolution, DEFAULT_TOL};
use rbmlab_core::stats::{mean_and_stderr, mean_boundary, ReportRow};

use super::mv::{nlr_from, terminal_lambda};
use super::{grid, row, Context};
use crate::config::Config;
use crate::output::num;
use crate::CliError;

const DEFAULT_REPLICATIONS: usize = 100;
const DEFAULT_STEPS: usize = 200;
const DEFAULT_MEMBERS: usize = 100_000;
const MV_STREAM: usize = 1 << 32;

fn lambda_estimates(runs: &[SrbmSolution], t: f64) -> Result<Vec<f64>, CliError> {
    runs.iter()
        .map(|s| Ok(mean_boundary(s, t)?))
        .collect()
}

pub fn run(config: &Config, ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let a = config.require_a()?;
    let ns = config.n_values()?;
    let reps = config.replications_or(DEFAULT_REPLICATIONS);
    let rho = &config.rho;
    let grid = grid(config, DEFAULT_STEPS)?;
    let t = grid.horizon();
    let setup = RunSetup {
        grid,
        initial: config.initial,
        drift: config.b,
        volatility: config.sigma,
        tol: config.tol.unwrap_or(DEFAULT_TOL),
    };

    let mut table = Vec::new();
    let mut report = Vec::new();
    for &n in &ns {
        ctx.progress(format!("coupling at n = {n}: {reps} replications"));
        let reports: Vec<CouplingReport> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let env = sample_environment(
                    n,
                    a,
                    rho.half_width,
                    rho.eps_rho,
                    rho.family,
                    replicate_seed(rho.env_seed, r),
                )?;
                Ok(coupled_run(&env, &setup, replicate_seed(config.seed, r))?.report)
            })
            .collect::<Result<_, CliError>>()?;
        for (r, c) in reports.iter().enumerate() {
            table.push(vec![
                n.to_string(),
                r.to_string(),
                replicate_seed(rho.env_seed, r).to_string(),
                replicate_seed(config.seed, r).to_string(),
                num(c.max_dx),
                num(c.max_dl),
            ]);
        }
        let dl: Vec<f64> = reports.iter().map(|c| c.max_dl).collect();
        let dx: Vec<f64> = reports.iter().map(|c| c.max_dx).collect();
        let (ml, sl) = mean_and_stderr(&dl);
        let (mx, sx) = mean_and_stderr(&dx);
        report.push(row("mean_max_dl", n, a, t, ml, sl));
        report.push(row("mean_max_dx", n, a, t, mx, sx));
    }
    ctx.artifacts.table(
        "coupling_sweep.csv",
        "n,rep,env_seed,noise_seed,max_dx,max_dl",
        &table,
    )?;

    if let Some(qn) = config.quenched_n {
        ctx.progress(format!("quenched and annealed estimates at n = {qn}"));
        let env = sample_environment(qn, a, rho.half_width, rho.eps_rho, rho.family, rho.env_seed)?;
        ctx.artifacts.json(
            "environment.json",
            &serde_json::from_str::<serde_json::Value>(&env.to_json()?)
                .map_err(|e| CliError::Schema(e.to_string()))?,
        )?;
        let quenched = lambda_estimates(&quenched_replicates(&env, reps, config.seed, &setup)?, t)?;
        let annealed = lambda_estimates(
            &annealed_replicates(
                reps,
                qn,
                a,
                rho.half_width,
                rho.eps_rho,
                rho.family,
                rho.env_seed,
                config.seed,
                &setup,
            )?,
            t,
        )?;
        let mut rows = Vec::new();
        for (r, (q, an)) in quenched.iter().zip(&annealed).enumerate() {
            rows.push(vec![
                r.to_string(),
                replicate_seed(config.seed, r).to_string(),
                replicate_seed(rho.env_seed, r).to_string(),
                num(*q),
                num(*an),
            ]);
        }
        ctx.artifacts.table(
            "quenched_annealed.csv",
            "rep,noise_seed,annealed_env_seed,lambda_quenched,lambda_annealed",
            &rows,
        )?;
        let (mq, sq) = mean_and_stderr(&quenched);
        let (ma, sa) = mean_and_stderr(&annealed);
        report.push(row("lambda_quenched", qn, a, t, mq, sq));
        report.push(row("lambda_annealed", qn, a, t, ma, sa));

        let members = config.ensemble_or(DEFAULT_MEMBERS);
        let mv_seed = replicate_seed(config.seed, MV_STREAM);
        let mv = solve_nlr(&nlr_from(config, a, grid, members, mv_seed))?;
        let (lambda, se) = terminal_lambda(&mv);
        report.push(row("mv_lambda", members, a, t, lambda, se));
        ctx.note("mv_seed", json!(mv_seed));
    }
    Ok(report)
}
