use serde_json::json;

use rbmlab_core::mckean_vlasov::{
    analytic_rbm_marginal, solve_nlr, solve_nlr_penalized, MvSolution, NlrConfig, PenalizedConfig,
};
use rbmlab_core::stats::ReportRow;
use rbmlab_core::{InitialLaw, TimeGrid};

use super::{grid, row, stderr_of, Context};
use crate::config::Config;
use crate::output::num;
use crate::CliError;

pub(crate) const DEFAULT_MEMBERS: usize = 10_000;

/// Picard solve with every option taken from the config.
pub(crate) fn nlr_from(config: &Config, a: f64, grid: TimeGrid, members: usize, seed: u64) -> NlrConfig {
    let mut nlr = NlrConfig::new(a, grid, members, seed);
    nlr.drift = config.b;
    nlr.volatility = config.sigma;
    nlr.initial = config.initial;
    nlr.damping = config.damping;
    if let Some(tol) = config.mv_tol {
        nlr.tol = tol;
    }
    nlr
}

/// `lambda(T)` and the standard error of the member average `L_j(T)`.
pub(crate) fn terminal_lambda(sol: &MvSolution) -> (f64, f64) {
    let l: Vec<f64> = sol.terminal().iter().map(|p| p.1).collect();
    (sol.lambda().last(), stderr_of(&l))
}

/// The uncoupled driftless system started at 0, whose marginal is a folded normal.
pub(crate) fn has_closed_form(config: &Config, a: f64) -> bool {
    a == 0.0 && config.b == 0.0 && config.initial == InitialLaw::Point { at: 0.0 }
}

pub fn run(config: &Config, ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let a = config.require_a()?;
    let grid = grid(config, 1000)?;
    let members = config.ensemble_or(DEFAULT_MEMBERS);
    let sol = if config.penalized {
        let epsilon = config
            .epsilon
            .ok_or_else(|| CliError::Schema("`penalized` needs `epsilon`".into()))?;
        let mut pen = PenalizedConfig::new(a, grid, members, epsilon, config.seed);
        pen.drift = config.b;
        pen.volatility = config.sigma;
        pen.initial = config.initial;
        ctx.progress(format!("penalized mean-field solve, epsilon = {epsilon}"));
        solve_nlr_penalized(&pen)
    } else {
        ctx.progress("Picard iteration for the mean-field limit");
        solve_nlr(&nlr_from(config, a, grid, members, config.seed))
    };
    let sol = sol?;

    ctx.artifacts.csv("lambda.csv", |buf| Ok(sol.write_lambda_csv(buf)?))?;
    let history: Vec<Vec<String>> = sol
        .residual_history()
        .iter()
        .enumerate()
        .map(|(i, r)| vec![(i + 1).to_string(), num(*r)])
        .collect();
    ctx.artifacts.table("picard.csv", "iteration,residual", &history)?;
    let terminal: Vec<Vec<String>> = sol
        .terminal()
        .iter()
        .enumerate()
        .map(|(j, (x, l))| vec![j.to_string(), num(*x), num(*l)])
        .collect();
    ctx.artifacts.table("terminal.csv", "member,X,L", &terminal)?;
    ctx.artifacts.json("summary.json", &sol.summary())?;

    let t = grid.horizon();
    let (lambda, se) = terminal_lambda(&sol);
    let xs: Vec<f64> = sol.terminal().iter().map(|p| p.0).collect();
    let mean_x = rbmlab_core::paths::mean_all(&xs);
    let mut report = vec![
        row("lambda", members, a, t, lambda, se),
        row("mean_x", members, a, t, mean_x, stderr_of(&xs)),
        row("picard_iterations", members, a, t, sol.picard_iterations() as f64, 0.0),
        row("picard_residual", members, a, t, sol.picard_residual(), 0.0),
    ];
    if has_closed_form(config, a) {
        let law = analytic_rbm_marginal(t, config.sigma, 0.0)?;
        report.push(row("folded_normal_mean", members, a, t, law.mean(), 0.0));
    }
    println!("lambda({t}) = {lambda} (stderr {se})");
    ctx.note("picard_iterations", json!(sol.picard_iterations()));
    ctx.note("picard_residual", json!(sol.picard_residual()));
    Ok(report)
}
