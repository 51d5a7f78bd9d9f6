use rayon::prelude::*;
use serde_json::json;

use rbmlab_core::mckean_vlasov::{solve_nlr, solve_nlr_penalized, PenalizedConfig};
use rbmlab_core::paths::{sample_brownian_refined, Path};
use rbmlab_core::rng::replicate_seed;
use rbmlab_core::srbm::{solve_srbm_contraction, solve_srbm_penalty, ReflectionSpec, DEFAULT_TOL};
use rbmlab_core::stats::{mean_and_stderr, ReportRow};
use rbmlab_core::make_grid;

use super::mv::nlr_from;
use super::{row, sup_gap, Context};
use crate::config::Config;
use crate::output::num;
use crate::CliError;

const DEFAULT_REPLICATIONS: usize = 100;
const DEFAULT_MEMBERS: usize = 500;
/// Picard tolerance of the mean-field reference, well below the gaps measured.
const REFERENCE_TOL: f64 = 1e-9;

fn stable(horizon: f64, steps: usize, epsilon: f64) -> bool {
    horizon / steps as f64 <= epsilon * epsilon / 10.0 * (1.0 + 1e-9)
}

/// Step counts for each width: the finest grid meets `dt <= eps^2 / 10` for
/// the smallest width and every other grid is its coarsest divisor that is
/// still stable, so all widths share one set of fine increments.
pub(crate) fn sweep_grids(
    horizon: f64,
    epsilons: &[f64],
    finest: Option<usize>,
) -> Result<(usize, Vec<usize>), CliError> {
    let smallest = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let required = (10.0 * horizon / (smallest * smallest)).floor().max(1.0) as usize;
    let required = (required..).find(|&m| stable(horizon, m, smallest)).unwrap_or(required);
    let fine = finest.unwrap_or(required);
    if !stable(horizon, fine, smallest) {
        return Err(CliError::Schema(format!(
            "steps = {fine} is too coarse for epsilon = {smallest}; need at least {required}"
        )));
    }
    let steps = epsilons
        .iter()
        .map(|&eps| {
            (1..=fine)
                .find(|&d| fine % d == 0 && stable(horizon, d, eps))
                .unwrap_or(fine)
        })
        .collect();
    Ok((fine, steps))
}

struct Gap {
    x: f64,
    l: f64,
}

fn srbm_gap(
    config: &Config,
    spec: &ReflectionSpec,
    steps: usize,
    refinement: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Gap, CliError> {
    let n = spec.n();
    let grid = make_grid(config.horizon, steps)?;
    let w = sample_brownian_refined(grid, n, config.b, config.sigma, seed, refinement)?;
    let x0 = config.initial.sample_n(seed, n);
    let penalized = solve_srbm_penalty(&x0, &w, spec, epsilon)?;
    let z = w
        .paths()
        .iter()
        .zip(&x0)
        .map(|(p, c)| Path::new(grid, p.values().iter().map(|v| c + v).collect()))
        .collect::<Result<Vec<_>, _>>()?;
    let reflected = solve_srbm_contraction(&z, spec, config.tol.unwrap_or(DEFAULT_TOL), None)?;
    Ok(Gap {
        x: sup_gap(penalized.x()[0].values(), reflected.x()[0].values()),
        l: sup_gap(penalized.l()[0].values(), reflected.l()[0].values()),
    })
}

pub fn run(config: &Config, ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let n = config.require_n()?;
    let a = config.require_a()?;
    let epsilons = config.epsilons();
    if epsilons.is_empty() {
        return Err(CliError::Schema("`epsilon_list` is required".into()));
    }
    let reps = config.replications_or(DEFAULT_REPLICATIONS);
    let members = config.ensemble_or(DEFAULT_MEMBERS);
    let spec = ReflectionSpec::homogeneous(n, a)?;
    let (fine, steps) = sweep_grids(config.horizon, &epsilons, config.steps)?;
    let t = config.horizon;

    let mut detail = Vec::new();
    let mut summary = Vec::new();
    let mut report = Vec::new();
    for (&epsilon, &m) in epsilons.iter().zip(&steps) {
        let refinement = fine / m;
        ctx.progress(format!("epsilon = {epsilon}: {m} steps, refinement {refinement}"));
        let gaps: Vec<Gap> = (0..reps)
            .into_par_iter()
            .map(|r| srbm_gap(config, &spec, m, refinement, epsilon, replicate_seed(config.seed, r)))
            .collect::<Result<_, _>>()?;
        for (r, g) in gaps.iter().enumerate() {
            detail.push(vec![
                "srbm".into(),
                num(epsilon),
                m.to_string(),
                r.to_string(),
                replicate_seed(config.seed, r).to_string(),
                num(g.x),
                num(g.l),
            ]);
        }
        let gx: Vec<f64> = gaps.iter().map(|g| g.x).collect();
        let gl: Vec<f64> = gaps.iter().map(|g| g.l).collect();
        let (mx, sx) = mean_and_stderr(&gx);
        let (ml, sl) = mean_and_stderr(&gl);
        summary.push(vec![
            "srbm".into(),
            num(epsilon),
            m.to_string(),
            reps.to_string(),
            num(mx),
            num(sx),
            num(ml),
            num(sl),
            String::new(),
        ]);
        report.push(row(format!("srbm_gap_x[eps={epsilon}]"), n, a, t, mx, sx));
        report.push(row(format!("srbm_gap_l[eps={epsilon}]"), n, a, t, ml, sl));

        // Mean-field pair on the same fine increments: members play the role
        // of replications.
        let grid = make_grid(config.horizon, m)?;
        let mut pen = PenalizedConfig::new(a, grid, members, epsilon, config.seed);
        pen.drift = config.b;
        pen.volatility = config.sigma;
        pen.initial = config.initial;
        pen.refinement = refinement;
        let mut nlr = nlr_from(config, a, grid, members, config.seed);
        nlr.refinement = refinement;
        nlr.tol = config.mv_tol.unwrap_or(REFERENCE_TOL);
        let penalized = solve_nlr_penalized(&pen)?;
        let reflected = solve_nlr(&nlr)?;
        let member_gaps: Vec<Gap> = (0..members)
            .into_par_iter()
            .map(|j| {
                let (py, pl) = penalized.member_paths(j)?;
                let (rx, rl) = reflected.member_paths(j)?;
                Ok(Gap {
                    x: sup_gap(py.values(), rx.values()),
                    l: sup_gap(pl.values(), rl.values()),
                })
            })
            .collect::<Result<_, CliError>>()?;
        for (j, g) in member_gaps.iter().enumerate() {
            detail.push(vec![
                "mv".into(),
                num(epsilon),
                m.to_string(),
                j.to_string(),
                config.seed.to_string(),
                num(g.x),
                num(g.l),
            ]);
        }
        let lambda_gap = sup_gap(penalized.lambda().values(), reflected.lambda().values());
        let gx: Vec<f64> = member_gaps.iter().map(|g| g.x).collect();
        let gl: Vec<f64> = member_gaps.iter().map(|g| g.l).collect();
        let (mx, sx) = mean_and_stderr(&gx);
        let (ml, sl) = mean_and_stderr(&gl);
        summary.push(vec![
            "mv".into(),
            num(epsilon),
            m.to_string(),
            members.to_string(),
            num(mx),
            num(sx),
            num(ml),
            num(sl),
            num(lambda_gap),
        ]);
        report.push(row(format!("mv_gap_x[eps={epsilon}]"), members, a, t, mx, sx));
        report.push(row(format!("mv_gap_l[eps={epsilon}]"), members, a, t, ml, sl));
        report.push(row(format!("mv_lambda_gap[eps={epsilon}]"), members, a, t, lambda_gap, 0.0));
    }
    ctx.artifacts.table(
        "penalty_gaps.csv",
        "system,epsilon,steps,index,seed,gap_x,gap_l",
        &detail,
    )?;
    ctx.artifacts.table(
        "penalty_summary.csv",
        "system,epsilon,steps,count,mean_gap_x,stderr_gap_x,mean_gap_l,stderr_gap_l,lambda_gap",
        &summary,
    )?;
    ctx.note("finest_steps", json!(fine));
    ctx.note("steps", json!(steps));
    Ok(report)
}
