use rayon::prelude::*;
use serde_json::json;

use rbmlab_core::mckean_vlasov::{analytic_rbm_marginal, solve_nlr};
use rbmlab_core::rng::replicate_seed;
use rbmlab_core::srbm::{simulate_particle_system, ParticleSystemConfig, SolverChoice, DEFAULT_TOL};
use rbmlab_core::stats::{ChaosReference, ChaosSamples, ReportRow};

use super::mv::{has_closed_form, nlr_from, terminal_lambda};
use super::{grid, reflection, row, Context};
use crate::config::Config;
use crate::output::num;
use crate::CliError;

const DEFAULT_REPLICATIONS: usize = 200;
const DEFAULT_STEPS: usize = 500;
const DEFAULT_MEMBERS: usize = 100_000;
/// Replication index reserved for the mean-field ensemble seed.
const MV_STREAM: usize = 1 << 32;

pub fn run(config: &Config, ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let ns = config.n_values()?;
    let reps = config.replications_or(DEFAULT_REPLICATIONS);
    let members = config.ensemble_or(DEFAULT_MEMBERS);
    let grid = grid(config, DEFAULT_STEPS)?;
    let t = grid.horizon();
    let mv_seed = replicate_seed(config.seed, MV_STREAM);

    let mut table = Vec::new();
    let mut report = Vec::new();
    for a in config.a_values()? {
        let ensemble;
        let (reference, label) = if has_closed_form(config, a) {
            let law = analytic_rbm_marginal(t, config.sigma, 0.0)?;
            (ChaosReference::Analytic(law), "folded_normal")
        } else {
            ctx.progress(format!("mean-field reference for a = {a}"));
            ensemble = solve_nlr(&nlr_from(config, a, grid, members, mv_seed))?;
            let (lambda, se) = terminal_lambda(&ensemble);
            report.push(row("mv_lambda", members, a, t, lambda, se));
            (ChaosReference::Ensemble(&ensemble), "mean_field")
        };
        for &n in &ns {
            ctx.progress(format!("a = {a}, n = {n}: {reps} replications"));
            let spec = reflection(config, n, Some(a))?;
            let per_rep: Vec<ChaosSamples> = (0..reps)
                .into_par_iter()
                .map(|r| {
                    let mut sys = ParticleSystemConfig::new(spec.clone(), grid, replicate_seed(config.seed, r));
                    sys.initial = config.initial;
                    sys.drift = config.b;
                    sys.volatility = config.sigma;
                    sys.tol = config.tol.unwrap_or(DEFAULT_TOL);
                    sys.solver = config.solver.unwrap_or(SolverChoice::Contraction);
                    let run = simulate_particle_system(&sys)?;
                    let mut samples = ChaosSamples::new(grid, t)?;
                    samples.push_run(&run.solution, n / 2)?;
                    Ok(samples)
                })
                .collect::<Result<_, CliError>>()?;
            let mut pooled = ChaosSamples::new(grid, t)?;
            for s in per_rep {
                pooled.append(s)?;
            }
            let rep = pooled.report(reference)?;
            table.push(vec![
                num(a),
                n.to_string(),
                reps.to_string(),
                rep.particles.to_string(),
                rep.pairs.to_string(),
                num(rep.w1_x),
                num(rep.w1_l),
                num(rep.corr_xx),
                num(rep.corr_ll),
                num(rep.corr_xl),
                num(rep.max_abs_corr),
                label.to_string(),
            ]);
            report.push(row("w1_x", n, a, t, rep.w1_x, f64::NAN));
            report.push(row("w1_l", n, a, t, rep.w1_l, f64::NAN));
            report.push(row("max_abs_corr", n, a, t, rep.max_abs_corr, f64::NAN));
        }
    }
    ctx.artifacts.table(
        "chaos_sweep.csv",
        "a,n,replications,particles,pairs,w1_x,w1_l,corr_xx,corr_ll,corr_xl,max_abs_corr,reference",
        &table,
    )?;
    ctx.note("mv_seed", json!(mv_seed));
    Ok(report)
}
