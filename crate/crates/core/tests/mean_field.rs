use std::f64::consts::PI;

use rbmlab_core::mckean_vlasov::{
    analytic_rbm_marginal, solve_nlr, solve_nlr_penalized, NlrConfig, PenalizedConfig,
};
use rbmlab_core::paths::{make_grid, sample_brownian};
use rbmlab_core::srbm::{homogeneous_matrix, simulate_particle_system, ParticleSystemConfig};
use rbmlab_core::stats::{
    chaos_gap, chaos_gap_pooled, mean_and_stderr, wasserstein1_1d, ChaosReference,
};

/// Expected shortfall of a grid maximum of standard Brownian motion relative to
/// the continuous one, per unit sqrt(dt).
const GRID_MAX_SHORTFALL: f64 = 0.5826;

#[test]
fn uncoupled_lambda_matches_plain_monte_carlo() {
    let grid = make_grid(1.0, 1000).unwrap();
    let m = 10_000;
    let sol = solve_nlr(&NlrConfig::new(0.0, grid, m, 21)).unwrap();
    let ends: Vec<f64> = sol.terminal().iter().map(|t| t.1).collect();
    let (_, se) = mean_and_stderr(&ends);

    let w = sample_brownian(grid, m, 0.0, 1.0, 22).unwrap();
    let direct: Vec<f64> = w
        .paths()
        .iter()
        .map(|p| p.values().iter().map(|v| -v).fold(0.0, f64::max))
        .collect();
    let (direct_mean, direct_se) = mean_and_stderr(&direct);
    let lam = sol.lambda().last();
    assert!((lam - direct_mean).abs() < 4.0 * (se * se + direct_se * direct_se).sqrt());

    let target = (2.0 / PI).sqrt() - GRID_MAX_SHORTFALL * grid.dt().sqrt();
    assert!((lam - target).abs() < 4.0 * se, "{lam} vs {target}");
}

#[test]
fn lambda_grows_as_a_turns_negative() {
    let grid = make_grid(1.0, 300).unwrap();
    let mut zero = NlrConfig::new(0.0, grid, 2000, 5);
    zero.tol = 1e-10;
    let mut negative = zero.clone();
    negative.a = -0.5;
    let l0 = solve_nlr(&zero).unwrap();
    let l1 = solve_nlr(&negative).unwrap();
    for (hi, lo) in l1.lambda().values().iter().zip(l0.lambda().values()) {
        assert!(hi + 1e-9 >= *lo);
    }
    assert!(l1.lambda().last() > l0.lambda().last() + 0.1);
}

#[test]
fn penalized_uncoupled_lambda_near_closed_form() {
    let grid = make_grid(1.0, 100_000).unwrap();
    let sol = solve_nlr_penalized(&PenalizedConfig::new(0.0, grid, 10_000, 0.01, 31)).unwrap();
    let target = analytic_rbm_marginal(1.0, 1.0, 0.0).unwrap().mean();
    let lam = sol.lambda().last();
    assert!((lam - target).abs() <= 0.02 * target, "{lam} vs {target}");
}

#[test]
fn penalized_lambda_approaches_reflected_lambda() {
    let a = 0.5;
    let members = 300;
    let fine_steps = 100_000;
    let mut gaps = Vec::new();
    for (eps, steps) in [(0.1, 1000usize), (0.03, 12_500), (0.01, 100_000)] {
        let grid = make_grid(1.0, steps).unwrap();
        let mut pen = PenalizedConfig::new(a, grid, members, eps, 77);
        pen.refinement = fine_steps / steps;
        let mut nlr = NlrConfig::new(a, grid, members, 77);
        nlr.refinement = fine_steps / steps;
        nlr.tol = 1e-9;
        let p = solve_nlr_penalized(&pen).unwrap();
        let r = solve_nlr(&nlr).unwrap();
        gaps.push(
            p.lambda()
                .values()
                .iter()
                .zip(r.lambda().values())
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max),
        );
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
}

#[test]
fn uncoupled_pairs_are_uncorrelated() {
    let grid = make_grid(1.0, 100).unwrap();
    let reps = 400;
    let runs: Vec<_> = (0..reps)
        .map(|r| {
            let mut cfg = ParticleSystemConfig::new(homogeneous_matrix(4, 0.0).unwrap(), grid, r);
            cfg.initial = rbmlab_core::InitialLaw::Uniform { upper: 1.0 };
            simulate_particle_system(&cfg).unwrap().solution
        })
        .collect();
    let refs: Vec<_> = runs.iter().collect();
    let law = analytic_rbm_marginal(1.0, 1.0, 0.0).unwrap();
    let report = chaos_gap_pooled(&refs, ChaosReference::Analytic(law), 1.0, 2).unwrap();
    assert_eq!(report.pairs, 2 * reps as usize);
    assert!(report.max_abs_corr <= 3.0 / (report.pairs as f64).sqrt(), "{report:?}");
    let single = chaos_gap(&runs[0], ChaosReference::Analytic(law), 1.0, 2).unwrap();
    assert_eq!(single.pairs, 2);
}

#[test]
fn split_half_self_comparison_is_at_noise_floor() {
    let grid = make_grid(1.0, 200).unwrap();
    let sol = solve_nlr(&NlrConfig::new(0.5, grid, 4000, 8)).unwrap();
    let xs: Vec<f64> = sol.terminal().iter().map(|t| t.0).collect();
    let (first, second) = xs.split_at(2000);
    let w1 = wasserstein1_1d(first, second).unwrap();
    // sd of X(T) is below 1, so two halves of 2000 differ by O(1/sqrt(2000))
    assert!(w1 < 3.0 / (2000f64).sqrt(), "{w1}");
}
