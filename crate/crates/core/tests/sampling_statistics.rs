use rbmlab_core::mckean_vlasov::analytic_rbm_marginal;
use rbmlab_core::paths::{make_grid, sample_brownian};
use rbmlab_core::srbm::{homogeneous_matrix, simulate_particle_system, ParticleSystemConfig};
use rbmlab_core::stats::{mean_and_stderr, wasserstein1_to_law};

#[test]
fn brownian_terminal_moments() {
    let grid = make_grid(1.0, 8).unwrap();
    let count = 100_000;
    let w = sample_brownian(grid, count, 0.0, 1.0, 42).unwrap();
    let ends: Vec<f64> = w.paths().iter().map(|p| p.last()).collect();
    let (mean, _) = mean_and_stderr(&ends);
    assert!(mean.abs() < 3.0 / (count as f64).sqrt());

    let w = sample_brownian(grid, count, 0.0, 2.0, 43).unwrap();
    let ends: Vec<f64> = w.paths().iter().map(|p| p.last()).collect();
    let (mean, _) = mean_and_stderr(&ends);
    let var = ends.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64;
    assert!((var - 4.0).abs() < 0.05 * 4.0, "{var}");
}

#[test]
fn folded_normal_sampler_matches_its_law() {
    let law = analytic_rbm_marginal(2.0, 1.5, 0.0).unwrap();
    let s = law.sample(9, 20_000);
    assert!(wasserstein1_to_law(&s, &law).unwrap() < 0.03);
    let (mean, se) = mean_and_stderr(&s);
    assert!((mean - law.mean()).abs() < 4.0 * se);
}

/// Second moment of `L_1(T)` shows no growth in `n` beyond sampling error.
#[test]
fn second_moment_has_no_upward_trend() {
    let grid = make_grid(1.0, 100).unwrap();
    let reps = 200;
    for a in [-0.5, 0.5] {
        let moments: Vec<(f64, f64)> = [8usize, 64, 512]
            .iter()
            .map(|&n| {
                let squares: Vec<f64> = (0..reps)
                    .map(|r| {
                        let cfg = ParticleSystemConfig::new(
                            homogeneous_matrix(n, a).unwrap(),
                            grid,
                            1000 * n as u64 + r,
                        );
                        let l = simulate_particle_system(&cfg).unwrap().solution.l()[0].last();
                        l * l
                    })
                    .collect();
                mean_and_stderr(&squares)
            })
            .collect();
        for (i, lo) in moments.iter().enumerate() {
            for hi in &moments[i + 1..] {
                let band = 3.0 * (lo.1 * lo.1 + hi.1 * hi.1).sqrt();
                assert!(hi.0 - lo.0 <= band, "a = {a}: {moments:?}");
            }
        }
    }
}
