use serde::{Deserialize, Serialize};

use super::contraction::{solve_srbm_contraction, DEFAULT_TOL};
use super::penalty::solve_srbm_penalty;
use super::reflection::{spectral_radius_abs, ReflectionSpec};
use super::solution::SrbmSolution;
use crate::error::{invalid, Result};
use crate::paths::{sample_brownian, BrownianEnsemble, InitialLaw, Path, TimeGrid};

/// Radius below which `Auto` uses the contraction solver.
const AUTO_RADIUS: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverChoice {
    /// Contraction when the spectral radius of `|A|` is below 0.999, otherwise
    /// the penalty scheme with the given width.
    Auto { epsilon: Option<f64> },
    Contraction,
    Penalty { epsilon: f64 },
}

impl Default for SolverChoice {
    fn default() -> Self {
        SolverChoice::Auto { epsilon: None }
    }
}

#[derive(Clone, Debug)]
pub struct ParticleSystemConfig {
    pub reflection: ReflectionSpec,
    pub initial: InitialLaw,
    pub grid: TimeGrid,
    pub drift: f64,
    pub volatility: f64,
    pub solver: SolverChoice,
    pub tol: f64,
    pub seed: u64,
}

impl ParticleSystemConfig {
    pub fn new(reflection: ReflectionSpec, grid: TimeGrid, seed: u64) -> Self {
        Self {
            reflection,
            initial: InitialLaw::default(),
            grid,
            drift: 0.0,
            volatility: 1.0,
            solver: SolverChoice::default(),
            tol: DEFAULT_TOL,
            seed,
        }
    }
}

/// A solved particle system together with the noise and initial values that drove it.
#[derive(Clone, Debug)]
pub struct ParticleRun {
    pub solution: SrbmSolution,
    pub brownian: BrownianEnsemble,
    pub x0: Vec<f64>,
}

/// Draws `X0` and `W` from `seed` and solves the system driven by `X0 + W`.
pub fn simulate_particle_system(config: &ParticleSystemConfig) -> Result<ParticleRun> {
    config.initial.validate()?;
    let n = config.reflection.n();
    let brownian = sample_brownian(config.grid, n, config.drift, config.volatility, config.seed)?;
    let x0 = config.initial.sample_n(config.seed, n);
    let solution = solve_with(&config.reflection, &x0, &brownian, config.solver, config.tol)?;
    Ok(ParticleRun {
        solution,
        brownian,
        x0,
    })
}

/// Solves the system driven by `x0 + w` with the requested solver.
pub(crate) fn solve_with(
    spec: &ReflectionSpec,
    x0: &[f64],
    w: &BrownianEnsemble,
    choice: SolverChoice,
    tol: f64,
) -> Result<SrbmSolution> {
    let use_penalty = match choice {
        SolverChoice::Contraction => None,
        SolverChoice::Penalty { epsilon } => Some(epsilon),
        SolverChoice::Auto { epsilon } => {
            if spectral_radius_abs(spec) < AUTO_RADIUS {
                None
            } else {
                match epsilon {
                    Some(e) => Some(e),
                    None => {
                        return invalid(
                            "spectral radius too large for the contraction solver; \
                             a penalty width epsilon is required",
                        )
                    }
                }
            }
        }
    };
    match use_penalty {
        Some(epsilon) => solve_srbm_penalty(x0, w, spec, epsilon),
        None => {
            let z = drivers(x0, w)?;
            solve_srbm_contraction(&z, spec, tol, None)
        }
    }
}

/// `X0_i + W_i` for every particle.
pub(crate) fn drivers(x0: &[f64], w: &BrownianEnsemble) -> Result<Vec<Path>> {
    if x0.len() != w.len() {
        return invalid("initial values and driver paths differ in count");
    }
    Ok(x0
        .iter()
        .zip(w.paths())
        .map(|(c, p)| Path::from_parts(w.grid(), p.values().iter().map(|v| c + v).collect()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::make_grid;
    use crate::skorohod::reflect_1d;
    use crate::srbm::{homogeneous_matrix, SolverKind};

    #[test]
    fn single_particle_is_one_dimensional_reflection() {
        let grid = make_grid(1.0, 300).unwrap();
        let mut cfg = ParticleSystemConfig::new(ReflectionSpec::identity(1).unwrap(), grid, 17);
        cfg.initial = InitialLaw::Uniform { upper: 0.5 };
        let run = simulate_particle_system(&cfg).unwrap();
        let z = drivers(&run.x0, &run.brownian).unwrap();
        let (x, l) = reflect_1d(&z[0]).unwrap();
        assert_eq!(run.solution.x()[0], x);
        assert_eq!(run.solution.l()[0], l);
    }

    #[test]
    fn decoupled_components() {
        let grid = make_grid(1.0, 200).unwrap();
        let mut cfg = ParticleSystemConfig::new(homogeneous_matrix(16, 0.0).unwrap(), grid, 5);
        cfg.initial = InitialLaw::Exponential { rate: 2.0 };
        let run = simulate_particle_system(&cfg).unwrap();
        for (i, z) in drivers(&run.x0, &run.brownian).unwrap().iter().enumerate() {
            let (x, l) = reflect_1d(z).unwrap();
            assert_eq!(run.solution.x()[i], x);
            assert_eq!(run.solution.l()[i], l);
        }
    }

    #[test]
    fn rerun_is_bit_identical() {
        let grid = make_grid(1.0, 200).unwrap();
        let cfg = ParticleSystemConfig::new(homogeneous_matrix(8, 0.5).unwrap(), grid, 99);
        let a = simulate_particle_system(&cfg).unwrap().solution;
        let b = simulate_particle_system(&cfg).unwrap().solution;
        assert_eq!(a, b);
    }

    #[test]
    fn auto_falls_back_to_penalty() {
        let grid = make_grid(1.0, 1000).unwrap();
        let mut cfg = ParticleSystemConfig::new(homogeneous_matrix(4, 2.0).unwrap(), grid, 3);
        assert!(simulate_particle_system(&cfg).is_err());
        cfg.solver = SolverChoice::Auto { epsilon: Some(0.1) };
        let sol = simulate_particle_system(&cfg).unwrap().solution;
        assert_eq!(sol.solver(), SolverKind::Penalty { epsilon: 0.1 });
        assert!(sol.approximate());
    }
}
