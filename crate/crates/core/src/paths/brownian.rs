use rayon::prelude::*;

use super::grid::{Path, TimeGrid};
use crate::error::{invalid, Result};
use crate::rng::{Domain, GaussianStream};

/// Sequential generator of one `(b, sigma)`-Brownian path on a grid.
///
/// The Gaussian increments live on a grid `refinement` times finer than the
/// output grid, so paths generated with `(M, r)` and `(M r, 1)` sample the same
/// underlying trajectory.
#[derive(Clone, Debug)]
pub struct BrownianStream {
    gauss: GaussianStream,
    grid: TimeGrid,
    drift: f64,
    volatility: f64,
    sqrt_fine_dt: f64,
    refinement: usize,
    step: usize,
    noise_sum: f64,
}

impl BrownianStream {
    pub fn new(
        grid: TimeGrid,
        drift: f64,
        volatility: f64,
        seed: u64,
        index: u64,
        refinement: usize,
    ) -> Self {
        let refinement = refinement.max(1);
        let fine_dt = grid.dt() / refinement as f64;
        Self {
            gauss: GaussianStream::new(seed, Domain::Noise, index),
            grid,
            drift,
            volatility,
            sqrt_fine_dt: fine_dt.sqrt(),
            refinement,
            step: 0,
            noise_sum: 0.0,
        }
    }

    /// Value at the next grid point (`W(t_1)` on the first call).
    #[inline]
    pub fn next_value(&mut self) -> f64 {
        for _ in 0..self.refinement {
            self.noise_sum += self.gauss.next_standard() * self.sqrt_fine_dt;
        }
        self.step += 1;
        self.drift * self.grid.time(self.step) + self.volatility * self.noise_sum
    }

    /// Fills `out` with `W(t_0), ..., W(t_M)` where `out.len() == M + 1`.
    pub fn fill(&mut self, out: &mut [f64]) {
        debug_assert_eq!(self.step, 0);
        out[0] = 0.0;
        for slot in out.iter_mut().skip(1) {
            *slot = self.next_value();
        }
    }
}

/// `n` independent `(b, sigma)`-Brownian paths started at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianEnsemble {
    grid: TimeGrid,
    drift: f64,
    volatility: f64,
    seed: u64,
    refinement: usize,
    paths: Vec<Path>,
}

pub fn sample_brownian(
    grid: TimeGrid,
    n: usize,
    drift: f64,
    volatility: f64,
    seed: u64,
) -> Result<BrownianEnsemble> {
    sample_brownian_refined(grid, n, drift, volatility, seed, 1)
}

/// As [`sample_brownian`], with increments drawn on a grid `refinement` times finer.
pub fn sample_brownian_refined(
    grid: TimeGrid,
    n: usize,
    drift: f64,
    volatility: f64,
    seed: u64,
    refinement: usize,
) -> Result<BrownianEnsemble> {
    check_params(drift, volatility)?;
    if refinement == 0 {
        return invalid("refinement must be at least 1");
    }
    let paths = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut values = vec![0.0; grid.len()];
            BrownianStream::new(grid, drift, volatility, seed, i as u64, refinement)
                .fill(&mut values);
            Path::from_parts(grid, values)
        })
        .collect();
    Ok(BrownianEnsemble {
        grid,
        drift,
        volatility,
        seed,
        refinement,
        paths,
    })
}

pub(crate) fn check_params(drift: f64, volatility: f64) -> Result<()> {
    if !drift.is_finite() {
        return invalid(format!("drift must be finite, got {drift}"));
    }
    if !(volatility.is_finite() && volatility > 0.0) {
        return invalid(format!("volatility must be positive, got {volatility}"));
    }
    Ok(())
}

impl BrownianEnsemble {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn volatility(&self) -> f64 {
        self.volatility
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn refinement(&self) -> usize {
        self.refinement
    }

    pub fn paths(&self) -> &[Path] {
        &self.paths
    }

    pub fn path(&self, i: usize) -> &Path {
        &self.paths[i]
    }

    /// The same trajectories observed on every `factor`-th grid point.
    pub fn subsample(&self, factor: usize) -> Result<Self> {
        let paths = self
            .paths
            .iter()
            .map(|p| p.subsample(factor))
            .collect::<Result<Vec<_>>>()?;
        let grid = paths
            .first()
            .map(Path::grid)
            .unwrap_or(TimeGrid::new(self.grid.horizon(), self.grid.steps() / factor)?);
        Ok(Self {
            grid,
            refinement: self.refinement * factor,
            paths,
            ..*self
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::make_grid;

    #[test]
    fn drift_dominates_with_tiny_volatility() {
        let g = make_grid(1.0, 50).unwrap();
        let w = sample_brownian(g, 3, 1.0, 1e-12, 5).unwrap();
        for p in w.paths() {
            assert_eq!(p.at(0), 0.0);
            for k in 0..g.len() {
                assert!((p.at(k) - g.time(k)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_volatility() {
        let g = make_grid(1.0, 5).unwrap();
        assert!(sample_brownian(g, 2, 0.0, 0.0, 1).is_err());
        assert!(sample_brownian(g, 2, 0.0, -1.0, 1).is_err());
    }

    #[test]
    fn reproducible_and_extendable_in_n() {
        let g = make_grid(1.0, 20).unwrap();
        let small = sample_brownian(g, 3, 0.2, 1.5, 11).unwrap();
        let again = sample_brownian(g, 3, 0.2, 1.5, 11).unwrap();
        let large = sample_brownian(g, 10, 0.2, 1.5, 11).unwrap();
        assert_eq!(small, again);
        assert_eq!(small.paths(), &large.paths()[..3]);
    }

    #[test]
    fn refined_noise_matches_subsampled_fine_path() {
        let coarse = make_grid(1.0, 10).unwrap();
        let fine = coarse.refine(4).unwrap();
        let a = sample_brownian_refined(coarse, 2, 0.0, 1.0, 3, 4).unwrap();
        let b = sample_brownian(fine, 2, 0.0, 1.0, 3).unwrap().subsample(4).unwrap();
        for (p, q) in a.paths().iter().zip(b.paths()) {
            for k in 0..coarse.len() {
                assert!((p.at(k) - q.at(k)).abs() < 1e-13);
            }
        }
    }
}
