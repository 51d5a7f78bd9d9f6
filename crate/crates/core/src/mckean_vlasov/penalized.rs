use rayon::prelude::*;

use super::members::{chunk_ranges, reduce_chunks, MemberSource};
use super::nlr::validate_common;
use super::solution::{MvScheme, MvSolution};
use crate::error::Result;
use crate::paths::{BrownianStream, InitialLaw, Path, TimeGrid};
use crate::srbm::{check_stability, penalty_unchecked};

#[derive(Clone, Debug, PartialEq)]
pub struct PenalizedConfig {
    pub a: f64,
    pub drift: f64,
    pub volatility: f64,
    pub initial: InitialLaw,
    pub grid: TimeGrid,
    pub members: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub refinement: usize,
}

impl PenalizedConfig {
    pub fn new(a: f64, grid: TimeGrid, members: usize, epsilon: f64, seed: u64) -> Self {
        Self {
            a,
            drift: 0.0,
            volatility: 1.0,
            initial: InitialLaw::default(),
            grid,
            members,
            epsilon,
            seed,
            refinement: 1,
        }
    }

    fn source(&self) -> MemberSource {
        MemberSource {
            grid: self.grid,
            drift: self.drift,
            volatility: self.volatility,
            initial: self.initial,
            seed: self.seed,
            refinement: self.refinement,
            members: self.members,
        }
    }
}

struct Member {
    stream: BrownianStream,
    x0: f64,
    y: f64,
    lam: f64,
    driver: f64,
}

/// Euler scheme for the penalized mean-field equation
/// `Y = X0 + W + Lambda + a lambda_eps`, where `lambda_eps` is the running
/// ensemble mean of `Lambda`. All members advance one step, then the mean is
/// recomputed, then the states are updated.
pub fn solve_nlr_penalized(config: &PenalizedConfig) -> Result<MvSolution> {
    validate_common(
        config.a,
        config.drift,
        config.volatility,
        &config.initial,
        config.members,
        config.refinement,
    )?;
    let grid = config.grid;
    check_stability(grid, config.epsilon)?;
    let source = config.source();
    let dt = grid.dt();
    let eps = config.epsilon;
    let a = config.a;
    let m = config.members as f64;

    let mut chunks: Vec<Vec<Member>> = chunk_ranges(config.members)
        .into_iter()
        .map(|range| {
            range
                .map(|j| {
                    let x0 = source.x0(j);
                    Member {
                        stream: source.stream(j),
                        x0,
                        y: x0,
                        lam: 0.0,
                        driver: x0,
                    }
                })
                .collect()
        })
        .collect();
    let mut lambda = vec![0.0; grid.len()];
    for k in 0..grid.steps() {
        let partials: Vec<Vec<f64>> = chunks
            .par_iter_mut()
            .map(|chunk| {
                let mut sum = 0.0;
                for p in chunk.iter_mut() {
                    p.lam += dt * penalty_unchecked(p.y, eps);
                    p.driver = p.stream.next_value() + p.x0;
                    sum += p.lam;
                }
                vec![sum]
            })
            .collect();
        let mean = reduce_chunks(&partials, 1)[0] / m;
        lambda[k + 1] = mean;
        chunks.par_iter_mut().for_each(|chunk| {
            for p in chunk.iter_mut() {
                p.y = p.driver + p.lam + a * mean;
            }
        });
    }
    let terminal = chunks.iter().flatten().map(|p| (p.y, p.lam)).collect();
    Ok(MvSolution {
        lambda: Path::from_parts(grid, lambda),
        a,
        scheme: MvScheme::Penalized { epsilon: eps },
        source,
        drivers: None,
        terminal,
        iterations: grid.steps(),
        residual: 0.0,
        history: Vec::new(),
    })
}
