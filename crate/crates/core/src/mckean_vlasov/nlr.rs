use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::members::{chunk_ranges, reduce_chunks, MemberSource};
use super::solution::{MvScheme, MvSolution};
use crate::error::{invalid, Error, Result};
use crate::paths::{check_params, InitialLaw, Path, TimeGrid};
use crate::skorohod::reflect_into;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardStart {
    /// `lambda = 0`.
    #[default]
    Zero,
    /// `lambda(t) = t`.
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NlrConfig {
    pub a: f64,
    pub drift: f64,
    pub volatility: f64,
    pub initial: InitialLaw,
    pub grid: TimeGrid,
    pub members: usize,
    pub tol: f64,
    /// Relaxation weight in `(0, 1]`; `None` picks [`default_damping`].
    pub damping: Option<f64>,
    pub max_iter: usize,
    pub seed: u64,
    /// Noise is drawn on a grid this many times finer than `grid`.
    pub refinement: usize,
    pub start: PicardStart,
}

impl NlrConfig {
    pub fn new(a: f64, grid: TimeGrid, members: usize, seed: u64) -> Self {
        Self {
            a,
            drift: 0.0,
            volatility: 1.0,
            initial: InitialLaw::default(),
            grid,
            members,
            tol: 1e-6,
            damping: None,
            max_iter: 200,
            seed,
            refinement: 1,
            start: PicardStart::Zero,
        }
    }

    pub(crate) fn source(&self) -> MemberSource {
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

/// 0.5 for `a < 0`, 1 for `0 <= a < 1`, `1 / (1 + a)` beyond.
///
/// For `a >= 1` an undamped step can overshoot: the map lowers `lambda` by up
/// to `a` times any increase, so the plain iteration oscillates.
pub fn default_damping(a: f64) -> f64 {
    if a < 0.0 {
        0.5
    } else if a < 1.0 {
        1.0
    } else {
        1.0 / (1.0 + a)
    }
}

pub(crate) fn validate_common(
    a: f64,
    drift: f64,
    volatility: f64,
    initial: &InitialLaw,
    members: usize,
    refinement: usize,
) -> Result<()> {
    if !(a.is_finite() && a > -1.0) {
        return invalid(format!(
            "interaction coefficient must exceed -1 (the mean-field equation breaks down at a <= -1), got {a}"
        ));
    }
    check_params(drift, volatility)?;
    initial.validate()?;
    if members == 0 {
        return invalid("ensemble must have at least one member");
    }
    if refinement == 0 {
        return invalid("refinement must be at least 1");
    }
    Ok(())
}

/// Picard iteration `lambda <- lambda + theta (Phi(lambda) - lambda)` with
/// `Phi(lambda)(t) = mean_j sup_{s<=t} (X0_j + W_j(s) + a lambda(s))^-` over a
/// noise ensemble frozen for the whole run.
///
/// Stops at the first `lambda` whose residual `sup |Phi(lambda) - lambda|` is at
/// most `tol`, and returns that curve with the members it induces.
pub fn solve_nlr(config: &NlrConfig) -> Result<MvSolution> {
    validate_common(
        config.a,
        config.drift,
        config.volatility,
        &config.initial,
        config.members,
        config.refinement,
    )?;
    if !(config.tol.is_finite() && config.tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {}", config.tol));
    }
    let theta = config.damping.unwrap_or_else(|| default_damping(config.a));
    if !(theta > 0.0 && theta <= 1.0) {
        return invalid(format!("damping must lie in (0, 1], got {theta}"));
    }
    if config.max_iter == 0 {
        return invalid("at least one Picard iteration is required");
    }
    let grid = config.grid;
    let source = config.source();
    let drivers = source.cache();
    let mut lambda: Vec<f64> = match config.start {
        PicardStart::Zero => vec![0.0; grid.len()],
        PicardStart::Linear => grid.times(),
    };
    let mut history = Vec::new();
    for iteration in 1..=config.max_iter {
        let (image, terminal) = picard_map(&source, drivers.as_deref(), config.a, &lambda);
        let residual = image
            .iter()
            .zip(&lambda)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        history.push(residual);
        if residual <= config.tol {
            return Ok(MvSolution {
                lambda: Path::from_parts(grid, lambda),
                a: config.a,
                scheme: MvScheme::Reflected,
                source,
                drivers,
                terminal,
                iterations: iteration,
                residual,
                history,
            });
        }
        for (l, p) in lambda.iter_mut().zip(&image) {
            *l += theta * (p - *l);
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
    })
}

/// Mean boundary curve induced by `lambda`, and each member's `(X(T), L(T))`.
fn picard_map(
    source: &MemberSource,
    drivers: Option<&[Vec<f64>]>,
    a: f64,
    lambda: &[f64],
) -> (Vec<f64>, Vec<(f64, f64)>) {
    let len = lambda.len();
    let parts: Vec<(Vec<f64>, Vec<(f64, f64)>)> = chunk_ranges(source.members)
        .into_par_iter()
        .map(|range| {
            let mut sums = vec![0.0; len];
            let mut terminal = Vec::with_capacity(range.len());
            let mut shifted = vec![0.0; len];
            let mut x = vec![0.0; len];
            let mut l = vec![0.0; len];
            for j in range {
                match drivers {
                    Some(cache) => shifted.copy_from_slice(&cache[j]),
                    None => source.driver_into(j, &mut shifted),
                }
                for (d, lk) in shifted.iter_mut().zip(lambda) {
                    *d += a * lk;
                }
                reflect_into(&shifted, &mut x, &mut l);
                for (s, v) in sums.iter_mut().zip(&l) {
                    *s += v;
                }
                terminal.push((x[len - 1], l[len - 1]));
            }
            (sums, terminal)
        })
        .collect();
    let (partials, terminals): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    let m = source.members as f64;
    let mean = reduce_chunks(&partials, len)
        .into_iter()
        .map(|s| s / m)
        .collect();
    (mean, terminals.into_iter().flatten().collect())
}
