use serde::Serialize;

use super::wasserstein::{wasserstein1_1d, wasserstein1_to_law};
use crate::error::{invalid, Error, Result};
use crate::export::compensated_sum;
use crate::mckean_vlasov::{FoldedNormal, MvSolution};
use crate::paths::TimeGrid;
use crate::srbm::SrbmSolution;

/// Target law for the one-particle marginal.
#[derive(Clone, Copy, Debug)]
pub enum ChaosReference<'a> {
    /// The members of a mean-field ensemble on the same grid.
    Ensemble(&'a MvSolution),
    /// A closed-form law, used for both `X(t)` and `L(t)`.
    Analytic(FoldedNormal),
}

/// Pearson correlation; zero when either sample has no spread.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return invalid("correlation needs two equal-length samples of size >= 2");
    }
    let n = x.len() as f64;
    let mx = compensated_sum(x.iter().copied()) / n;
    let my = compensated_sum(y.iter().copied()) / n;
    let sxy = compensated_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = compensated_sum(x.iter().map(|a| (a - mx) * (a - mx)));
    let syy = compensated_sum(y.iter().map(|b| (b - my) * (b - my)));
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// `(X_i, L_i, X_j, L_j)` for disjoint particle pairs `(2p, 2p + 1)`, pooled
/// over runs.
#[derive(Clone, Debug, Default)]
pub struct PairSamples {
    xi: Vec<f64>,
    li: Vec<f64>,
    xj: Vec<f64>,
    lj: Vec<f64>,
}

impl PairSamples {
    pub fn push_run(&mut self, sol: &SrbmSolution, k: usize, budget: usize) {
        let pairs = (sol.n() / 2).min(budget);
        for p in 0..pairs {
            let (i, j) = (2 * p, 2 * p + 1);
            self.xi.push(sol.x()[i].at(k));
            self.li.push(sol.l()[i].at(k));
            self.xj.push(sol.x()[j].at(k));
            self.lj.push(sol.l()[j].at(k));
        }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Correlations of `(X_i, X_j)`, `(L_i, L_j)` and `(X_i, L_j)`.
    pub fn correlations(&self) -> Result<(f64, f64, f64)> {
        Ok((
            pearson(&self.xi, &self.xj)?,
            pearson(&self.li, &self.lj)?,
            pearson(&self.xi, &self.lj)?,
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChaosReport {
    pub t: f64,
    pub w1_x: f64,
    pub w1_l: f64,
    pub corr_xx: f64,
    pub corr_ll: f64,
    pub corr_xl: f64,
    pub max_abs_corr: f64,
    pub particles: usize,
    pub pairs: usize,
}

/// Marginal W1 distances to the reference and pair correlations at time `t`
/// for a single particle system, using at most `pair_budget` disjoint pairs.
pub fn chaos_gap(
    sol: &SrbmSolution,
    reference: ChaosReference<'_>,
    t: f64,
    pair_budget: usize,
) -> Result<ChaosReport> {
    chaos_gap_pooled(&[sol], reference, t, pair_budget)
}

/// As [`chaos_gap`], pooling particles and pairs over independent runs.
pub fn chaos_gap_pooled(
    runs: &[&SrbmSolution],
    reference: ChaosReference<'_>,
    t: f64,
    pair_budget: usize,
) -> Result<ChaosReport> {
    let first = runs.first().ok_or_else(|| Error::InvalidArgument("no runs".into()))?;
    let mut samples = ChaosSamples::new(first.grid(), t)?;
    for sol in runs {
        samples.push_run(sol, pair_budget)?;
    }
    samples.report(reference)
}

/// Time-`t` values of particles and disjoint pairs, accumulated run by run so
/// that large batches never hold whole paths.
#[derive(Clone, Debug)]
pub struct ChaosSamples {
    grid: TimeGrid,
    k: usize,
    xs: Vec<f64>,
    ls: Vec<f64>,
    pairs: PairSamples,
}

impl ChaosSamples {
    pub fn new(grid: TimeGrid, t: f64) -> Result<Self> {
        let k = grid.index_of(t)?;
        Ok(Self {
            grid,
            k,
            xs: Vec::new(),
            ls: Vec::new(),
            pairs: PairSamples::default(),
        })
    }

    pub fn push_run(&mut self, sol: &SrbmSolution, pair_budget: usize) -> Result<()> {
        if sol.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        self.xs.extend(sol.x().iter().map(|p| p.at(self.k)));
        self.ls.extend(sol.l().iter().map(|p| p.at(self.k)));
        self.pairs.push_run(sol, self.k, pair_budget);
        Ok(())
    }

    /// Appends the samples of `other`, which must share grid and time.
    pub fn append(&mut self, other: ChaosSamples) -> Result<()> {
        if other.grid != self.grid || other.k != self.k {
            return Err(Error::GridMismatch);
        }
        self.xs.extend(other.xs);
        self.ls.extend(other.ls);
        self.pairs.xi.extend(other.pairs.xi);
        self.pairs.li.extend(other.pairs.li);
        self.pairs.xj.extend(other.pairs.xj);
        self.pairs.lj.extend(other.pairs.lj);
        Ok(())
    }

    pub fn particles(&self) -> usize {
        self.xs.len()
    }

    pub fn report(&self, reference: ChaosReference<'_>) -> Result<ChaosReport> {
        if self.xs.is_empty() {
            return invalid("no particles recorded");
        }
        let (w1_x, w1_l) = match reference {
            ChaosReference::Ensemble(mv) => {
                if mv.grid() != self.grid {
                    return Err(Error::GridMismatch);
                }
                let atoms = mv.marginal(self.k)?;
                let mx: Vec<f64> = atoms.iter().map(|a| a.0).collect();
                let ml: Vec<f64> = atoms.iter().map(|a| a.1).collect();
                (wasserstein1_1d(&self.xs, &mx)?, wasserstein1_1d(&self.ls, &ml)?)
            }
            ChaosReference::Analytic(law) => (
                wasserstein1_to_law(&self.xs, &law)?,
                wasserstein1_to_law(&self.ls, &law)?,
            ),
        };
        let (corr_xx, corr_ll, corr_xl) = if self.pairs.len() >= 2 {
            self.pairs.correlations()?
        } else {
            (f64::NAN, f64::NAN, f64::NAN)
        };
        Ok(ChaosReport {
            t: self.grid.time(self.k),
            w1_x,
            w1_l,
            corr_xx,
            corr_ll,
            corr_xl,
            max_abs_corr: corr_xx.abs().max(corr_ll.abs()).max(corr_xl.abs()),
            particles: self.xs.len(),
            pairs: self.pairs.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[1.0, 1.0], &[0.0, 5.0]).unwrap(), 0.0);
        assert!(pearson(&[1.0], &[1.0]).is_err());
    }
}
