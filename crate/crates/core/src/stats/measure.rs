use serde::Serialize;

use crate::error::Result;
use crate::export::compensated_sum;
use crate::mckean_vlasov::MvSolution;
use crate::paths::TimeGrid;
use crate::srbm::SrbmSolution;

/// Anything that yields `(X, L)` atoms at a grid point.
pub trait MarginalSource {
    fn source_grid(&self) -> TimeGrid;
    fn atoms(&self, k: usize) -> Result<Vec<(f64, f64)>>;
}

impl MarginalSource for SrbmSolution {
    fn source_grid(&self) -> TimeGrid {
        self.grid()
    }

    fn atoms(&self, k: usize) -> Result<Vec<(f64, f64)>> {
        Ok(self.x().iter().zip(self.l()).map(|(x, l)| (x.at(k), l.at(k))).collect())
    }
}

impl MarginalSource for MvSolution {
    fn source_grid(&self) -> TimeGrid {
        self.grid()
    }

    fn atoms(&self, k: usize) -> Result<Vec<(f64, f64)>> {
        self.marginal(k)
    }
}

/// Equally weighted atoms `(x, l)` at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalMeasure {
    pub t: f64,
    pub samples: Vec<(f64, f64)>,
}

impl EmpiricalMeasure {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn l(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    pub fn mean_l(&self) -> f64 {
        compensated_sum(self.samples.iter().map(|s| s.1)) / self.samples.len() as f64
    }
}

pub fn empirical_measure<S: MarginalSource + ?Sized>(sol: &S, t: f64) -> Result<EmpiricalMeasure> {
    let k = sol.source_grid().index_of(t)?;
    Ok(EmpiricalMeasure {
        t: sol.source_grid().time(k),
        samples: sol.atoms(k)?,
    })
}

/// `(1/n) sum_i L_i(t)`.
pub fn mean_boundary<S: MarginalSource + ?Sized>(sol: &S, t: f64) -> Result<f64> {
    Ok(empirical_measure(sol, t)?.mean_l())
}
