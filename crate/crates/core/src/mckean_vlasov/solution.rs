use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::members::MemberSource;
use crate::error::{invalid, Result};
use crate::paths::{InitialLaw, Path, TimeGrid};
use crate::skorohod::reflect_into;
use crate::srbm::penalty_unchecked;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MvScheme {
    /// Reflected members solved to a Picard fixed point.
    Reflected,
    /// Penalized members stepped synchronously with the running ensemble mean.
    Penalized { epsilon: f64 },
}

/// The boundary curve `lambda`, with the ensemble that realises it.
///
/// Member paths are regenerated from their seeds on request, or read from a
/// cache when the ensemble is small; `X(T)` and `L(T)` are always stored.
#[derive(Clone, Debug)]
pub struct MvSolution {
    pub(crate) lambda: Path,
    pub(crate) a: f64,
    pub(crate) scheme: MvScheme,
    pub(crate) source: MemberSource,
    pub(crate) drivers: Option<Vec<Vec<f64>>>,
    pub(crate) terminal: Vec<(f64, f64)>,
    pub(crate) iterations: usize,
    pub(crate) residual: f64,
    pub(crate) history: Vec<f64>,
}

impl MvSolution {
    pub fn lambda(&self) -> &Path {
        &self.lambda
    }

    pub fn grid(&self) -> TimeGrid {
        self.lambda.grid()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn drift(&self) -> f64 {
        self.source.drift
    }

    pub fn volatility(&self) -> f64 {
        self.source.volatility
    }

    pub fn initial(&self) -> InitialLaw {
        self.source.initial
    }

    pub fn members(&self) -> usize {
        self.source.members
    }

    pub fn seed(&self) -> u64 {
        self.source.seed
    }

    pub fn scheme(&self) -> MvScheme {
        self.scheme
    }

    pub fn picard_iterations(&self) -> usize {
        self.iterations
    }

    /// `sup_t |Phi(lambda) - lambda|` at the returned curve.
    pub fn picard_residual(&self) -> f64 {
        self.residual
    }

    /// Residual after each Picard evaluation.
    pub fn residual_history(&self) -> &[f64] {
        &self.history
    }

    /// `(X(T), L(T))` of every member.
    pub fn terminal(&self) -> &[(f64, f64)] {
        &self.terminal
    }

    /// `(X, L)` of member `j`.
    pub fn member_paths(&self, j: usize) -> Result<(Path, Path)> {
        if j >= self.members() {
            return invalid(format!("member {j} out of range ({} members)", self.members()));
        }
        let (x, l) = self.member_values(j);
        let grid = self.grid();
        Ok((Path::from_parts(grid, x), Path::from_parts(grid, l)))
    }

    /// `(X_j(t_k), L_j(t_k))` over all members.
    pub fn marginal(&self, k: usize) -> Result<Vec<(f64, f64)>> {
        if k >= self.grid().len() {
            return invalid(format!("grid index {k} out of range"));
        }
        if k == self.grid().steps() {
            return Ok(self.terminal.clone());
        }
        Ok((0..self.members())
            .into_par_iter()
            .map(|j| {
                let (x, l) = self.member_values(j);
                (x[k], l[k])
            })
            .collect())
    }

    pub(crate) fn member_values(&self, j: usize) -> (Vec<f64>, Vec<f64>) {
        let len = self.grid().len();
        let mut driver = vec![0.0; len];
        match &self.drivers {
            Some(cache) => driver.copy_from_slice(&cache[j]),
            None => self.source.driver_into(j, &mut driver),
        }
        let lam = self.lambda.values();
        let mut x = vec![0.0; len];
        let mut l = vec![0.0; len];
        match self.scheme {
            MvScheme::Reflected => {
                for (d, lk) in driver.iter_mut().zip(lam) {
                    *d += self.a * lk;
                }
                reflect_into(&driver, &mut x, &mut l);
            }
            MvScheme::Penalized { epsilon } => {
                let dt = self.grid().dt();
                x[0] = driver[0];
                for k in 0..len - 1 {
                    let rate = penalty_unchecked(x[k], epsilon);
                    l[k + 1] = l[k] + dt * rate;
                    x[k + 1] = driver[k + 1] + l[k + 1] + self.a * lam[k + 1];
                }
            }
        }
        (x, l)
    }

    /// Rows `t,lambda`.
    pub fn write_lambda_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        self.lambda.write_csv(out, "lambda")
    }

    pub fn summary(&self) -> serde_json::Value {
        json!({
            "scheme": self.scheme,
            "a": self.a,
            "b": self.source.drift,
            "sigma": self.source.volatility,
            "initial": self.source.initial,
            "members": self.source.members,
            "seed": self.source.seed,
            "horizon": self.grid().horizon(),
            "steps": self.grid().steps(),
            "picard_iterations": self.iterations,
            "picard_residual": self.residual,
            "lambda_at_horizon": self.lambda.last(),
        })
    }
}
