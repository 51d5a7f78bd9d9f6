use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::Result;
use crate::export::fmt_f64;
use crate::paths::{Path, TimeGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverKind {
    Contraction,
    Penalty { epsilon: f64 },
}

/// Constrained paths `X`, boundary paths `L` and solver diagnostics.
///
/// For the penalty solver `X` holds the penalized state and `L` the
/// accumulated penalty.
#[derive(Clone, Debug, PartialEq)]
pub struct SrbmSolution {
    pub(crate) x: Vec<Path>,
    pub(crate) l: Vec<Path>,
    pub(crate) solver: SolverKind,
    pub(crate) iterations: usize,
    pub(crate) fixed_point_residual: f64,
    pub(crate) max_complementarity_residual: f64,
    pub(crate) min_x: f64,
    pub(crate) gap_history: Vec<f64>,
}

impl SrbmSolution {
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn grid(&self) -> TimeGrid {
        self.x[0].grid()
    }

    pub fn x(&self) -> &[Path] {
        &self.x
    }

    pub fn l(&self) -> &[Path] {
        &self.l
    }

    pub fn solver(&self) -> SolverKind {
        self.solver
    }

    /// True when the paths only approximate the reflected system.
    pub fn approximate(&self) -> bool {
        matches!(self.solver, SolverKind::Penalty { .. })
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn fixed_point_residual(&self) -> f64 {
        self.fixed_point_residual
    }

    pub fn max_complementarity_residual(&self) -> f64 {
        self.max_complementarity_residual
    }

    pub fn min_x(&self) -> f64 {
        self.min_x
    }

    /// Sup-norm change of `L` at each contraction sweep.
    pub fn gap_history(&self) -> &[f64] {
        &self.gap_history
    }

    /// `X_i(t_k)` for every particle.
    pub fn x_at(&self, k: usize) -> Vec<f64> {
        self.x.iter().map(|p| p.at(k)).collect()
    }

    pub fn l_at(&self, k: usize) -> Vec<f64> {
        self.l.iter().map(|p| p.at(k)).collect()
    }

    /// Rows `t,i,X,L`, particle-major.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "t,i,X,L")?;
        let grid = self.grid();
        for (i, (x, l)) in self.x.iter().zip(&self.l).enumerate() {
            for k in 0..grid.len() {
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(grid.time(k)),
                    i,
                    fmt_f64(x.at(k)),
                    fmt_f64(l.at(k))
                )?;
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> serde_json::Value {
        json!({
            "solver": self.solver,
            "approximate": self.approximate(),
            "n": self.n(),
            "horizon": self.grid().horizon(),
            "steps": self.grid().steps(),
            "iterations": self.iterations,
            "fixed_point_residual": self.fixed_point_residual,
            "max_complementarity_residual": self.max_complementarity_residual,
            "min_x": self.min_x,
        })
    }
}
