use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::paths::{mean_all, modulus_of, BrownianEnsemble};
use crate::srbm::SrbmSolution;

/// Largest excess of one inequality over the particles (and times, for the
/// pointwise bounds).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub bound: String,
    pub delta: Option<f64>,
    pub max_violation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub a: f64,
    pub checks: Vec<BoundCheck>,
    pub max_violation: f64,
}

/// Audits the pathwise bounds on the boundary terms of a homogeneous system
/// solved by contraction from nonnegative initial values, with `W` its
/// Brownian drivers and `c_a = 1 / (1 - |a|)`.
///
/// For `a >= 0`:
/// * `sup_bound`: `L_i(t) <= max_{s<=t} W_i(s)^-` at every grid time;
/// * `modulus_bound`: `w_T(L_i, d) <= w_T(W_i, d)`.
///
/// For `-1 < a <= 0`:
/// * `mean_bound`: `<L(t)> <= c_a <|W|_t>` at every grid time;
/// * `individual_bound`: `L_i(t) <= |W_i|_t + 2 |a| c_a <|W|_t>`;
/// * `individual_modulus_bound`: `w_T(L_i, d) <= w_T(W_i, d) + 2 |a| c_a <w_T(W, d)>`.
///
/// Moduli use `d` in `{dt, 10 dt}` (the latter only when it fits in `[0, T]`).
/// A violation is the positive part of left side minus right side.
pub fn pathwise_bound_check(sol: &SrbmSolution, w: &BrownianEnsemble, a: f64) -> Result<BoundReport> {
    if sol.approximate() {
        return invalid("bounds hold for reflected solutions, not penalty approximations");
    }
    if !(a > -1.0 && a.is_finite()) {
        return invalid(format!("bounds need a > -1, got {a}"));
    }
    let grid = sol.grid();
    if w.grid() != grid || w.len() != sol.n() {
        return Err(Error::GridMismatch);
    }
    let n = sol.n();
    let len = grid.len();
    let widths: Vec<usize> = [1, 10].into_iter().filter(|&m| m <= grid.steps()).collect();
    let mut checks = Vec::new();

    let l: Vec<&[f64]> = sol.l().iter().map(|p| p.values()).collect();
    let wv: Vec<&[f64]> = w.paths().iter().map(|p| p.values()).collect();
    let modulus_l: Vec<Vec<f64>> = l
        .iter()
        .map(|li| widths.iter().map(|&m| modulus_of(li, m)).collect())
        .collect();
    let modulus_w: Vec<Vec<f64>> = wv
        .iter()
        .map(|wi| widths.iter().map(|&m| modulus_of(wi, m)).collect())
        .collect();

    if a >= 0.0 {
        let mut worst = 0.0f64;
        for (li, wi) in l.iter().zip(&wv) {
            let mut running = 0.0f64;
            for k in 0..len {
                running = running.max(-wi[k]);
                worst = worst.max(li[k] - running);
            }
        }
        checks.push(BoundCheck {
            bound: "sup_bound".into(),
            delta: None,
            max_violation: worst,
        });
        for (d, &m) in widths.iter().enumerate() {
            let worst = (0..n)
                .map(|i| modulus_l[i][d] - modulus_w[i][d])
                .fold(0.0, f64::max);
            checks.push(BoundCheck {
                bound: "modulus_bound".into(),
                delta: Some(m as f64 * grid.dt()),
                max_violation: worst,
            });
        }
    }
    if a <= 0.0 {
        let c_a = 1.0 / (1.0 - a.abs());
        // running sup norms |W_i|_t
        let mut norms = vec![0.0f64; n];
        let (mut worst_mean, mut worst_ind) = (0.0f64, 0.0f64);
        for k in 0..len {
            for i in 0..n {
                norms[i] = norms[i].max(wv[i][k].abs());
            }
            let mean_norm = mean_all(&norms);
            let mean_l = mean_all(&l.iter().map(|li| li[k]).collect::<Vec<_>>());
            worst_mean = worst_mean.max(mean_l - c_a * mean_norm);
            for i in 0..n {
                worst_ind = worst_ind.max(l[i][k] - norms[i] - 2.0 * a.abs() * c_a * mean_norm);
            }
        }
        checks.push(BoundCheck {
            bound: "mean_bound".into(),
            delta: None,
            max_violation: worst_mean,
        });
        checks.push(BoundCheck {
            bound: "individual_bound".into(),
            delta: None,
            max_violation: worst_ind,
        });
        for (d, &m) in widths.iter().enumerate() {
            let mean_w = mean_all(&modulus_w.iter().map(|v| v[d]).collect::<Vec<_>>());
            let worst = (0..n)
                .map(|i| modulus_l[i][d] - modulus_w[i][d] - 2.0 * a.abs() * c_a * mean_w)
                .fold(0.0, f64::max);
            checks.push(BoundCheck {
                bound: "individual_modulus_bound".into(),
                delta: Some(m as f64 * grid.dt()),
                max_violation: worst,
            });
        }
    }
    let max_violation = checks.iter().map(|c| c.max_violation).fold(0.0, f64::max);
    Ok(BoundReport {
        a,
        checks,
        max_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::make_grid;
    use crate::srbm::{homogeneous_matrix, simulate_particle_system, ParticleSystemConfig};

    #[test]
    fn uncoupled_sup_bound_is_tight() {
        let grid = make_grid(1.0, 500).unwrap();
        let run = simulate_particle_system(&ParticleSystemConfig::new(
            homogeneous_matrix(4, 0.0).unwrap(),
            grid,
            6,
        ))
        .unwrap();
        let report = pathwise_bound_check(&run.solution, &run.brownian, 0.0).unwrap();
        assert_eq!(report.max_violation, 0.0);
        for (li, wi) in run.solution.l().iter().zip(run.brownian.paths()) {
            let sup_neg = wi.values().iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
            assert!(sup_neg > 0.0);
            assert_eq!(li.last(), sup_neg);
        }
        assert_eq!(report.checks.len(), 2 + 2 + 2 + 1);
    }

    #[test]
    fn coupled_systems_respect_bounds() {
        let grid = make_grid(1.0, 300).unwrap();
        for (a, seed) in [(0.5, 1), (0.9, 2), (-0.5, 3), (-0.9, 4)] {
            let run = simulate_particle_system(&ParticleSystemConfig::new(
                homogeneous_matrix(10, a).unwrap(),
                grid,
                seed,
            ))
            .unwrap();
            let report = pathwise_bound_check(&run.solution, &run.brownian, a).unwrap();
            assert!(report.max_violation <= 1e-9, "{a}: {report:?}");
        }
    }
}
