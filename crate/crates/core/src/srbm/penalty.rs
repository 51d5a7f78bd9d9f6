use super::reflection::{Interaction, ReflectionSpec};
use super::solution::{SolverKind, SrbmSolution};
use crate::error::{invalid, Error, Result};
use crate::paths::{BrownianEnsemble, Path, TimeGrid};

/// Inward drift `1/eps` below `-eps`, `-x/eps^2` on `(-eps, 0)`, zero above.
pub fn penalty_fn(x: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return invalid(format!("penalty width must be positive, got {epsilon}"));
    }
    Ok(penalty_unchecked(x, epsilon))
}

#[inline]
pub(crate) fn penalty_unchecked(x: f64, epsilon: f64) -> f64 {
    if x <= -epsilon {
        1.0 / epsilon
    } else if x < 0.0 {
        -x / (epsilon * epsilon)
    } else {
        0.0
    }
}

/// Rejects grids with `dt > eps^2 / 10`.
pub(crate) fn check_stability(grid: TimeGrid, epsilon: f64) -> Result<()> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return invalid(format!("penalty width must be positive, got {epsilon}"));
    }
    let max_dt = epsilon * epsilon / 10.0;
    // relative slack so that T/M computed for M = 10 T / eps^2 passes
    if grid.dt() > max_dt * (1.0 + 1e-9) {
        return Err(Error::Stability {
            dt: grid.dt(),
            max_dt,
            required_steps: (grid.horizon() / max_dt * (1.0 - 1e-9)).ceil() as usize,
        });
    }
    Ok(())
}

/// Writes `sum_{l != i} A_il v_l` into `out[i]`.
pub(crate) fn interaction_at(interaction: &Interaction, v: &[f64], out: &mut [f64]) {
    match interaction {
        Interaction::Uniform(c) => {
            let total: f64 = v.iter().sum();
            for (o, vi) in out.iter_mut().zip(v) {
                *o = c * (total - vi);
            }
        }
        Interaction::Dense(a) => {
            let n = v.len();
            for (i, o) in out.iter_mut().enumerate() {
                *o = a[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, (c, vj))| c * vj)
                    .sum();
            }
        }
    }
}

/// Explicit Euler scheme for the penalized system
/// `Y_i = X0_i + W_i + Lambda_i + sum_{l != i} A_il Lambda_l`,
/// `Lambda_i(t_{k+1}) = Lambda_i(t_k) + dt * p_eps(Y_i(t_k))`.
pub fn solve_srbm_penalty(
    x0: &[f64],
    w: &BrownianEnsemble,
    spec: &ReflectionSpec,
    epsilon: f64,
) -> Result<SrbmSolution> {
    let n = spec.n();
    if x0.len() != n || w.len() != n {
        return invalid(format!(
            "expected {n} initial values and driver paths, got {} and {}",
            x0.len(),
            w.len()
        ));
    }
    if let Some(v) = x0.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return invalid(format!("initial values must be nonnegative, got {v}"));
    }
    let grid = w.grid();
    check_stability(grid, epsilon)?;
    let interaction = spec.interaction();
    let dt = grid.dt();
    let len = grid.len();

    let mut y = vec![vec![0.0; len]; n];
    let mut lam = vec![vec![0.0; len]; n];
    let mut current = vec![0.0; n];
    let mut push = vec![0.0; n];
    for i in 0..n {
        y[i][0] = x0[i];
    }
    for k in 0..grid.steps() {
        for i in 0..n {
            current[i] = lam[i][k] + dt * penalty_unchecked(y[i][k], epsilon);
        }
        interaction_at(&interaction, &current, &mut push);
        for i in 0..n {
            lam[i][k + 1] = current[i];
            y[i][k + 1] = x0[i] + w.path(i).at(k + 1) + current[i] + push[i];
        }
    }
    let min_x = y.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let max_complementarity_residual = y
        .iter()
        .zip(&lam)
        .map(|(yi, li)| crate::skorohod::complementarity_sum(yi, li).abs())
        .fold(0.0, f64::max);
    Ok(SrbmSolution {
        x: y.into_iter().map(|v| Path::from_parts(grid, v)).collect(),
        l: lam.into_iter().map(|v| Path::from_parts(grid, v)).collect(),
        solver: SolverKind::Penalty { epsilon },
        iterations: grid.steps(),
        fixed_point_residual: 0.0,
        max_complementarity_residual,
        min_x,
        gap_history: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{make_grid, sample_brownian};
    use crate::srbm::homogeneous_matrix;

    #[test]
    fn penalty_branches() {
        assert_eq!(penalty_fn(-0.2, 0.1).unwrap(), 10.0);
        assert_eq!(penalty_fn(0.5, 0.1).unwrap(), 0.0);
        assert!((penalty_fn(-0.05, 0.1).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(penalty_fn(0.0, 0.1).unwrap(), 0.0);
        assert!(penalty_fn(-1.0, 0.0).is_err());
        assert!(penalty_fn(-1.0, -0.1).is_err());
    }

    #[test]
    fn stability_guard_gives_required_grid() {
        let g = make_grid(1.0, 500).unwrap();
        let w = sample_brownian(g, 2, 0.0, 1.0, 1).unwrap();
        let spec = homogeneous_matrix(2, 0.5).unwrap();
        match solve_srbm_penalty(&[0.0, 0.0], &w, &spec, 0.1).unwrap_err() {
            Error::Stability { required_steps, .. } => assert_eq!(required_steps, 1000),
            other => panic!("{other}"),
        }
        let g = make_grid(1.0, 1000).unwrap();
        let w = sample_brownian(g, 2, 0.0, 1.0, 1).unwrap();
        assert!(solve_srbm_penalty(&[0.0, 0.0], &w, &spec, 0.1).is_ok());
    }

    #[test]
    fn inactive_penalty_leaves_driver_untouched() {
        let g = make_grid(1.0, 1000).unwrap();
        let w = sample_brownian(g, 3, 0.0, 1e-12, 4).unwrap();
        let sol =
            solve_srbm_penalty(&[1.0; 3], &w, &homogeneous_matrix(3, 0.5).unwrap(), 0.1).unwrap();
        for (y, l) in sol.x().iter().zip(sol.l()) {
            assert!(y.values().iter().all(|v| (v - 1.0).abs() < 1e-9));
            assert!(l.values().iter().all(|&v| v == 0.0));
        }
        assert!(sol.approximate());
    }

    #[test]
    fn downward_drift_balances_below_zero() {
        let eps = 0.1;
        let g = make_grid(2.0, 2000).unwrap();
        let w = sample_brownian(g, 2, -1.0, 1e-12, 4).unwrap();
        let sol = solve_srbm_penalty(&[0.0; 2], &w, &homogeneous_matrix(2, 0.0).unwrap(), eps)
            .unwrap();
        let y = &sol.x()[0];
        assert!((y.last() + eps * eps).abs() < 1e-6);
        let lam = &sol.l()[0];
        let t = g.horizon();
        assert!(lam.last() <= t && lam.last() >= t - eps);
        assert!(lam.values().windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn no_deep_excursions_under_drift() {
        let eps = 0.05;
        let g = make_grid(1.0, 4000).unwrap();
        let w = sample_brownian(g, 6, -5.0, 1e-9, 8).unwrap();
        let sol =
            solve_srbm_penalty(&[0.0; 6], &w, &homogeneous_matrix(6, 0.5).unwrap(), eps).unwrap();
        for (i, y) in sol.x().iter().enumerate() {
            let max_inc = w
                .path(i)
                .values()
                .windows(2)
                .map(|p| (p[1] - p[0]).abs())
                .fold(0.0, f64::max);
            assert!(sol.min_x() < 0.0);
            let floor = y.values().iter().copied().fold(f64::INFINITY, f64::min);
            assert!(floor >= -eps - max_inc, "{floor}");
        }
    }
}
