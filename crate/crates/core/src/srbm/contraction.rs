use rayon::prelude::*;

use super::reflection::{spectral_radius_abs, Interaction, ReflectionSpec};
use super::solution::{SolverKind, SrbmSolution};
use crate::error::{invalid, Error, Result};
use crate::paths::Path;
use crate::skorohod::{complementarity_sum, reflect_into};

pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_ITER_CAP: usize = 10_000;

/// `10 * ceil(ln tol / ln radius)`, clamped to `[10, 10000]`.
pub fn default_max_iter(tol: f64, radius: f64) -> usize {
    if radius <= 0.0 {
        return 10;
    }
    if radius >= 1.0 {
        return MAX_ITER_CAP;
    }
    let sweeps = (tol.ln() / radius.ln()).ceil();
    if !sweeps.is_finite() {
        return MAX_ITER_CAP;
    }
    (10.0 * sweeps).clamp(10.0, MAX_ITER_CAP as f64) as usize
}

/// Fixed point of `L_i = sup_{s<=.} (z_i + sum_{l != i} A_il L_l)^-` by Jacobi
/// sweeps from `L = 0`, stopped once the sup-norm change is at most `tol`.
///
/// `X_i` is the one-dimensional reflection of the last driver, so it is
/// nonnegative and complementary to `L_i` exactly on the grid.
pub fn solve_srbm_contraction(
    z: &[Path],
    spec: &ReflectionSpec,
    tol: f64,
    max_iter: Option<usize>,
) -> Result<SrbmSolution> {
    let n = spec.n();
    if z.len() != n {
        return invalid(format!("expected {n} driver paths, got {}", z.len()));
    }
    let grid = z[0].grid();
    if z.iter().any(|p| p.grid() != grid) {
        return Err(Error::GridMismatch);
    }
    if let Some((i, p)) = z.iter().enumerate().find(|(_, p)| p.at(0) < 0.0) {
        return invalid(format!("driver {i} starts at {} < 0", p.at(0)));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let radius = spectral_radius_abs(spec);
    if radius >= 1.0 {
        return Err(Error::NotContractive { radius });
    }
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(tol, radius));
    let interaction = spec.interaction();
    let len = grid.len();

    let mut l = vec![vec![0.0; len]; n];
    let mut next = vec![vec![0.0; len]; n];
    let mut x = vec![vec![0.0; len]; n];
    let mut push = vec![vec![0.0; len]; n];
    let mut gaps = Vec::new();

    for iteration in 1..=max_iter {
        interaction_terms(&interaction, &l, &mut push);
        let gap = next
            .par_iter_mut()
            .zip(x.par_iter_mut())
            .zip(push.par_iter_mut())
            .enumerate()
            .map(|(i, ((li, xi), di))| {
                for (d, zk) in di.iter_mut().zip(z[i].values()) {
                    *d += zk;
                }
                reflect_into(di, xi, li);
                li.iter()
                    .zip(&l[i])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut l, &mut next);
        gaps.push(gap);
        if gap <= tol {
            return Ok(finish(grid, x, l, iteration, gap, gaps));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: gaps.last().copied().unwrap_or(f64::NAN),
    })
}

/// Writes `sum_{l != i} A_il L_l(t_k)` into `out[i][k]`.
pub(crate) fn interaction_terms(interaction: &Interaction, l: &[Vec<f64>], out: &mut [Vec<f64>]) {
    match interaction {
        Interaction::Uniform(c) => {
            let c = *c;
            let len = l[0].len();
            let mut total = vec![0.0; len];
            for li in l {
                for (s, v) in total.iter_mut().zip(li) {
                    *s += v;
                }
            }
            out.par_iter_mut().zip(l.par_iter()).for_each(|(oi, li)| {
                for ((o, s), v) in oi.iter_mut().zip(&total).zip(li) {
                    *o = c * (s - v);
                }
            });
        }
        Interaction::Dense(a) => {
            let n = l.len();
            out.par_iter_mut().enumerate().for_each(|(i, oi)| {
                oi.iter_mut().for_each(|o| *o = 0.0);
                for (j, lj) in l.iter().enumerate() {
                    let coeff = a[i * n + j];
                    if j == i || coeff == 0.0 || lj.last() == Some(&0.0) {
                        continue;
                    }
                    for (o, v) in oi.iter_mut().zip(lj) {
                        *o += coeff * v;
                    }
                }
            });
        }
    }
}

fn finish(
    grid: crate::paths::TimeGrid,
    x: Vec<Vec<f64>>,
    l: Vec<Vec<f64>>,
    iterations: usize,
    residual: f64,
    gap_history: Vec<f64>,
) -> SrbmSolution {
    let max_complementarity_residual = x
        .iter()
        .zip(&l)
        .map(|(xi, li)| complementarity_sum(xi, li).abs())
        .fold(0.0, f64::max);
    let min_x = x.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    SrbmSolution {
        x: x.into_iter().map(|v| Path::from_parts(grid, v)).collect(),
        l: l.into_iter().map(|v| Path::from_parts(grid, v)).collect(),
        solver: SolverKind::Contraction,
        iterations,
        fixed_point_residual: residual,
        max_complementarity_residual,
        min_x,
        gap_history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{make_grid, sample_brownian};
    use crate::skorohod::reflect_1d;
    use crate::srbm::homogeneous_matrix;

    fn drivers(n: usize, steps: usize, seed: u64) -> Vec<Path> {
        let g = make_grid(1.0, steps).unwrap();
        sample_brownian(g, n, 0.0, 1.0, seed)
            .unwrap()
            .paths()
            .iter()
            .map(|p| Path::new(g, p.values().iter().map(|v| v + 0.1).collect()).unwrap())
            .collect()
    }

    #[test]
    fn default_iteration_budget() {
        assert_eq!(default_max_iter(1e-10, 0.0), 10);
        assert_eq!(default_max_iter(1e-10, 0.5), 340);
        assert_eq!(default_max_iter(1e-10, 0.9999999), 10_000);
    }

    #[test]
    fn zero_interaction_is_componentwise_reflection() {
        let z = drivers(4, 200, 3);
        let sol = solve_srbm_contraction(&z, &homogeneous_matrix(4, 0.0).unwrap(), 1e-10, None)
            .unwrap();
        for (i, zi) in z.iter().enumerate() {
            let (x, l) = reflect_1d(zi).unwrap();
            assert_eq!(sol.x()[i], x);
            assert_eq!(sol.l()[i], l);
        }
    }

    #[test]
    fn exchangeable_inputs_give_equal_boundary_terms() {
        let z = drivers(1, 300, 9);
        let z = vec![z[0].clone(), z[0].clone()];
        let sol = solve_srbm_contraction(&z, &homogeneous_matrix(2, 0.5).unwrap(), 1e-12, None)
            .unwrap();
        assert_eq!(sol.l()[0], sol.l()[1]);
    }

    #[test]
    fn contraction_certificate() {
        for a in [-0.9, -0.5, 0.5, 0.9] {
            let z = drivers(8, 300, 11);
            let sol = solve_srbm_contraction(&z, &homogeneous_matrix(8, a).unwrap(), 1e-10, None)
                .unwrap();
            assert!(sol.fixed_point_residual() <= 1e-10);
            assert_eq!(sol.max_complementarity_residual(), 0.0);
            assert!(sol.min_x() >= 0.0);
            for w in sol.gap_history().windows(2) {
                assert!(w[1] <= (a.abs() + 1e-9) * w[0], "{a}: {w:?}");
            }
        }
    }

    #[test]
    fn refuses_non_contractive_matrix() {
        let z = drivers(3, 10, 1);
        let err = solve_srbm_contraction(&z, &homogeneous_matrix(3, 1.0).unwrap(), 1e-10, None)
            .unwrap_err();
        assert!(matches!(err, Error::NotContractive { .. }));
        assert!(err.to_string().contains("penalty"));
    }

    #[test]
    fn exhausted_budget_reports_residual() {
        let z = drivers(4, 100, 2);
        let err = solve_srbm_contraction(&z, &homogeneous_matrix(4, -0.9).unwrap(), 1e-14, Some(2))
            .unwrap_err();
        match err {
            Error::NonConvergence { iterations, residual } => {
                assert_eq!(iterations, 2);
                assert!(residual > 0.0);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn dense_and_uniform_kernels_agree() {
        let z = drivers(5, 100, 4);
        let hom = homogeneous_matrix(5, -0.6).unwrap();
        let mut rows = hom.to_rows();
        rows[0][1] += 1e-13;
        let dense = ReflectionSpec::explicit(&rows).unwrap();
        assert!(matches!(dense.interaction(), Interaction::Dense(_)));
        let u = solve_srbm_contraction(&z, &hom, 1e-12, None).unwrap();
        let d = solve_srbm_contraction(&z, &dense, 1e-12, None).unwrap();
        for (p, q) in u.l().iter().zip(d.l()) {
            for (a, b) in p.values().iter().zip(q.values()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
