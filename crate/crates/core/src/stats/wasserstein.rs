use crate::error::{invalid, Result};
use crate::export::compensated_sum;
use crate::mckean_vlasov::FoldedNormal;

/// Largest sample size accepted by [`wasserstein1_2d_assignment`].
pub const MAX_ASSIGNMENT_SIZE: usize = 64;

fn check_samples(u: &[f64]) -> Result<()> {
    if u.is_empty() {
        return invalid("sample list is empty");
    }
    if u.iter().any(|v| !v.is_finite()) {
        return invalid("samples must be finite");
    }
    Ok(())
}

fn sorted(u: &[f64]) -> Vec<f64> {
    let mut s = u.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// `(1/m) sum_k |u_(k) - v_(k)|` for already sorted samples of equal size.
pub fn wasserstein1_sorted(u: &[f64], v: &[f64]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    compensated_sum(u.iter().zip(v).map(|(a, b)| (a - b).abs())) / u.len() as f64
}

/// Exact W1 between two empirical measures on the line.
///
/// Equal sizes use the sorted matching; otherwise `int |F_u - F_v| dx` is
/// integrated over the merged support.
pub fn wasserstein1_1d(u: &[f64], v: &[f64]) -> Result<f64> {
    check_samples(u)?;
    check_samples(v)?;
    let (u, v) = (sorted(u), sorted(v));
    if u.len() == v.len() {
        return Ok(wasserstein1_sorted(&u, &v));
    }
    let (m, n) = (u.len(), v.len());
    let (mut i, mut j) = (0, 0);
    let mut prev = u[0].min(v[0]);
    let mut terms = Vec::with_capacity(m + n);
    while i < m || j < n {
        let take_u = j == n || (i < m && u[i] <= v[j]);
        let next = if take_u { u[i] } else { v[j] };
        let gap = (i as f64 / m as f64 - j as f64 / n as f64).abs();
        terms.push(gap * (next - prev));
        prev = next;
        if take_u {
            i += 1;
        } else {
            j += 1;
        }
    }
    Ok(compensated_sum(terms))
}

/// Exact W1 between an empirical measure and a folded normal law.
///
/// On the quantile scale the sample `x_(i)` is matched with the law's
/// quantiles on `[(i-1)/m, i/m]`; each piece integrates in closed form through
/// the law's partial means.
pub fn wasserstein1_to_law(samples: &[f64], law: &FoldedNormal) -> Result<f64> {
    check_samples(samples)?;
    let x = sorted(samples);
    let m = x.len() as f64;
    if law.is_point_mass() {
        return Ok(compensated_sum(x.iter().map(|v| v.abs())) / m);
    }
    let partial = |q: f64| {
        if q.is_infinite() {
            law.mean()
        } else {
            law.partial_mean(q)
        }
    };
    let terms = x.iter().enumerate().map(|(i, &xi)| {
        let (u1, u2) = (i as f64 / m, (i + 1) as f64 / m);
        let (q1, q2) = (law.quantile(u1), law.quantile(u2));
        let us = law.cdf(xi).clamp(u1, u2);
        let qs = if us <= u1 {
            q1
        } else if us >= u2 {
            q2
        } else {
            xi
        };
        let (g1, gs, g2) = (partial(q1), partial(qs), partial(q2));
        xi * (us - u1) - (gs - g1) + (g2 - gs) - xi * (u2 - us)
    });
    Ok(compensated_sum(terms))
}

/// Exact W1 with Euclidean cost between two equal-size point sets in the
/// plane, by optimal assignment. Sizes above [`MAX_ASSIGNMENT_SIZE`] are refused.
pub fn wasserstein1_2d_assignment(u: &[(f64, f64)], v: &[(f64, f64)]) -> Result<f64> {
    let m = u.len();
    if m == 0 || v.len() != m {
        return invalid("point sets must be nonempty and of equal size");
    }
    if m > MAX_ASSIGNMENT_SIZE {
        return invalid(format!(
            "assignment is limited to {MAX_ASSIGNMENT_SIZE} points, got {m}"
        ));
    }
    let cost: Vec<Vec<f64>> = u
        .iter()
        .map(|p| v.iter().map(|q| (p.0 - q.0).hypot(p.1 - q.1)).collect())
        .collect();
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return invalid("points must be finite");
    }
    let assignment = hungarian(&cost);
    Ok(compensated_sum(assignment.iter().enumerate().map(|(i, &j)| cost[i][j])) / m as f64)
}

/// Minimum-cost perfect matching on a square cost matrix; `result[row] = column`.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // potentials and matching are 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let i0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = col0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            owner[col0] = owner[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut result = vec![0; n];
    for j in 1..=n {
        result[owner[j] - 1] = j - 1;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mckean_vlasov::analytic_rbm_marginal;

    #[test]
    fn examples() {
        let u = [0.3, -1.0, 2.5];
        assert_eq!(wasserstein1_1d(&u, &u).unwrap(), 0.0);
        assert_eq!(wasserstein1_1d(&[0.0; 4], &[1.0; 4]).unwrap(), 1.0);
        assert_eq!(wasserstein1_1d(&[0.0, 1.0], &[0.0, 3.0]).unwrap(), 1.0);
        assert!(wasserstein1_1d(&[], &[1.0]).is_err());
        assert!(wasserstein1_1d(&[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn unequal_sizes() {
        // {0, 1} vs {0}: F differs by 1/2 on [0, 1)
        assert!((wasserstein1_1d(&[0.0, 1.0], &[0.0]).unwrap() - 0.5).abs() < 1e-15);
        // duplicating every atom leaves the measure unchanged
        let u = [0.1, 0.7, -0.4];
        let v = [0.5, 0.2, 0.9];
        let doubled: Vec<f64> = v.iter().chain(&v).copied().collect();
        let direct = wasserstein1_1d(&u, &v).unwrap();
        assert!((wasserstein1_1d(&u, &doubled).unwrap() - direct).abs() < 1e-15);
    }

    #[test]
    fn distance_to_law() {
        let law = analytic_rbm_marginal(1.0, 1.0, 0.0).unwrap();
        // a single atom at x: W1 = E|X - x|
        let x = 0.4;
        let expected = law.mean() - 2.0 * law.partial_mean(x) + x * (2.0 * law.cdf(x) - 1.0);
        assert!((wasserstein1_to_law(&[x], &law).unwrap() - expected).abs() < 1e-14);
        // quantile atoms converge to the law
        let m = 4000;
        let q: Vec<f64> = (0..m).map(|i| law.quantile((i as f64 + 0.5) / m as f64)).collect();
        assert!(wasserstein1_to_law(&q, &law).unwrap() < 1e-3);
        let zero = analytic_rbm_marginal(0.0, 1.0, 0.0).unwrap();
        assert_eq!(wasserstein1_to_law(&[1.0, -3.0], &zero).unwrap(), 2.0);
    }

    #[test]
    fn assignment_small_cases() {
        let u = [(0.0, 0.0), (1.0, 0.0)];
        let v = [(1.0, 0.0), (0.0, 1.0)];
        assert!((wasserstein1_2d_assignment(&u, &v).unwrap() - 0.5).abs() < 1e-15);
        let line_u: Vec<_> = [0.0, 1.0, 5.0].iter().map(|&x| (x, 0.0)).collect();
        let line_v: Vec<_> = [2.0, -1.0, 4.0].iter().map(|&x| (x, 0.0)).collect();
        let one_d = wasserstein1_1d(&[0.0, 1.0, 5.0], &[2.0, -1.0, 4.0]).unwrap();
        assert!((wasserstein1_2d_assignment(&line_u, &line_v).unwrap() - one_d).abs() < 1e-15);
        let big = vec![(0.0, 0.0); 65];
        assert!(wasserstein1_2d_assignment(&big, &big).is_err());
    }
}
