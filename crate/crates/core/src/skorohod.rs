//! One-dimensional Skorohod map on a grid and the complementarity residual.

use crate::error::{invalid, Error, Result};
use crate::paths::Path;

/// Reflects `w` at zero: `l(t_k) = max_{j<=k} w(t_j)^-` and `x = w + l`.
pub fn reflect_1d(w: &Path) -> Result<(Path, Path)> {
    if w.at(0) < 0.0 {
        return invalid(format!("driver must start in [0, inf), got {}", w.at(0)));
    }
    let mut x = vec![0.0; w.values().len()];
    let mut l = vec![0.0; w.values().len()];
    reflect_into(w.values(), &mut x, &mut l);
    Ok((Path::from_parts(w.grid(), x), Path::from_parts(w.grid(), l)))
}

/// Slice form of [`reflect_1d`]; the caller guarantees `w[0] >= 0`.
#[inline]
pub(crate) fn reflect_into(w: &[f64], x: &mut [f64], l: &mut [f64]) {
    let mut running = 0.0f64;
    for ((&wk, xk), lk) in w.iter().zip(x.iter_mut()).zip(l.iter_mut()) {
        if -wk > running {
            running = -wk;
        }
        *lk = running;
        *xk = wk + running;
    }
}

/// Stieltjes sum `sum_k x(t_{k+1}) (l(t_{k+1}) - l(t_k))`.
///
/// Each increment of `l` is charged to the grid point where it lands, which is
/// where the Skorohod map places `x` at zero, so outputs of [`reflect_1d`] give
/// exactly zero.
pub fn complementarity_residual(x: &Path, l: &Path) -> Result<f64> {
    if x.grid() != l.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(complementarity_sum(x.values(), l.values()))
}

pub(crate) fn complementarity_sum(x: &[f64], l: &[f64]) -> f64 {
    x.iter()
        .skip(1)
        .zip(l.windows(2))
        .map(|(xk, pair)| xk * (pair[1] - pair[0]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::{make_grid, TimeGrid};
    use proptest::prelude::*;

    fn path(values: &[f64]) -> Path {
        let steps = values.len() - 1;
        Path::new(TimeGrid::new(steps as f64, steps).unwrap(), values.to_vec()).unwrap()
    }

    #[test]
    fn positive_driver_is_untouched() {
        let (x, l) = reflect_1d(&path(&[2.0; 6])).unwrap();
        assert!(l.values().iter().all(|&v| v == 0.0));
        assert!(x.values().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn decreasing_driver_is_pinned_at_zero() {
        let g = make_grid(1.0, 8).unwrap();
        let w = Path::from_fn(g, |t| -t).unwrap();
        let (x, l) = reflect_1d(&w).unwrap();
        for k in 0..g.len() {
            assert_eq!(l.at(k), g.time(k));
            assert_eq!(x.at(k), 0.0);
        }
    }

    #[test]
    fn hand_computed_vector() {
        let (x, l) = reflect_1d(&path(&[1.0, -1.0, 0.0, -2.0, 1.0])).unwrap();
        assert_eq!(l.values(), &[0.0, 1.0, 1.0, 2.0, 2.0]);
        assert_eq!(x.values(), &[1.0, 0.0, 1.0, 0.0, 3.0]);
        assert_eq!(complementarity_residual(&x, &l).unwrap(), 0.0);
    }

    #[test]
    fn negative_start_rejected() {
        assert!(reflect_1d(&path(&[-0.1, 1.0])).is_err());
    }

    #[test]
    fn residual_examples() {
        let g = make_grid(1.0, 10).unwrap();
        let x = Path::from_fn(g, |_| 1.0).unwrap();
        let l = Path::from_fn(g, |t| t).unwrap();
        assert!((complementarity_residual(&x, &l).unwrap() - 1.0).abs() < 1e-12);

        // the increment of l lands where x is zero
        let r = complementarity_residual(&path(&[0.0, 1.0, 0.0]), &path(&[0.0, 0.0, 1.0]));
        assert_eq!(r.unwrap(), 0.0);
        // and here it lands where x is one
        let r = complementarity_residual(&path(&[0.0, 0.0, 1.0]), &path(&[0.0, 0.0, 1.0]));
        assert_eq!(r.unwrap(), 1.0);
    }

    #[test]
    fn residual_rejects_mismatched_grids() {
        let a = path(&[0.0, 1.0, 2.0]);
        let b = Path::zeros(make_grid(1.0, 2).unwrap());
        assert!(matches!(complementarity_residual(&a, &b), Err(Error::GridMismatch)));
    }

    fn driver() -> impl Strategy<Value = Vec<f64>> {
        (0.0f64..2.0, prop::collection::vec(-1.0f64..1.0, 1..80)).prop_map(|(start, steps)| {
            let mut w = vec![start];
            for s in steps {
                w.push(w.last().unwrap() + s);
            }
            w
        })
    }

    proptest! {
        #[test]
        fn output_is_a_skorohod_pair(w in driver()) {
            let (x, l) = reflect_1d(&path(&w)).unwrap();
            prop_assert_eq!(l.at(0), 0.0);
            prop_assert!(x.values().iter().all(|&v| v >= 0.0));
            prop_assert!(l.values().windows(2).all(|p| p[1] >= p[0]));
            prop_assert_eq!(complementarity_residual(&x, &l).unwrap(), 0.0);
        }

        #[test]
        fn smaller_than_any_admissible_regulator(
            w in driver(),
            extra in prop::collection::vec(0.0f64..0.5, 80),
        ) {
            // candidate: the minimal regulator plus an arbitrary nondecreasing push
            let (_, l) = reflect_1d(&path(&w)).unwrap();
            let mut push = 0.0;
            let mut cand = Vec::with_capacity(w.len());
            for k in 0..w.len() {
                if k > 0 { push += extra[k - 1]; }
                let need = (-w[k]).max(0.0);
                let prev: f64 = if k == 0 { 0.0 } else { cand[k - 1] };
                cand.push(prev.max(need) + push);
            }
            cand[0] = 0.0;
            for k in 0..w.len() {
                prop_assert!(w[k] + cand[k] >= 0.0 || k == 0);
                prop_assert!(l.at(k) <= cand[k] + 1e-12 || k == 0);
            }
        }

        #[test]
        fn monotone_in_driver(w in driver(), bump in prop::collection::vec(0.0f64..1.0, 80), c in 0.0f64..3.0) {
            let upper: Vec<f64> = w.iter().zip(&bump).map(|(a, b)| a + b).collect();
            let (_, l) = reflect_1d(&path(&w)).unwrap();
            let (_, l_up) = reflect_1d(&path(&upper)).unwrap();
            let shifted: Vec<f64> = w.iter().map(|a| a + c).collect();
            let (_, l_shift) = reflect_1d(&path(&shifted)).unwrap();
            for k in 0..w.len() {
                prop_assert!(l_up.at(k) <= l.at(k));
                prop_assert!(l_shift.at(k) <= l.at(k));
            }
        }
    }
}
