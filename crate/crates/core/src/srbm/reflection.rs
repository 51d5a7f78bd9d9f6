use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Strict-positivity threshold on the optimal LP margin.
const MARGIN_THRESHOLD: f64 = 1e-9;
/// Subset enumeration is exponential; beyond this the check is refused.
const MAX_ENUMERATION_DIM: usize = 20;
/// Dimensions for which the closed-form homogeneous criterion is re-derived by enumeration.
const CROSS_CHECK_DIM: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReflectionKind {
    /// `R_ii = 1`, `R_ij = a / (n - 1)`.
    Homogeneous { a: f64 },
    /// Row-major `n x n` matrix with unit diagonal.
    Explicit { matrix: Vec<f64> },
}

/// Reflection matrix `R = I + A` of an SRBM in the `n`-dimensional orthant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSpec {
    n: usize,
    kind: ReflectionKind,
}

/// Off-diagonal part `A = R - I` in the form the solvers consume.
#[derive(Clone, Debug)]
pub(crate) enum Interaction {
    /// Every off-diagonal entry equals the coefficient.
    Uniform(f64),
    /// Row-major `A` with zero diagonal.
    Dense(Vec<f64>),
}

pub fn homogeneous_matrix(n: usize, a: f64) -> Result<ReflectionSpec> {
    ReflectionSpec::homogeneous(n, a)
}

impl ReflectionSpec {
    pub fn homogeneous(n: usize, a: f64) -> Result<Self> {
        if n < 2 {
            return invalid(format!("homogeneous reflection needs n >= 2, got {n}"));
        }
        if !a.is_finite() {
            return invalid("interaction coefficient must be finite");
        }
        Ok(Self {
            n,
            kind: ReflectionKind::Homogeneous { a },
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut matrix = vec![0.0; n * n];
        for i in 0..n {
            matrix[i * n + i] = 1.0;
        }
        Self::from_row_major(n, matrix)
    }

    /// From rows; the matrix must be square with unit diagonal and finite entries.
    pub fn explicit(rows: &[Vec<f64>]) -> Result<Self> {
        let n = check_square(rows)?;
        Self::from_row_major(n, rows.concat())
    }

    pub fn from_row_major(n: usize, matrix: Vec<f64>) -> Result<Self> {
        if n == 0 || matrix.len() != n * n {
            return invalid(format!("expected {n}x{n} entries, got {}", matrix.len()));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return invalid("reflection matrix entries must be finite");
        }
        if (0..n).any(|i| matrix[i * n + i] != 1.0) {
            return invalid("reflection matrix must have unit diagonal");
        }
        Ok(Self {
            n,
            kind: ReflectionKind::Explicit { matrix },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &ReflectionKind {
        &self.kind
    }

    /// The homogeneous coefficient `a`, if this is the homogeneous kind.
    pub fn homogeneous_coefficient(&self) -> Option<f64> {
        match self.kind {
            ReflectionKind::Homogeneous { a } => Some(a),
            ReflectionKind::Explicit { .. } => None,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match &self.kind {
            _ if i == j => 1.0,
            ReflectionKind::Homogeneous { a } => a / (self.n - 1) as f64,
            ReflectionKind::Explicit { matrix } => matrix[i * self.n + j],
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub(crate) fn interaction(&self) -> Interaction {
        match &self.kind {
            ReflectionKind::Homogeneous { a } => Interaction::Uniform(a / (self.n - 1) as f64),
            ReflectionKind::Explicit { matrix } => {
                let n = self.n;
                let mut off = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)));
                match off.next() {
                    None => Interaction::Uniform(0.0),
                    Some((i0, j0)) => {
                        let c = matrix[i0 * n + j0];
                        if off.all(|(i, j)| matrix[i * n + j] == c) {
                            Interaction::Uniform(c)
                        } else {
                            let mut a = matrix.clone();
                            for i in 0..n {
                                a[i * n + i] = 0.0;
                            }
                            Interaction::Dense(a)
                        }
                    }
                }
            }
        }
    }
}

fn check_square(rows: &[Vec<f64>]) -> Result<usize> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return invalid("matrix must be square and non-empty");
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return invalid("matrix entries must be finite");
    }
    Ok(n)
}

/// Whether `R` is completely-S.
///
/// The homogeneous kind is decided by `a > -1`; for `n <= 6` that answer is
/// re-derived by subset enumeration and a disagreement is an error.
pub fn is_completely_s(spec: &ReflectionSpec) -> Result<bool> {
    match spec.kind {
        ReflectionKind::Homogeneous { a } => {
            let closed = a > -1.0;
            if spec.n <= CROSS_CHECK_DIM && is_completely_s_lp(&spec.to_rows())? != closed {
                return Err(Error::CrossCheck { n: spec.n, a });
            }
            Ok(closed)
        }
        ReflectionKind::Explicit { .. } => is_completely_s_lp(&spec.to_rows()),
    }
}

/// Completely-S by enumerating every nonempty principal submatrix and solving
/// the margin LP for each.
pub fn is_completely_s_lp(rows: &[Vec<f64>]) -> Result<bool> {
    let n = check_square(rows)?;
    if n > MAX_ENUMERATION_DIM {
        return invalid(format!(
            "subset enumeration is limited to n <= {MAX_ENUMERATION_DIM}, got {n}"
        ));
    }
    for mask in 1u32..(1u32 << n) {
        let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        if completely_s_margin(rows, &subset)? <= MARGIN_THRESHOLD {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `max m` subject to `R_J x >= m 1`, `0 <= x <= 1`, for the principal
/// submatrix indexed by `subset`.
pub fn completely_s_margin(rows: &[Vec<f64>], subset: &[usize]) -> Result<f64> {
    let n = check_square(rows)?;
    if subset.is_empty() || subset.iter().any(|&i| i >= n) {
        return invalid("subset must be nonempty and within range");
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let xs: Vec<_> = subset.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    let margin = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for &i in subset {
        let mut expr: Vec<_> = subset
            .iter()
            .zip(&xs)
            .map(|(&j, &x)| (x, rows[i][j]))
            .collect();
        expr.push((margin, -1.0));
        lp.add_constraint(&expr, ComparisonOp::Ge, 0.0);
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::LinearProgram(e.to_string()))?;
    Ok(solution.objective())
}

/// Spectral radius of `|R - I|`.
///
/// Homogeneous kind: `|a|`, since every row of `|A|` sums to `|a|`. Otherwise
/// power iteration on `|A| + I` with Collatz–Wielandt bounds, stopped at
/// relative gap 1e-10; if that stalls the upper bound is returned.
pub fn spectral_radius_abs(spec: &ReflectionSpec) -> f64 {
    match spec.interaction() {
        Interaction::Uniform(c) if spec.n > 1 => c.abs() * (spec.n - 1) as f64,
        Interaction::Uniform(_) => 0.0,
        Interaction::Dense(a) => perron_root_shifted(spec.n, &a) - 1.0,
    }
}

fn perron_root_shifted(n: usize, a: &[f64]) -> f64 {
    const MAX_ITER: usize = 100_000;
    let b: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(idx, v)| v.abs() + if idx / n == idx % n { 1.0 } else { 0.0 })
        .collect();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut hi = f64::INFINITY;
    for _ in 0..MAX_ITER {
        for i in 0..n {
            y[i] = b[i * n..(i + 1) * n].iter().zip(&x).map(|(p, q)| p * q).sum();
        }
        let (mut lo, mut up) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            up = up.max(r);
        }
        hi = up;
        if up - lo <= 1e-10 * up {
            return 0.5 * (lo + up);
        }
        let scale = y.iter().cloned().fold(0.0f64, f64::max);
        for i in 0..n {
            x[i] = y[i] / scale;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_expansion() {
        assert_eq!(
            homogeneous_matrix(3, 0.0).unwrap().to_rows(),
            ReflectionSpec::identity(3).unwrap().to_rows()
        );
        let r = homogeneous_matrix(3, 1.0).unwrap().to_rows();
        assert_eq!(r[0], vec![1.0, 0.5, 0.5]);
        assert_eq!(r[2], vec![0.5, 0.5, 1.0]);
        assert_eq!(
            homogeneous_matrix(2, -0.5).unwrap().to_rows(),
            vec![vec![1.0, -0.5], vec![-0.5, 1.0]]
        );
        assert!(homogeneous_matrix(1, 0.3).is_err());
    }

    #[test]
    fn explicit_validation() {
        assert!(ReflectionSpec::explicit(&[vec![1.0, 0.0]]).is_err());
        assert!(ReflectionSpec::explicit(&[vec![2.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(ReflectionSpec::explicit(&[vec![1.0, f64::NAN], vec![0.0, 1.0]]).is_err());
        assert!(is_completely_s_lp(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).is_err());
    }

    #[test]
    fn completely_s_examples() {
        assert!(!is_completely_s(&homogeneous_matrix(3, -1.0).unwrap()).unwrap());
        for n in 1..6 {
            assert!(is_completely_s(&ReflectionSpec::identity(n).unwrap()).unwrap());
        }
        let r = ReflectionSpec::explicit(&[vec![1.0, -2.0], vec![0.0, 1.0]]).unwrap();
        assert!(is_completely_s(&r).unwrap());
        let r = ReflectionSpec::explicit(&[vec![1.0, -2.0], vec![-1.0, 1.0]]).unwrap();
        assert!(!is_completely_s(&r).unwrap());
    }

    #[test]
    fn margin_of_certified_subset() {
        let rows = vec![vec![1.0, -2.0], vec![0.0, 1.0]];
        // x = (1, 1/3) attains margin 1/3 on the full index set
        let m = completely_s_margin(&rows, &[0, 1]).unwrap();
        assert!((m - 1.0 / 3.0).abs() < 1e-9);
        assert!((completely_s_margin(&rows, &[1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_examples() {
        assert_eq!(spectral_radius_abs(&homogeneous_matrix(5, 0.7).unwrap()), 0.7);
        assert_eq!(spectral_radius_abs(&ReflectionSpec::identity(4).unwrap()), 0.0);
        let r = spectral_radius_abs(&homogeneous_matrix(2, -0.9).unwrap());
        assert!((r - 0.9).abs() < 1e-15);
    }

    #[test]
    fn spectral_radius_of_dense_matches_closed_form() {
        // |A| = [[0, 0.2], [0.8, 0]] has Perron root sqrt(0.16) = 0.4
        let r = ReflectionSpec::explicit(&[vec![1.0, -0.2], vec![0.8, 1.0]]).unwrap();
        assert!((spectral_radius_abs(&r) - 0.4).abs() < 1e-9);
        // nilpotent |A|: the radius is zero
        let r = ReflectionSpec::explicit(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(spectral_radius_abs(&r) < 1e-4);
    }

    #[test]
    fn uniform_explicit_matrix_is_detected() {
        let spec = ReflectionSpec::explicit(&[
            vec![1.0, 0.25, 0.25],
            vec![0.25, 1.0, 0.25],
            vec![0.25, 0.25, 1.0],
        ])
        .unwrap();
        assert!(matches!(spec.interaction(), Interaction::Uniform(c) if c == 0.25));
    }
}
