//! Random reflection coefficients, quenched and annealed replication, the
//! coupling of a random-environment system with its homogeneous counterpart,
//! and the conversion between routing and reflection matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::paths::{sample_brownian, InitialLaw, Path, TimeGrid};
use crate::rng::{self, replicate_seed, Domain, GaussianStream};
use crate::srbm::{solve_srbm_contraction, ReflectionSpec, SrbmSolution};

/// Matrices up to this size are written inline in the JSON record.
const INLINE_LIMIT: usize = 64;

/// Law of each off-diagonal coefficient, centred at `a` with half-width `h`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientFamily {
    /// Uniform on `[a - h, a + h]`.
    Uniform,
    /// `a - h` or `a + h` with equal probability.
    TwoPoint,
    /// `N(a, (h/2)^2)` conditioned on `[a - h, a + h]`.
    TruncatedGaussian,
}

/// One draw of the coefficients `rho_ij`, `i != j`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentDraw {
    n: usize,
    a: f64,
    half_width: f64,
    eps_rho: f64,
    family: CoefficientFamily,
    env_seed: u64,
    /// Row-major, zero diagonal.
    rho: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct EnvironmentRecord {
    n: usize,
    family: CoefficientFamily,
    a: f64,
    half_width: f64,
    eps_rho: f64,
    env_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<Vec<Vec<f64>>>,
}

fn check_support(n: usize, a: f64, half_width: f64, eps_rho: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return invalid(format!("environment needs n >= 2, got {n}"));
    }
    if !(eps_rho > 0.0 && eps_rho < 1.0) {
        return invalid(format!("margin eps_rho must lie in (0, 1), got {eps_rho}"));
    }
    if !(half_width.is_finite() && half_width >= 0.0 && a.is_finite()) {
        return invalid("mean must be finite and half-width nonnegative");
    }
    let (lo, hi) = (a - half_width, a + half_width);
    let bound = 1.0 - eps_rho;
    if lo < -bound || hi > bound {
        return invalid(format!(
            "support [{lo}, {hi}] leaves [-{bound}, {bound}] required by eps_rho = {eps_rho}"
        ));
    }
    Ok((lo, hi))
}

/// Draws every `rho_ij` independently. Row `i` uses its own stream, so rows
/// and their leading entries do not change when `n` grows.
pub fn sample_environment(
    n: usize,
    a: f64,
    half_width: f64,
    eps_rho: f64,
    family: CoefficientFamily,
    env_seed: u64,
) -> Result<EnvironmentDraw> {
    let (lo, hi) = check_support(n, a, half_width, eps_rho)?;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| sample_row(i, n, a, half_width, family, env_seed, lo, hi))
        .collect();
    Ok(EnvironmentDraw {
        n,
        a,
        half_width,
        eps_rho,
        family,
        env_seed,
        rho: rows.concat(),
    })
}

#[allow(clippy::too_many_arguments)]
fn sample_row(
    i: usize,
    n: usize,
    a: f64,
    h: f64,
    family: CoefficientFamily,
    seed: u64,
    lo: f64,
    hi: f64,
) -> Vec<f64> {
    let mut row = vec![0.0; n];
    match family {
        CoefficientFamily::Uniform | CoefficientFamily::TwoPoint => {
            let mut stream = rng::stream(seed, Domain::Environment, i as u64);
            for (j, slot) in row.iter_mut().enumerate() {
                let u = rng::unit_closed_open(&mut stream);
                if j == i {
                    continue;
                }
                *slot = match family {
                    CoefficientFamily::Uniform => a + h * (2.0 * u - 1.0),
                    _ if u < 0.5 => lo,
                    _ => hi,
                };
            }
        }
        CoefficientFamily::TruncatedGaussian => {
            let mut gauss = GaussianStream::new(seed, Domain::Environment, i as u64);
            for (j, slot) in row.iter_mut().enumerate() {
                let z = loop {
                    let z = gauss.next_standard();
                    if z.abs() <= 2.0 {
                        break z;
                    }
                };
                if j != i {
                    *slot = a + 0.5 * h * z;
                }
            }
        }
    }
    for (j, slot) in row.iter_mut().enumerate() {
        if j != i {
            *slot = slot.clamp(lo, hi);
        }
    }
    row
}

impl EnvironmentDraw {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn eps_rho(&self) -> f64 {
        self.eps_rho
    }

    pub fn family(&self) -> CoefficientFamily {
        self.family
    }

    pub fn env_seed(&self) -> u64 {
        self.env_seed
    }

    pub fn rho(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.n + j]
    }

    /// Off-diagonal coefficients in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.n;
        self.rho
            .iter()
            .enumerate()
            .filter(move |(idx, _)| idx / n != idx % n)
            .map(|(_, v)| *v)
    }

    /// `max_i sum_{j != i} |rho_ij| / (n - 1)`.
    pub fn max_row_average(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| self.rho(i, j).abs())
                    .sum::<f64>()
                    / (n - 1) as f64
            })
            .fold(0.0, f64::max)
    }

    /// `R = I + rho / (n - 1)`.
    pub fn reflection(&self) -> Result<ReflectionSpec> {
        let n = self.n;
        let scale = (n - 1) as f64;
        let matrix = self
            .rho
            .iter()
            .enumerate()
            .map(|(idx, v)| if idx / n == idx % n { 1.0 } else { v / scale })
            .collect();
        ReflectionSpec::from_row_major(n, matrix)
    }

    pub fn to_json(&self) -> Result<String> {
        let rho = (self.n <= INLINE_LIMIT)
            .then(|| self.rho.chunks(self.n).map(<[f64]>::to_vec).collect());
        let record = EnvironmentRecord {
            n: self.n,
            family: self.family,
            a: self.a,
            half_width: self.half_width,
            eps_rho: self.eps_rho,
            env_seed: self.env_seed,
            rho,
        };
        Ok(serde_json::to_string_pretty(&record)?)
    }

    /// Reads a record, regenerating the coefficients from the seed when the
    /// matrix is not inline. An inline matrix must match the regenerated one.
    pub fn from_json(text: &str) -> Result<Self> {
        let record: EnvironmentRecord = serde_json::from_str(text)?;
        let draw = sample_environment(
            record.n,
            record.a,
            record.half_width,
            record.eps_rho,
            record.family,
            record.env_seed,
        )?;
        if let Some(rows) = record.rho {
            let inline: Vec<f64> = rows.concat();
            if inline != draw.rho {
                return invalid("inline coefficients do not match the recorded seed");
            }
        }
        Ok(draw)
    }
}

/// Grid, initial law and noise parameters shared by coupled and replicated runs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSetup {
    pub grid: TimeGrid,
    pub initial: InitialLaw,
    pub drift: f64,
    pub volatility: f64,
    pub tol: f64,
}

impl RunSetup {
    pub fn new(grid: TimeGrid) -> Self {
        Self {
            grid,
            initial: InitialLaw::default(),
            drift: 0.0,
            volatility: 1.0,
            tol: crate::srbm::DEFAULT_TOL,
        }
    }

    fn drivers(&self, n: usize, noise_seed: u64) -> Result<Vec<Path>> {
        self.initial.validate()?;
        let w = sample_brownian(self.grid, n, self.drift, self.volatility, noise_seed)?;
        let x0 = self.initial.sample_n(noise_seed, n);
        crate::srbm::drivers(&x0, &w)
    }

    fn solve(&self, spec: &ReflectionSpec, noise_seed: u64) -> Result<SrbmSolution> {
        let z = self.drivers(spec.n(), noise_seed)?;
        solve_srbm_contraction(&z, spec, self.tol, None)
    }
}

/// Sup-norm distances over `[0, T]` between the random-environment system and
/// the homogeneous one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingReport {
    pub n: usize,
    pub max_dx: f64,
    pub max_dl: f64,
    pub dx: Vec<f64>,
    pub dl: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct CoupledRun {
    pub random: SrbmSolution,
    pub homogeneous: SrbmSolution,
    pub report: CouplingReport,
}

/// Solves the system with `R = I + rho / (n - 1)` and the one with every
/// coefficient replaced by its mean `a`, on the same `X0 + W`.
pub fn coupled_run(env: &EnvironmentDraw, setup: &RunSetup, noise_seed: u64) -> Result<CoupledRun> {
    let n = env.n();
    let z = setup.drivers(n, noise_seed)?;
    let random = solve_srbm_contraction(&z, &env.reflection()?, setup.tol, None)?;
    let homogeneous =
        solve_srbm_contraction(&z, &ReflectionSpec::homogeneous(n, env.a())?, setup.tol, None)?;
    let report = coupling_report(&random, &homogeneous)?;
    Ok(CoupledRun {
        random,
        homogeneous,
        report,
    })
}

pub fn coupling_report(random: &SrbmSolution, homogeneous: &SrbmSolution) -> Result<CouplingReport> {
    if random.n() != homogeneous.n() || random.grid() != homogeneous.grid() {
        return Err(Error::GridMismatch);
    }
    let sup_gap = |p: &Path, q: &Path| {
        p.values()
            .iter()
            .zip(q.values())
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max)
    };
    let dx: Vec<f64> = random.x().iter().zip(homogeneous.x()).map(|(p, q)| sup_gap(p, q)).collect();
    let dl: Vec<f64> = random.l().iter().zip(homogeneous.l()).map(|(p, q)| sup_gap(p, q)).collect();
    Ok(CouplingReport {
        n: random.n(),
        max_dx: dx.iter().copied().fold(0.0, f64::max),
        max_dl: dl.iter().copied().fold(0.0, f64::max),
        dx,
        dl,
    })
}

/// One environment, `r` independent noise draws with seeds derived from `base_noise_seed`.
pub fn quenched_replicates(
    env: &EnvironmentDraw,
    r: usize,
    base_noise_seed: u64,
    setup: &RunSetup,
) -> Result<Vec<SrbmSolution>> {
    if r == 0 {
        return invalid("at least one replicate is required");
    }
    let spec = env.reflection()?;
    (0..r)
        .into_par_iter()
        .map(|k| setup.solve(&spec, replicate_seed(base_noise_seed, k)))
        .collect()
}

/// `r` independent (environment, noise) pairs; replicate `k` uses environment
/// seed and noise seed derived from the two bases.
#[allow(clippy::too_many_arguments)]
pub fn annealed_replicates(
    r: usize,
    n: usize,
    a: f64,
    half_width: f64,
    eps_rho: f64,
    family: CoefficientFamily,
    base_env_seed: u64,
    base_noise_seed: u64,
    setup: &RunSetup,
) -> Result<Vec<SrbmSolution>> {
    if r == 0 {
        return invalid("at least one replicate is required");
    }
    check_support(n, a, half_width, eps_rho)?;
    (0..r)
        .into_par_iter()
        .map(|k| {
            let env = sample_environment(
                n,
                a,
                half_width,
                eps_rho,
                family,
                replicate_seed(base_env_seed, k),
            )?;
            setup.solve(&env.reflection()?, replicate_seed(base_noise_seed, k))
        })
        .collect()
}

fn check_rows(rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return invalid(format!("expected a {n}x{n} matrix"));
    }
    if n < 2 {
        return invalid("routing needs at least two stations");
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return invalid("matrix entries must be finite");
    }
    Ok(())
}

/// `rho_ij = -(n - 1) P_ji` for a substochastic routing matrix `P` with zero diagonal.
pub fn routing_to_reflection(p: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    check_rows(p, n)?;
    if (0..n).any(|i| p[i][i] != 0.0) {
        return invalid("routing matrix must have zero diagonal");
    }
    if p.iter().flatten().any(|&v| v < 0.0) {
        return invalid("routing probabilities must be nonnegative");
    }
    if let Some(i) = (0..n).find(|&i| p[i].iter().sum::<f64>() > 1.0) {
        return invalid(format!("routing row {i} sums to more than 1"));
    }
    let scale = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { -(scale * p[j][i]) })
                .collect()
        })
        .collect())
}

/// Inverse of [`routing_to_reflection`]; positive coefficients have no routing
/// interpretation and are refused.
pub fn reflection_to_routing(rho: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>> {
    check_rows(rho, n)?;
    if let Some((i, j)) = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| i != j && rho[i][j] > 0.0)
    {
        return invalid(format!(
            "rho[{i}][{j}] = {} is positive and has no routing interpretation",
            rho[i][j]
        ));
    }
    let scale = (n - 1) as f64;
    let p: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { 0.0 } else { -rho[i][j] / scale })
                .collect()
        })
        .collect();
    if let Some(j) = (0..n).find(|&j| p[j].iter().sum::<f64>() > 1.0) {
        return invalid(format!("implied routing row {j} sums to more than 1"));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::make_grid;
    use crate::srbm::is_completely_s;

    #[test]
    fn degenerate_two_point_is_homogeneous() {
        let env = sample_environment(5, 0.3, 0.0, 0.1, CoefficientFamily::TwoPoint, 1).unwrap();
        assert!(env.off_diagonal().all(|v| v == 0.3));
        assert_eq!(
            env.reflection().unwrap().to_rows(),
            ReflectionSpec::homogeneous(5, 0.3).unwrap().to_rows()
        );
    }

    #[test]
    fn uniform_mean_clt() {
        let (a, h, n) = (0.2, 0.3, 100);
        let env = sample_environment(n, a, h, 0.1, CoefficientFamily::Uniform, 9).unwrap();
        let count = (n * (n - 1)) as f64;
        let mean = env.off_diagonal().sum::<f64>() / count;
        assert!((mean - a).abs() <= 3.0 * (h / 3f64.sqrt()) / count.sqrt());
    }

    #[test]
    fn support_and_row_sums() {
        for family in [
            CoefficientFamily::Uniform,
            CoefficientFamily::TwoPoint,
            CoefficientFamily::TruncatedGaussian,
        ] {
            for seed in 0..5 {
                let env = sample_environment(40, -0.4, 0.5, 0.1, family, seed).unwrap();
                assert!(env.off_diagonal().all(|v| v.abs() <= 0.9 && (-0.9..=0.1).contains(&v)));
                assert!(env.max_row_average() <= 0.9);
            }
        }
        assert!(sample_environment(4, 0.5, 0.5, 0.1, CoefficientFamily::Uniform, 0).is_err());
        assert!(sample_environment(4, 0.0, 0.2, 0.0, CoefficientFamily::Uniform, 0).is_err());
    }

    #[test]
    fn truncated_gaussian_is_centred() {
        let env =
            sample_environment(200, 0.1, 0.4, 0.1, CoefficientFamily::TruncatedGaussian, 3).unwrap();
        let count = 200.0 * 199.0;
        let mean = env.off_diagonal().sum::<f64>() / count;
        // the truncated law has standard deviation below h / 2
        assert!((mean - 0.1).abs() <= 4.0 * 0.2 / f64::sqrt(count));
    }

    #[test]
    fn rows_are_stable_when_n_grows() {
        let small = sample_environment(5, 0.0, 0.5, 0.1, CoefficientFamily::Uniform, 4).unwrap();
        let large = sample_environment(9, 0.0, 0.5, 0.1, CoefficientFamily::Uniform, 4).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(small.rho(i, j), large.rho(i, j));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let env = sample_environment(6, 0.2, 0.3, 0.1, CoefficientFamily::Uniform, 11).unwrap();
        let text = env.to_json().unwrap();
        assert!(text.contains("\"rho\""));
        assert_eq!(EnvironmentDraw::from_json(&text).unwrap(), env);
        let big = sample_environment(65, 0.2, 0.3, 0.1, CoefficientFamily::Uniform, 11).unwrap();
        let text = big.to_json().unwrap();
        assert!(!text.contains("\"rho\""));
        assert_eq!(EnvironmentDraw::from_json(&text).unwrap(), big);
    }

    #[test]
    fn degenerate_environment_couples_exactly() {
        let env = sample_environment(6, -0.3, 0.0, 0.1, CoefficientFamily::Uniform, 2).unwrap();
        let setup = RunSetup::new(make_grid(1.0, 100).unwrap());
        let run = coupled_run(&env, &setup, 5).unwrap();
        assert_eq!(run.report.max_dx, 0.0);
        assert_eq!(run.report.max_dl, 0.0);
        assert_eq!(run.random, run.homogeneous);
    }

    #[test]
    fn quenched_and_annealed_single_replicate_coincide() {
        let setup = RunSetup::new(make_grid(1.0, 50).unwrap());
        let env = sample_environment(5, 0.2, 0.3, 0.1, CoefficientFamily::Uniform, 7).unwrap();
        let q = quenched_replicates(&env, 1, 13, &setup).unwrap();
        let a = annealed_replicates(1, 5, 0.2, 0.3, 0.1, CoefficientFamily::Uniform, 7, 13, &setup)
            .unwrap();
        assert_eq!(q, a);
    }

    #[test]
    fn quenched_degenerate_matches_homogeneous() {
        let setup = RunSetup::new(make_grid(1.0, 50).unwrap());
        let env = sample_environment(4, 0.5, 0.0, 0.1, CoefficientFamily::TwoPoint, 7).unwrap();
        let q = quenched_replicates(&env, 3, 21, &setup).unwrap();
        let spec = ReflectionSpec::homogeneous(4, 0.5).unwrap();
        for (k, sol) in q.iter().enumerate() {
            assert_eq!(sol, &setup.solve(&spec, replicate_seed(21, k)).unwrap());
        }
    }

    #[test]
    fn random_reflection_is_completely_s() {
        let env = sample_environment(5, -0.5, 0.4, 0.1, CoefficientFamily::Uniform, 3).unwrap();
        assert!(is_completely_s(&env.reflection().unwrap()).unwrap());
    }

    #[test]
    fn routing_examples() {
        let zero = vec![vec![0.0; 3]; 3];
        assert_eq!(routing_to_reflection(&zero, 3).unwrap(), zero);
        let mut p = zero.clone();
        p[1][0] = 0.1;
        let rho = routing_to_reflection(&p, 3).unwrap();
        assert!((rho[0][1] + 0.2).abs() < 1e-15);
        assert_eq!(reflection_to_routing(&rho, 3).unwrap(), p);
        let mut bad = zero.clone();
        bad[0][1] = 0.1;
        assert!(reflection_to_routing(&bad, 3).is_err());
        let mut over = zero;
        over[0][1] = 0.7;
        over[0][2] = 0.6;
        assert!(routing_to_reflection(&over, 3).is_err());
    }
}
