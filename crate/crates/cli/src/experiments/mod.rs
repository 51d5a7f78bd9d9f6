//! One module per subcommand.

mod bounds;
mod chaos;
mod check_s;
mod coupling;
mod jackson;
mod mv;
mod penalty;
mod simulate;

use std::path::Path;

use clap::Subcommand;
use serde_json::{json, Map, Value};

use rbmlab_core::srbm::ReflectionSpec;
use rbmlab_core::stats::ReportRow;
use rbmlab_core::{make_grid, TimeGrid};

use crate::config::Config;
use crate::output::{hex_sha256, write_manifest, Artifacts, Manifest, Seeds};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Experiment {
    /// Completely-S test and spectral radius of reflection matrices.
    CheckS,
    /// One particle system run.
    Simulate,
    /// Mean-field limit by Picard iteration or the penalized scheme.
    MvSolve,
    /// Penalty gap against the reflected solutions over an epsilon grid.
    PenaltySweep,
    /// Marginal distance to the mean-field law and pair correlations over n.
    ChaosSweep,
    /// Random-environment coupling, quenched and annealed estimates over n.
    CouplingSweep,
    /// Pathwise bounds on the boundary terms over random scenarios.
    BoundsAudit,
    /// Routing matrix to reflection coefficients and back.
    JacksonMap,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::CheckS => "check-s",
            Experiment::Simulate => "simulate",
            Experiment::MvSolve => "mv-solve",
            Experiment::PenaltySweep => "penalty-sweep",
            Experiment::ChaosSweep => "chaos-sweep",
            Experiment::CouplingSweep => "coupling-sweep",
            Experiment::BoundsAudit => "bounds-audit",
            Experiment::JacksonMap => "jackson-map",
        }
    }
}

/// State shared by a running experiment.
pub struct Context {
    pub artifacts: Artifacts,
    pub diagnostics: Map<String, Value>,
    pub verbose: bool,
}

impl Context {
    pub fn note(&mut self, key: &str, value: Value) {
        self.diagnostics.insert(key.to_string(), value);
    }

    pub fn progress(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("rbmlab: {}", msg.as_ref());
        }
    }
}

pub fn run(experiment: Experiment, config: &Config, out_dir: &Path, verbose: bool) -> Result<(), CliError> {
    let mut ctx = Context {
        artifacts: Artifacts::create(out_dir)?,
        diagnostics: Map::new(),
        verbose,
    };
    let result = match experiment {
        Experiment::CheckS => check_s::run(config, &mut ctx),
        Experiment::Simulate => simulate::run(config, &mut ctx),
        Experiment::MvSolve => mv::run(config, &mut ctx),
        Experiment::PenaltySweep => penalty::run(config, &mut ctx),
        Experiment::ChaosSweep => chaos::run(config, &mut ctx),
        Experiment::CouplingSweep => coupling::run(config, &mut ctx),
        Experiment::BoundsAudit => bounds::run(config, &mut ctx),
        Experiment::JacksonMap => jackson::run(config, &mut ctx),
    };
    let result = result.and_then(|rows| ctx.artifacts.report(&rows));
    let status = match &result {
        Ok(()) => "ok",
        Err(CliError::Schema(_)) => "invalid",
        Err(_) => "failed",
    };
    if let Err(e) = &result {
        ctx.note("error", json!(e.to_string()));
    }
    let canonical = serde_json::to_value(config)
        .map_err(|e| CliError::Schema(format!("cannot serialise config: {e}")))?;
    let manifest = Manifest {
        tool: "rbmlab",
        version: env!("CARGO_PKG_VERSION"),
        core_version: rbmlab_core::VERSION,
        experiment: experiment.name(),
        config_sha256: hex_sha256(canonical.to_string().as_bytes()),
        config: &canonical,
        seeds: Seeds {
            noise_seed: config.seed,
            env_seed: config.rho.env_seed,
        },
        artifacts: ctx.artifacts.records(),
        status,
        diagnostics: Value::Object(ctx.diagnostics.clone()),
    };
    write_manifest(ctx.artifacts.dir(), &manifest)?;
    result
}

pub(crate) fn grid(config: &Config, default_steps: usize) -> Result<TimeGrid, CliError> {
    Ok(make_grid(config.horizon, config.steps_or(default_steps))?)
}

/// Reflection matrix from `matrix` if given, the identity for `n = 1`, and
/// the homogeneous matrix otherwise.
pub(crate) fn reflection(config: &Config, n: usize, a: Option<f64>) -> Result<ReflectionSpec, CliError> {
    if let Some(rows) = &config.matrix {
        let spec = ReflectionSpec::explicit(rows)?;
        if spec.n() != n {
            return Err(CliError::Schema(format!(
                "matrix is {}x{} but n = {n}",
                spec.n(),
                spec.n()
            )));
        }
        return Ok(spec);
    }
    if n == 1 {
        return Ok(ReflectionSpec::identity(1)?);
    }
    let a = a.ok_or_else(|| CliError::Schema("field `a` is required".into()))?;
    Ok(ReflectionSpec::homogeneous(n, a)?)
}

/// Largest absolute difference between two equal-length series.
pub(crate) fn sup_gap(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

/// Sample standard error of a mean, `NaN` for fewer than two values.
pub(crate) fn stderr_of(values: &[f64]) -> f64 {
    rbmlab_core::stats::mean_and_stderr(values).1
}

pub(crate) fn row(metric: impl Into<String>, n: usize, a: f64, t: f64, value: f64, stderr: f64) -> ReportRow {
    ReportRow::new(metric, n, a, t, value, stderr)
}
