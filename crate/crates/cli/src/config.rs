use std::path::Path;

use serde::{Deserialize, Serialize};

use rbmlab_core::environment::CoefficientFamily;
use rbmlab_core::srbm::SolverChoice;
use rbmlab_core::InitialLaw;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoConfig {
    #[serde(default = "default_family")]
    pub family: CoefficientFamily,
    #[serde(default)]
    pub half_width: f64,
    #[serde(default = "default_eps_rho")]
    pub eps_rho: f64,
    #[serde(default)]
    pub env_seed: u64,
}

fn default_family() -> CoefficientFamily {
    CoefficientFamily::Uniform
}

fn default_eps_rho() -> f64 {
    0.1
}

impl Default for RhoConfig {
    fn default() -> Self {
        Self {
            family: default_family(),
            half_width: 0.0,
            eps_rho: default_eps_rho(),
            env_seed: 0,
        }
    }
}

/// One experiment description. Unset fields take the defaults below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub experiment: Option<String>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub a_list: Option<Vec<f64>>,
    /// Explicit reflection matrix, overriding `n` and `a` where accepted.
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub rho: RhoConfig,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(rename = "T", default = "one")]
    pub horizon: f64,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub ensemble: Option<usize>,
    #[serde(default)]
    pub replications: Option<usize>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub epsilon_list: Option<Vec<f64>>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub mv_tol: Option<f64>,
    #[serde(default)]
    pub damping: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub initial: InitialLaw,
    #[serde(default)]
    pub solver: Option<SolverChoice>,
    #[serde(default)]
    pub penalized: bool,
    #[serde(default)]
    pub quenched_n: Option<usize>,
    #[serde(default)]
    pub routing: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub rho_matrix: Option<Vec<Vec<f64>>>,
}

fn one() -> f64 {
    1.0
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", path.display())))?;
        let config: Config = serde_json::from_str(&text)
            .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Schema(msg));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("T must be positive, got {}", self.horizon));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !self.b.is_finite() {
            return bad("b must be finite".into());
        }
        if self.steps == Some(0) {
            return bad("steps must be at least 1".into());
        }
        if self.ensemble == Some(0) || self.replications == Some(0) {
            return bad("ensemble and replications must be at least 1".into());
        }
        for eps in self.epsilons() {
            if !(eps.is_finite() && eps > 0.0) {
                return bad(format!("epsilon must be positive, got {eps}"));
            }
        }
        if let Some(t) = self.tol.into_iter().chain(self.mv_tol).find(|t| !(*t > 0.0)) {
            return bad(format!("tolerances must be positive, got {t}"));
        }
        if let Some(d) = self.damping {
            if !(d > 0.0 && d <= 1.0) {
                return bad(format!("damping must lie in (0, 1], got {d}"));
            }
        }
        if self.n_list.as_ref().is_some_and(|l| l.is_empty()) {
            return bad("n_list must not be empty".into());
        }
        if self.a_list.as_ref().is_some_and(|l| l.is_empty()) {
            return bad("a_list must not be empty".into());
        }
        self.initial
            .validate()
            .map_err(|e| CliError::Schema(format!("initial: {e}")))?;
        Ok(())
    }

    pub fn require_n(&self) -> Result<usize, CliError> {
        self.n
            .ok_or_else(|| CliError::Schema("field `n` is required".into()))
    }

    pub fn require_a(&self) -> Result<f64, CliError> {
        self.a
            .ok_or_else(|| CliError::Schema("field `a` is required".into()))
    }

    pub fn n_values(&self) -> Result<Vec<usize>, CliError> {
        match (&self.n_list, self.n) {
            (Some(list), _) => Ok(list.clone()),
            (None, Some(n)) => Ok(vec![n]),
            (None, None) => Err(CliError::Schema("field `n` or `n_list` is required".into())),
        }
    }

    pub fn a_values(&self) -> Result<Vec<f64>, CliError> {
        match (&self.a_list, self.a) {
            (Some(list), _) => Ok(list.clone()),
            (None, Some(a)) => Ok(vec![a]),
            (None, None) => Err(CliError::Schema("field `a` or `a_list` is required".into())),
        }
    }

    pub fn epsilons(&self) -> Vec<f64> {
        match (&self.epsilon_list, self.epsilon) {
            (Some(list), _) => list.clone(),
            (None, Some(e)) => vec![e],
            (None, None) => Vec::new(),
        }
    }

    pub fn steps_or(&self, default: usize) -> usize {
        self.steps.unwrap_or(default)
    }

    pub fn replications_or(&self, default: usize) -> usize {
        self.replications.unwrap_or(default)
    }

    pub fn ensemble_or(&self, default: usize) -> usize {
        self.ensemble.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_renames() {
        let c: Config = serde_json::from_str(r#"{"n": 4, "a": -1, "T": 2.0}"#).unwrap();
        assert_eq!(c.horizon, 2.0);
        assert_eq!(c.sigma, 1.0);
        assert_eq!(c.rho.eps_rho, 0.1);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"n": 4, "alpha": 1}"#).is_err());
    }

    #[test]
    fn invalid_values_are_schema_errors() {
        let c: Config = serde_json::from_str(r#"{"sigma": -1}"#).unwrap();
        assert!(matches!(c.validate(), Err(CliError::Schema(_))));
        let c: Config = serde_json::from_str(r#"{"epsilon_list": [0.1, 0]}"#).unwrap();
        assert!(c.validate().is_err());
    }
}
