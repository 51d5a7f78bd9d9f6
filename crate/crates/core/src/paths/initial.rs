use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{self, Domain};

/// Law of the initial positions on `[0, inf)`.
///
/// Draw `i` comes from its own stream, so particle `i` starts at the same
/// place whatever the system size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialLaw {
    Point { at: f64 },
    Uniform { upper: f64 },
    Exponential { rate: f64 },
}

impl Default for InitialLaw {
    fn default() -> Self {
        InitialLaw::Point { at: 0.0 }
    }
}

impl InitialLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitialLaw::Point { at } if !(at.is_finite() && at >= 0.0) => {
                invalid(format!("point mass must sit in [0, inf), got {at}"))
            }
            InitialLaw::Uniform { upper } if !(upper.is_finite() && upper > 0.0) => {
                invalid(format!("uniform upper bound must be positive, got {upper}"))
            }
            InitialLaw::Exponential { rate } if !(rate.is_finite() && rate > 0.0) => {
                invalid(format!("exponential rate must be positive, got {rate}"))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            InitialLaw::Point { at } => at,
            InitialLaw::Uniform { upper } => upper / 2.0,
            InitialLaw::Exponential { rate } => 1.0 / rate,
        }
    }

    pub fn sample(&self, seed: u64, index: u64) -> f64 {
        match *self {
            InitialLaw::Point { at } => at,
            InitialLaw::Uniform { upper } => {
                upper * rng::unit_closed_open(&mut rng::stream(seed, Domain::Initial, index))
            }
            InitialLaw::Exponential { rate } => {
                -rng::unit_open_closed(&mut rng::stream(seed, Domain::Initial, index)).ln() / rate
            }
        }
    }

    pub fn sample_n(&self, seed: u64, n: usize) -> Vec<f64> {
        (0..n as u64).map(|i| self.sample(seed, i)).collect()
    }
}
