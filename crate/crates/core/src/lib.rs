//! Simulation of reflected Brownian particle systems in the orthant that
//! interact through their boundary local times, together with the mean-field
//! limit, penalty approximations and random-environment couplings.

pub mod environment;
pub mod error;
pub mod export;
pub mod mckean_vlasov;
pub mod paths;
pub mod rng;
pub mod skorohod;
pub mod srbm;
pub mod stats;

pub use error::{Error, Result};
pub use paths::{make_grid, InitialLaw, Path, TimeGrid};

/// Version of this crate, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
