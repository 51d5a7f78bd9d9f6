//! Time grids, sampled paths, Brownian drivers and initial laws.

mod brownian;
mod grid;
mod initial;

pub use brownian::{sample_brownian, sample_brownian_refined, BrownianEnsemble, BrownianStream};
pub use grid::{make_grid, mean_all, mean_exclude, Path, TimeGrid};
pub use initial::InitialLaw;
pub(crate) use brownian::check_params;
pub(crate) use grid::modulus_of;
