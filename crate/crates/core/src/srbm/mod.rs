//! Reflection matrices and the two SRBM path solvers.

mod contraction;
mod penalty;
mod reflection;
mod solution;
mod system;

pub use contraction::{default_max_iter, solve_srbm_contraction, DEFAULT_TOL};
pub use penalty::{penalty_fn, solve_srbm_penalty};
pub use reflection::{
    completely_s_margin, homogeneous_matrix, is_completely_s, is_completely_s_lp,
    spectral_radius_abs, ReflectionKind, ReflectionSpec,
};
pub use solution::{SolverKind, SrbmSolution};
pub use system::{simulate_particle_system, ParticleRun, ParticleSystemConfig, SolverChoice};

pub(crate) use penalty::{check_stability, penalty_unchecked};
pub(crate) use system::drivers;
