//! The nonlinear reflected Brownian motion driven by its own mean boundary
//! curve, solved by Picard iteration over a frozen Monte Carlo ensemble, plus
//! the penalized variant and the closed-form law for the uncoupled case.

mod analytic;
mod members;
mod nlr;
mod penalized;
mod solution;

pub use analytic::{analytic_rbm_marginal, FoldedNormal};
pub use nlr::{default_damping, solve_nlr, NlrConfig, PicardStart};
pub use penalized::{solve_nlr_penalized, PenalizedConfig};
pub use solution::{MvScheme, MvSolution};
