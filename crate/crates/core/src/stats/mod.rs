//! Empirical measures, Wasserstein distances, chaos diagnostics and the
//! pathwise-bound audit.

mod bounds;
mod chaos;
mod measure;
mod report;
mod wasserstein;

pub use bounds::{pathwise_bound_check, BoundCheck, BoundReport};
pub use chaos::{
    chaos_gap, chaos_gap_pooled, pearson, ChaosReference, ChaosReport, ChaosSamples,
    PairSamples,
};
pub use measure::{empirical_measure, mean_boundary, EmpiricalMeasure, MarginalSource};
pub use report::{mean_and_stderr, write_report_csv, ReportRow};
pub use wasserstein::{
    wasserstein1_1d, wasserstein1_2d_assignment, wasserstein1_sorted, wasserstein1_to_law,
    MAX_ASSIGNMENT_SIZE,
};
