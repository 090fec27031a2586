//! Simulation and analysis toolkit for test-validity estimation.
//!
//! Two questions drive the crate. First, what happens to multiple-correlation
//! estimates when a large sample is carved into small sub-samples and the
//! per-sub-sample estimates are averaged, instead of estimating once from the
//! pooled scores? The [`pooling`] harness runs that experiment over seedable
//! multivariate-normal populations and tabulates the bias of three
//! estimators. Second, how useful is a test of given validity as a decision
//! instrument once base rates and admission quotas enter? The [`decision`]
//! module answers with fourfold classification tables, gains over random
//! admission, and hit rates.
//!
//! All randomness flows through [`SeedSpec`]: identical seeds reproduce
//! results bit for bit, and independent substreams make parallel execution
//! order-independent.

pub mod correlation;
pub mod corrections;
pub mod decision;
pub mod error;
pub mod matrix;
pub mod normal;
pub mod pooling;
pub mod sampler;

pub use correlation::{
    bias, corr_matrix, multiple_correlations, pda_pool, pool_departments, sum_score_validity,
    DeptRecord, EstimateRecord, MultipleCorrelationVector,
};
pub use corrections::{range_restriction_correct, shrinkage_adjust};
pub use decision::{
    binorm_upper, fourfold_from, mc_orthant_oracle, utility_grid, utility, ClassificationGrid,
    FourfoldTable, GridCell, OrthantEstimate, UtilityReport,
};
pub use error::{Error, Result};
pub use matrix::{gram_factor, spd_inverse, CorrelationMatrix, GramFactor};
pub use pooling::{
    reproduce_bias_tables, run_cell, run_cell_at, validity_sweep, BiasTables, CellResult,
    EstimatorMeans, EstimatorSes, SimDesign, SweepRow, ValiditySweep,
};
pub use sampler::{mvn_sample, split_subsamples, standard_normal_matrix, ScoreMatrix, SeedSpec};
