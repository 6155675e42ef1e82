//! Ranking, correlation coefficients, significance tests and the
//! per-discipline subgroup correlation suite.

mod correlation;
mod rank;
mod significance;
mod suite;

use thiserror::Error;

pub use correlation::{pearson, spearman};
pub use rank::{average_ranks, RankVector};
pub use significance::{
    correlate, permutation_test, t_statistic, t_test, Significance, SignificanceMethod,
    Statistic, PERMUTATION_SAMPLES, EXHAUSTIVE_MAX_N,
};
pub use suite::{
    correlation_suite, Cell, CorrelationReport, DisciplineCorrelation, Pairing, SubgroupCell,
    SuiteOptions,
};

/// Default significance level.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("input is empty")]
    EmptyInput,
    #[error("value at index {index} is not finite ({value})")]
    NonFiniteValue { index: usize, value: f64 },
    #[error("inputs differ in length ({x} vs {y})")]
    LengthMismatch { x: usize, y: usize },
    #[error("an input has zero variance")]
    DegenerateVariance,
    #[error("{n} points given, at least {min} required")]
    TooFewPoints { n: usize, min: usize },
    #[error("coefficient {0} lies outside [-1, 1]")]
    CoefficientOutOfRange(f64),
    #[error("significance level {0} must lie in (0, 1)")]
    InvalidAlpha(f64),
}

/// Correlation of one pair of measures over one set of groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub n: usize,
    pub r: f64,
    pub rho: f64,
    pub p_r: f64,
    pub p_rho: f64,
    pub significant_r: bool,
    pub significant_rho: bool,
}
