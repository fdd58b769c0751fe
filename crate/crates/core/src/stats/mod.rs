//! Neighborhood-level inference: OLS with Student-t significance and
//! Pearson/Spearman correlations.

mod correlation;
mod dataset;
mod distributions;
mod ols;

pub use correlation::{pearson, ranks, spearman, Correlation, CorrelationResult};
pub use dataset::{
    build_neighborhood_dataset, join_demographics, regression_design, tally_neighborhoods, NeighborhoodDataset, NeighborhoodObservation,
    NeighborhoodTally, Predictor,
};
pub use distributions::{ln_gamma, normal_cdf, regularized_incomplete_beta, student_t_cdf, student_t_two_sided_p};
pub use ols::{ols_fit, significance_stars, OlsFit};
