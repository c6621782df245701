//! Partitions, symmetric and Stieltjes integral sums, variation functionals
//! and Monte Carlo quantiles.

mod partition;
mod quantile;
mod sums;
mod variation;

pub use partition::{dyadic_partition, uniform_partition, Partition, MAX_DYADIC_LEVEL};
pub use quantile::{boundedness_quantile, empirical_quantile};
pub use sums::{
    stieltjes_integral, symmetric_integral, symmetric_sum, ConvergenceReport,
    CONVERGENCE_WINDOW, DEFAULT_TOL,
};
pub use variation::{strong_variation_estimate, sum_squared_increments};
