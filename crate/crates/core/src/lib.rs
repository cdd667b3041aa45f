//! Point and interval estimates of quantiles from grouped (binned) data.
//!
//! Four estimators of `(x̂_p, f̂(x̂_p))` are provided: histogram interpolation,
//! linear interpolation from bin means, the frequency polygon, and a
//! percentile-matched FKML generalized lambda distribution. The
//! [`interval`] module turns those into large-sample confidence intervals,
//! and [`sim`] measures their coverage by Monte Carlo.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod api;
pub mod distributions;
pub mod error;
pub mod estimate;
pub mod gld;
pub mod grouped;
pub mod interval;
pub mod piecewise;
pub mod service;
pub mod sim;

pub use error::{Error, ErrorKind, Result};
pub use estimate::{estimate, EstimatorOptions, FittedModel, Method, QuantileEstimate};
pub use grouped::{Bin, CumulativeTable, GroupedData};
pub use interval::{ci_difference, ci_single, z_quantile, ConfidenceInterval};
