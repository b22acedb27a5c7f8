//! Exact computation of magnitude functions and formal magnitude series of
//! finite metric spaces, and reconstruction of small spaces from magnitude data.

pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod formal;
pub mod io;
pub mod metric;
pub mod numeric;
pub mod rational;
pub mod reconstruction;
pub mod series;
pub mod small_scale;

pub use error::{MagnitudeError, Result};
pub use metric::{EdgeLengthMultiset, FiniteMetricSpace, ValidationReport};
pub use rational::Q;
pub use series::{GeneralizedSeries, TaylorSeries, Threshold};
