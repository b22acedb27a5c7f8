//! Truncated Taylor series in `t` and generalized power series in `q = e^{-t}`.

mod generalized;
mod taylor;

pub use generalized::{GeneralizedSeries, SeriesOp, SeriesTerm, Threshold};
pub use taylor::{series_det, taylor_matrix_det_and_cofactor_sum, TaylorSeries, MAX_SERIES_MATRIX};
