//! Floating-point evaluation of the magnitude function.

mod magnitude;
mod real;

pub use magnitude::{
    grid_points, magnitude_at, magnitude_complete_graph, magnitude_complete_graph_real, magnitude_grid, magnitude_weights,
    magnitude_value, MagnitudeSample, SampleGrid, Spacing, DOUBLE_BITS,
};
pub use real::{BigReal, Real};
