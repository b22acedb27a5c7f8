//! The formal magnitude `m_X(q)` and the series derived from it.

mod derived;
mod extract;
mod path;

pub use derived::{f3_part, f_parts, f_series, g_series, sigma_from_lengths, sigma_series};
pub use extract::{
    extract_series_from_samples, geometric_schedule, ExtractionOptions, ExtractionResult,
};
pub use path::{m3_parts, path_expansion, M3Parts, PathExpansion, MAX_WALKS};
