//! Exact simulation of fields on location × time grids, and the truncation
//! and differencing transforms.

mod covariance;
mod grid;
mod sampled;
mod sampler;
mod simulate;

pub use covariance::{
    assemble_covariance, assemble_covariance_with, AssemblyOptions, CovarianceMatrix, DEFAULT_ROW_CAP,
};
pub use grid::{sample_locations, uniform_points, GridSpec, Sampling};
pub use sampled::{difference_time, truncate_harmonics, FieldMeta, SampledField, Transform, REGRESSION_CONDITION_LIMIT};
pub use sampler::{sample_gaussian, GaussianSampler, JITTER_LADDER};
pub use simulate::{simulate_irf, simulate_irf_sequential, simulate_irf_with, Simulator};
