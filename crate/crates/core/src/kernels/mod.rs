//! Covariance mathematics: the stationary families, the intrinsic
//! covariance of order κ, the integrated non-stationary kernel and the full
//! covariance with its nil-space correction.

mod covariance;
mod intrinsic;
mod model;

pub use covariance::{full_covariance, icf_value, integrated_block, CovarianceModel};
pub use intrinsic::{
    default_anchors, fibonacci_points, nil_space_basis, IntrinsicSpec, ANCHOR_CONDITION_LIMIT,
    DEFAULT_GAMMA_NU,
};
pub use model::{Family, ModelSpec};
