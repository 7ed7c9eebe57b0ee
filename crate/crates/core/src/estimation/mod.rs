//! Binned method-of-moments estimation of the intrinsic covariance and
//! least-squares fitting of the generating-function parameters.

mod bfgs;
mod fit;
mod mom;
mod replicates;

pub use fit::{fit, loss, model_icf_core, FitOptions, FitResult, START_GRID};
pub use mom::{mom_estimate, mom_estimate_with, BinSpec, MoMTable, PairScanner};
pub use replicates::replicate_fits;
