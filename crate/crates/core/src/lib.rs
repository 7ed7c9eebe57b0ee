//! Simulation, method-of-moments estimation and order selection for
//! intrinsic random functions on the sphere crossed with time.

pub mod commands;
pub mod config;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod field;
pub mod io;
pub mod kernels;
pub mod order;
pub mod sphere;

pub use error::{Error, Result};
pub use exec::Execution;
