//! Special functions and spherical geometry: Legendre polynomials, fully
//! normalized associated Legendre functions, real spherical harmonics,
//! great-circle distance and Gauss-Legendre quadrature.

mod harmonics;
mod legendre;
mod point;
mod quadrature;

pub use harmonics::{harmonics_below_degree, real_spherical_harmonic};
pub use legendre::{assoc_legendre_normalized, legendre_p, legendre_p_sequence, MAX_DEGREE};
pub use point::{great_circle, HarmonicIndex, SpherePoint};
pub use quadrature::gauss_legendre_nodes;

pub(crate) use legendre::{legendre_sequence_unchecked, legendre_unchecked};
pub(crate) use quadrature::projection_rule;
