use std::f64::consts::TAU;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::fibonacci_points;
use crate::sphere::SpherePoint;

/// How simulation locations are placed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Area-uniform random points: `lon = 2πu`, `lat = asin(2v − 1)`.
    #[default]
    UniformRandom,
    FibonacciLattice,
    /// A CSV with header `lat_deg,lon_deg`, one location per row.
    FromFile(PathBuf),
}

/// Location count, time points and seed of a simulation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_locations: usize,
    #[serde(default)]
    pub sampling: Sampling,
    pub time_points: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GridSpec {
    pub fn new(n_locations: usize, time_points: usize, seed: u64) -> Self {
        Self {
            n_locations,
            sampling: Sampling::UniformRandom,
            time_points,
            seed,
        }
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    /// `n ≥ 2` and `T ≥ d + 1`.
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.n_locations < 2 {
            return Err(Error::Config(format!(
                "grid needs at least 2 locations, got {}",
                self.n_locations
            )));
        }
        if self.time_points < d + 1 {
            return Err(Error::Config(format!(
                "grid needs at least {} time points for d = {d}, got {}",
                d + 1,
                self.time_points
            )));
        }
        Ok(())
    }
}

/// Draws `n` area-uniform points from `rng`.
pub fn uniform_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<SpherePoint> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            SpherePoint::new(TAU * u, (2.0 * v - 1.0).asin()).expect("uniform draw lies on the sphere")
        })
        .collect()
}

/// Locations for `grid`; random draws come from `rng`.
pub fn sample_locations<R: Rng + ?Sized>(grid: &GridSpec, rng: &mut R) -> Result<Vec<SpherePoint>> {
    let points = match &grid.sampling {
        Sampling::UniformRandom => uniform_points(grid.n_locations, rng),
        Sampling::FibonacciLattice => fibonacci_points(grid.n_locations),
        Sampling::FromFile(path) => {
            let pts = crate::io::read_locations_csv(path)?;
            if pts.len() != grid.n_locations {
                return Err(Error::Config(format!(
                    "{} lists {} locations but the grid asks for {}",
                    path.display(),
                    pts.len(),
                    grid.n_locations
                )));
            }
            pts
        }
    };
    Ok(points)
}
