use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A location on the unit sphere. Longitude is kept in `[0, 2π)`,
/// latitude in `[-π/2, π/2]`, both in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRaw")]
pub struct SpherePoint {
    lon: f64,
    lat: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointRaw {
    lon: f64,
    lat: f64,
}

impl TryFrom<PointRaw> for SpherePoint {
    type Error = Error;

    fn try_from(raw: PointRaw) -> Result<Self> {
        SpherePoint::new(raw.lon, raw.lat)
    }
}

impl SpherePoint {
    /// Longitude is wrapped into `[0, 2π)`; latitude outside `[-π/2, π/2]`
    /// (beyond a 1e-12 slack) is rejected.
    pub fn new(lon: f64, lat: f64) -> Result<Self> {
        if !lon.is_finite() || !lat.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite coordinates (lon {lon}, lat {lat})"
            )));
        }
        if lat.abs() > FRAC_PI_2 + 1e-12 {
            return Err(Error::Domain(format!(
                "latitude {lat} rad outside [-pi/2, pi/2]"
            )));
        }
        Ok(Self {
            lon: wrap_longitude(lon),
            lat: lat.clamp(-FRAC_PI_2, FRAC_PI_2),
        })
    }

    pub fn from_degrees(lon_deg: f64, lat_deg: f64) -> Result<Self> {
        Self::new(lon_deg.to_radians(), lat_deg.to_radians())
    }

    pub fn north_pole() -> Self {
        Self {
            lon: 0.0,
            lat: FRAC_PI_2,
        }
    }

    pub fn south_pole() -> Self {
        Self {
            lon: 0.0,
            lat: -FRAC_PI_2,
        }
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    /// Colatitude measured from the north pole, in `[0, π]`.
    pub fn colatitude(&self) -> f64 {
        FRAC_PI_2 - self.lat
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (sl, cl) = self.lat.sin_cos();
        let (so, co) = self.lon.sin_cos();
        [cl * co, cl * so, sl]
    }
}

fn wrap_longitude(lon: f64) -> f64 {
    let w = lon.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Central angle between two points, in `[0, π]`, via the haversine form.
pub fn great_circle(p: &SpherePoint, q: &SpherePoint) -> f64 {
    let dlat = (p.lat - q.lat).abs();
    let dlon = (p.lon - q.lon).abs();
    let s_lat = (0.5 * dlat).sin();
    let s_lon = (0.5 * dlon).sin();
    let h = s_lat * s_lat + p.lat.cos() * q.lat.cos() * s_lon * s_lon;
    (2.0 * h.clamp(0.0, 1.0).sqrt().asin()).clamp(0.0, PI)
}

/// Degree/order pair of a real spherical harmonic, `|m| <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicIndex {
    degree: usize,
    order: i64,
}

impl HarmonicIndex {
    pub fn new(degree: usize, order: i64) -> Result<Self> {
        if order.unsigned_abs() as usize > degree {
            return Err(Error::Index { degree, order });
        }
        Ok(Self { degree, order })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    /// All indices with degree `< n`, ordered by degree then order
    /// `-l..=l`. There are `n²` of them.
    pub fn below_degree(n: usize) -> Vec<HarmonicIndex> {
        let mut out = Vec::with_capacity(n * n);
        for degree in 0..n {
            let l = degree as i64;
            for order in -l..=l {
                out.push(HarmonicIndex { degree, order });
            }
        }
        out
    }
}
