use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::grid::GridSpec;
use crate::kernels::{IntrinsicSpec, ModelSpec};
use crate::sphere::{great_circle, harmonics_below_degree, SpherePoint};

/// Condition number above which a harmonic regression design is rejected.
pub const REGRESSION_CONDITION_LIMIT: f64 = 1e12;

/// A transform applied to a field after sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Harmonics of degree `< order` removed per time slice.
    Truncated { order: usize },
    /// Unit-step backward difference of order `d`.
    Differenced { d: usize },
}

/// Provenance carried by a field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub spec: Option<ModelSpec>,
    pub intrinsic: Option<IntrinsicSpec>,
    pub grid: Option<GridSpec>,
    pub seed: Option<u64>,
    /// Absolute diagonal jitter added before factorization.
    pub jitter_used: f64,
    pub transforms: Vec<Transform>,
}

/// Values `X(P_i, t_j)` on a location list crossed with an integer time grid.
/// Values are stored location-major: `values[i * T + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    location_ids: Vec<u64>,
    locations: Vec<SpherePoint>,
    times: Vec<i64>,
    values: Vec<f64>,
    meta: FieldMeta,
}

impl SampledField {
    /// Checks shapes, finiteness, strictly increasing times and that no two
    /// locations are within 1e-12 rad of each other.
    pub fn new(
        location_ids: Vec<u64>,
        locations: Vec<SpherePoint>,
        times: Vec<i64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if location_ids.len() != locations.len() {
            return Err(Error::Config(format!(
                "{} location ids for {} locations",
                location_ids.len(),
                locations.len()
            )));
        }
        if values.len() != locations.len() * times.len() {
            return Err(Error::Config(format!(
                "{} values for {} locations x {} times",
                values.len(),
                locations.len(),
                times.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value at location index {}, time index {}",
                k / times.len(),
                k % times.len()
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("time indices must be strictly increasing".into()));
        }
        check_distinct(&locations)?;
        Ok(Self {
            location_ids,
            locations,
            times,
            values,
            meta: FieldMeta::default(),
        })
    }

    /// Ids `0..n` and times `1..=T`.
    pub fn from_grid_values(locations: Vec<SpherePoint>, time_points: usize, values: Vec<f64>) -> Result<Self> {
        let ids = (0..locations.len() as u64).collect();
        let times = (1..=time_points as i64).collect();
        Self::new(ids, locations, times, values)
    }

    pub fn with_meta(mut self, meta: FieldMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn location_ids(&self) -> &[u64] {
        &self.location_ids
    }
    pub fn locations(&self) -> &[SpherePoint] {
        &self.locations
    }
    pub fn times(&self) -> &[i64] {
        &self.times
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn meta(&self) -> &FieldMeta {
        &self.meta
    }
    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }
    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    /// Time series at location index `i`.
    pub fn series(&self, i: usize) -> &[f64] {
        let t = self.times.len();
        &self.values[i * t..(i + 1) * t]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.times.len() + j]
    }

    fn derived(&self, times: Vec<i64>, values: Vec<f64>, transform: Transform) -> Self {
        let mut meta = self.meta.clone();
        meta.transforms.push(transform);
        Self {
            location_ids: self.location_ids.clone(),
            locations: self.locations.clone(),
            times,
            values,
            meta,
        }
    }
}

fn check_distinct(locations: &[SpherePoint]) -> Result<()> {
    // any pair closer than 1e-12 rad differs by at most that much in z = sin(lat)
    let mut order: Vec<(f64, usize)> = locations
        .iter()
        .enumerate()
        .map(|(i, p)| (p.lat().sin(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            if order[b].0 - order[a].0 > 1e-12 {
                break;
            }
            let (i, j) = (order[a].1, order[b].1);
            if great_circle(&locations[i], &locations[j]) <= 1e-12 {
                return Err(Error::Config(format!(
                    "locations {} and {} coincide",
                    i.min(j),
                    i.max(j)
                )));
            }
        }
    }
    Ok(())
}

/// `d = 0` returns the field unchanged; `d = 1` returns
/// `X(P, t) − X(P, t − 1)` on the time grid without its first point.
pub fn difference_time(field: &SampledField, d: usize) -> Result<SampledField> {
    if d > 1 {
        return Err(Error::Config(format!("differencing order {d} not supported (0 or 1)")));
    }
    let t = field.n_times();
    if t < d + 1 {
        return Err(Error::TooShort { len: t, needed: d + 1 });
    }
    if d == 0 {
        return Ok(field.clone());
    }
    if field.times.windows(2).any(|w| w[1] - w[0] != 1) {
        return Err(Error::Precondition("differencing needs consecutive time indices".into()));
    }
    let mut values = Vec::with_capacity(field.n_locations() * (t - 1));
    for i in 0..field.n_locations() {
        let s = field.series(i);
        values.extend(s.windows(2).map(|w| w[1] - w[0]));
    }
    Ok(field.derived(field.times[1..].to_vec(), values, Transform::Differenced { d }))
}

/// Per time slice, least-squares regression on `{Y_l^m : l < n}` at the
/// field's locations; returns the residuals. `n = 0` is the identity.
pub fn truncate_harmonics(field: &SampledField, n: usize) -> Result<SampledField> {
    if n == 0 {
        return Ok(field.clone());
    }
    let rows = field.n_locations();
    let cols = n * n;
    if rows < cols {
        return Err(Error::Precondition(format!(
            "regression on {cols} harmonics needs at least {cols} locations, got {rows}"
        )));
    }
    let basis: Vec<Vec<f64>> = field.locations.iter().map(|p| harmonics_below_degree(n, p)).collect();
    let design = Mat::<f64>::from_fn(rows, cols, |i, j| basis[i][j]);
    let sv = design.singular_values().map_err(|e| Error::Numeric(format!("{e:?}")))?;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > REGRESSION_CONDITION_LIMIT {
        return Err(Error::RankDeficient { condition });
    }
    let t = field.n_times();
    let y = Mat::<f64>::from_fn(rows, t, |i, j| field.values[i * t + j]);
    let coef = faer::prelude::SolveLstsq::solve_lstsq(&design.qr(), &y);
    let fitted = &design * &coef;
    let mut values = Vec::with_capacity(rows * t);
    for i in 0..rows {
        for j in 0..t {
            values.push(y[(i, j)] - fitted[(i, j)]);
        }
    }
    Ok(field.derived(field.times.clone(), values, Transform::Truncated { order: n }))
}
