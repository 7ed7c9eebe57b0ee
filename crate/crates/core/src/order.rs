//! Selection of the spatial order κ from the band-removal criterion M(n).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{mom_estimate_with, BinSpec, MoMTable};
use crate::exec::Execution;
use crate::field::{difference_time, truncate_harmonics, SampledField};
use crate::sphere::legendre_unchecked;

pub const DEFAULT_DROP_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub n_values: Vec<usize>,
    #[serde(rename = "M")]
    pub m: Vec<f64>,
    /// Natural log of `M(n)`; `None` where `M(n) = 0`.
    #[serde(rename = "logM")]
    pub log_m: Vec<Option<f64>>,
    pub kappa_hat: usize,
    pub drop_ratio: f64,
    pub rule: String,
}

/// `M(n)` from the moment tables of orders `n` and `n + 1`.
///
/// With `D = φ̂_n − φ̂_{n+1}`, the degree-`n` band amplitude at lag `h_j` is
/// read off the smallest non-missing distance bin `ψ_r` as
/// `D(ψ_r, h_j) / P_n(cos ψ_r)`, and `M(n)` sums the squared departures of
/// `D` from `amplitude · P_n(cos ψ_i)`. Bins missing in either table are
/// skipped.
pub fn m_value(n: usize, lower: &MoMTable, upper: &MoMTable) -> Result<f64> {
    if lower.bins() != upper.bins() {
        return Err(Error::Config("moment tables use different bins".into()));
    }
    let bins = lower.bins();
    let diff = |i: usize, j: usize| Some(lower.estimate(i, j)? - upper.estimate(i, j)?);
    let mut total = 0.0;
    for j in 0..bins.n_lags() {
        let Some(r) = (0..bins.n_distance_bins()).find(|&i| diff(i, j).is_some()) else {
            continue;
        };
        let p_ref = legendre_unchecked(n, bins.psi_centers()[r].cos());
        if p_ref.abs() < 1e-12 {
            continue;
        }
        let amplitude = diff(r, j).unwrap_or(0.0) / p_ref;
        for (i, psi) in bins.psi_centers().iter().enumerate() {
            if let Some(dv) = diff(i, j) {
                let e = dv - amplitude * legendre_unchecked(n, psi.cos());
                total += e * e;
            }
        }
    }
    Ok(total)
}

/// `[M(0), ..., M(n_max)]` from tables of orders `0..=n_max + 1`.
pub fn m_from_tables(tables: &[MoMTable]) -> Result<Vec<f64>> {
    tables
        .windows(2)
        .enumerate()
        .map(|(n, w)| m_value(n, &w[0], &w[1]))
        .collect()
}

/// Smallest `n` with `M(m) ≤ max M / drop_ratio` for every `m ≥ n`. Returns
/// 0 when the table never spans a factor of `drop_ratio`, and `M.len()`
/// (meaning "at least `n_max + 1`") when the last value is still large.
pub fn select_kappa(m: &[f64], drop_ratio: f64) -> usize {
    let max = m.iter().cloned().fold(0.0, f64::max);
    let min = m.iter().cloned().fold(f64::INFINITY, f64::min);
    if m.is_empty() || max <= 0.0 || (min > 0.0 && max / min < drop_ratio) {
        return 0;
    }
    let threshold = max / drop_ratio;
    let mut n = m.len();
    while n > 0 && m[n - 1] <= threshold {
        n -= 1;
    }
    n
}

/// For each `n ≤ n_max`, truncates the field to order `n` and `n + 1`,
/// differences it `d` times, estimates the moment tables and evaluates
/// `M(n)`.
pub fn m_criterion(field: &SampledField, d: usize, n_max: usize, bins: &BinSpec) -> Result<OrderReport> {
    m_criterion_with(field, d, n_max, bins, DEFAULT_DROP_RATIO, Execution::default())
}

pub fn m_criterion_with(
    field: &SampledField,
    d: usize,
    n_max: usize,
    bins: &BinSpec,
    drop_ratio: f64,
    exec: Execution,
) -> Result<OrderReport> {
    if !(drop_ratio > 1.0 && drop_ratio.is_finite()) {
        return Err(Error::Config(format!("drop ratio {drop_ratio} must exceed 1")));
    }
    let needed = (n_max + 1) * (n_max + 1);
    if field.n_locations() < needed {
        return Err(Error::Precondition(format!(
            "order selection up to n = {n_max} needs at least {needed} locations, got {}",
            field.n_locations()
        )));
    }
    let tables = (0..=n_max + 1)
        .map(|n| {
            let truncated = truncate_harmonics(field, n)?;
            let differenced = difference_time(&truncated, d)?;
            mom_estimate_with(&differenced, bins, exec)
        })
        .collect::<Result<Vec<_>>>()?;
    let m = m_from_tables(&tables)?;
    let kappa_hat = select_kappa(&m, drop_ratio);
    Ok(OrderReport {
        n_values: (0..=n_max).collect(),
        log_m: m.iter().map(|&v| (v > 0.0).then(|| v.ln())).collect(),
        m,
        kappa_hat,
        drop_ratio,
        rule: format!(
            "smallest n with M(m) <= max(M)/{drop_ratio} for all m >= n; 0 if max(M)/min(M) < {drop_ratio}; \
             n_max+1 means the order is at least n_max+1"
        ),
    })
}
