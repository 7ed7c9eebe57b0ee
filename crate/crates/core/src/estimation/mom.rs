use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::SampledField;
use crate::sphere::great_circle;

/// Distance bins `[ψ_i − ε, ψ_i + ε]` crossed with exact time lags `h_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BinSpecRaw")]
pub struct BinSpec {
    psi_centers: Vec<f64>,
    epsilon: f64,
    lags: Vec<u64>,
    allow_overlap: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BinSpecRaw {
    #[serde(default)]
    psi_centers: Option<Vec<f64>>,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    lags: Option<Vec<u64>>,
    #[serde(default)]
    allow_overlap: bool,
}

impl TryFrom<BinSpecRaw> for BinSpec {
    type Error = Error;

    fn try_from(raw: BinSpecRaw) -> Result<Self> {
        let d = BinSpec::default();
        let centers = raw.psi_centers.unwrap_or(d.psi_centers);
        let epsilon = match raw.epsilon {
            Some(e) => e,
            None => default_epsilon(&centers),
        };
        BinSpec::new(centers, epsilon, raw.lags.unwrap_or(d.lags), raw.allow_overlap)
    }
}

/// Half the smallest center spacing, or 0.05 for a single center.
fn default_epsilon(centers: &[f64]) -> f64 {
    centers
        .windows(2)
        .map(|w| 0.5 * (w[1] - w[0]))
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
        .unwrap_or(0.05)
}

impl Default for BinSpec {
    /// Centers 0.05, 0.15, ..., 1.45, `ε = 0.05`, lags 0..=5.
    fn default() -> Self {
        Self {
            psi_centers: (0..15).map(|k| 0.05 + 0.1 * k as f64).collect(),
            epsilon: 0.05,
            lags: (0..=5).collect(),
            allow_overlap: false,
        }
    }
}

impl BinSpec {
    pub fn new(psi_centers: Vec<f64>, epsilon: f64, lags: Vec<u64>, allow_overlap: bool) -> Result<Self> {
        if psi_centers.is_empty() || lags.is_empty() {
            return Err(Error::Config("bins need at least one center and one lag".into()));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Config(format!("bin half-width {epsilon} must be positive")));
        }
        if psi_centers.iter().any(|c| !(0.0..=std::f64::consts::PI).contains(c)) {
            return Err(Error::Config("bin centers must lie in [0, pi]".into()));
        }
        if psi_centers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("bin centers must be strictly increasing".into()));
        }
        if !allow_overlap && psi_centers.windows(2).any(|w| w[1] - w[0] < 2.0 * epsilon - 1e-12) {
            return Err(Error::Config(format!(
                "bins of half-width {epsilon} overlap; set allow_overlap to permit this"
            )));
        }
        let mut sorted = lags.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("lags must be distinct".into()));
        }
        Ok(Self {
            psi_centers,
            epsilon,
            lags,
            allow_overlap,
        })
    }

    pub fn psi_centers(&self) -> &[f64] {
        &self.psi_centers
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn lags(&self) -> &[u64] {
        &self.lags
    }
    pub fn allow_overlap(&self) -> bool {
        self.allow_overlap
    }
    pub fn n_distance_bins(&self) -> usize {
        self.psi_centers.len()
    }
    pub fn n_lags(&self) -> usize {
        self.lags.len()
    }

    /// Range of distance-bin indices whose closed interval contains `psi`.
    fn bins_containing(&self, psi: f64) -> std::ops::Range<usize> {
        let eps = self.epsilon;
        let start = self.psi_centers.partition_point(|c| c + eps < psi);
        let end = self.psi_centers.partition_point(|c| c - eps <= psi);
        start..end.max(start)
    }
}

/// Binned moment estimates `φ̂(ψ_i, h_j)` with pair counts, stored
/// row-major by distance bin. Empty bins are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoMTable {
    bins: BinSpec,
    estimates: Vec<Option<f64>>,
    counts: Vec<u64>,
}

impl MoMTable {
    pub fn new(bins: BinSpec, estimates: Vec<Option<f64>>, counts: Vec<u64>) -> Result<Self> {
        let size = bins.n_distance_bins() * bins.n_lags();
        if estimates.len() != size || counts.len() != size {
            return Err(Error::Config(format!("moment table needs {size} entries")));
        }
        if estimates.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite moment estimate".into()));
        }
        Ok(Self {
            bins,
            estimates,
            counts,
        })
    }

    /// Table with every entry set from `f(ψ_i, h_j)` and unit counts.
    pub fn from_fn(bins: BinSpec, f: impl Fn(f64, u64) -> f64) -> Result<Self> {
        let mut estimates = Vec::new();
        for &psi in bins.psi_centers() {
            for &h in bins.lags() {
                estimates.push(Some(f(psi, h)));
            }
        }
        let counts = vec![1; estimates.len()];
        Self::new(bins, estimates, counts)
    }

    pub fn bins(&self) -> &BinSpec {
        &self.bins
    }
    pub fn estimates(&self) -> &[Option<f64>] {
        &self.estimates
    }
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
    pub fn estimate(&self, i: usize, j: usize) -> Option<f64> {
        self.estimates[i * self.bins.n_lags() + j]
    }
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.bins.n_lags() + j]
    }
    pub fn non_missing(&self) -> usize {
        self.estimates.iter().filter(|e| e.is_some()).count()
    }

    /// Every estimate multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            bins: self.bins.clone(),
            estimates: self.estimates.iter().map(|e| e.map(|v| v * c)).collect(),
            counts: self.counts.clone(),
        }
    }

    /// Iterates `(i, j, ψ_i, h_j, estimate)` over non-missing entries in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64, u64, f64)> + '_ {
        let k2 = self.bins.n_lags();
        self.estimates.iter().enumerate().filter_map(move |(k, e)| {
            e.map(|v| {
                let (i, j) = (k / k2, k % k2);
                (i, j, self.bins.psi_centers[i], self.bins.lags[j], v)
            })
        })
    }
}

/// Time-index pairs realizing each lag: `(a, b)` with `times[b] − times[a] = h`.
fn lag_pairs(times: &[i64], lags: &[u64]) -> Vec<Vec<(usize, usize)>> {
    lags.iter()
        .map(|&h| {
            let mut out = Vec::new();
            for a in 0..times.len() {
                for b in a..times.len() {
                    if (times[b] - times[a]) as u64 == h {
                        out.push((a, b));
                    }
                }
            }
            out
        })
        .collect()
}

/// Walks every product that enters the estimator with `i` as the first
/// location (and the partner location index `≥ i`), calling
/// `visit(k, product)` with `k` the flat bin index.
///
/// Location pairs are unordered. For two distinct locations and a lag
/// `h > 0` both time orders are visited. A location paired with itself
/// contributes only to distance bins containing 0: ordered time pairs for
/// `h > 0` and the squares (variance terms) for `h = 0`.
pub struct PairScanner<'a> {
    field: &'a SampledField,
    bins: &'a BinSpec,
    unit: Vec<[f64; 3]>,
    lag_pairs: Vec<Vec<(usize, usize)>>,
    min_dot: f64,
}

impl<'a> PairScanner<'a> {
    pub fn new(field: &'a SampledField, bins: &'a BinSpec) -> Self {
        let max_psi = bins.psi_centers.last().copied().unwrap_or(0.0) + bins.epsilon;
        // generous slack: the dot test only prunes, the exact distance decides
        let min_dot = if max_psi >= std::f64::consts::PI { -2.0 } else { max_psi.cos() - 1e-6 };
        Self {
            field,
            bins,
            unit: field.locations().iter().map(|p| p.unit_vector()).collect(),
            lag_pairs: lag_pairs(field.times(), bins.lags()),
            min_dot,
        }
    }

    pub fn visit(&self, i: usize, mut visit: impl FnMut(usize, f64)) {
        let k2 = self.bins.n_lags();
        let xi = self.field.series(i);
        let locations = self.field.locations();
        for j in i..self.field.n_locations() {
            let psi = if j == i {
                0.0
            } else {
                let (u, v) = (&self.unit[i], &self.unit[j]);
                if u[0] * v[0] + u[1] * v[1] + u[2] * v[2] < self.min_dot {
                    continue;
                }
                great_circle(&locations[i], &locations[j])
            };
            let range = self.bins.bins_containing(psi);
            if range.is_empty() {
                continue;
            }
            let xj = self.field.series(j);
            for bin in range {
                for (lj, pairs) in self.lag_pairs.iter().enumerate() {
                    let k = bin * k2 + lj;
                    for &(a, b) in pairs {
                        visit(k, xi[a] * xj[b]);
                        if j != i && a != b {
                            visit(k, xj[a] * xi[b]);
                        }
                    }
                }
            }
        }
    }
}

/// Method-of-moments table; see [`PairScanner`] for which products enter.
pub fn mom_estimate(field: &SampledField, bins: &BinSpec) -> Result<MoMTable> {
    mom_estimate_with(field, bins, Execution::default())
}

/// Per-location partial sums are computed independently and merged in
/// location order, so the result does not depend on the worker count.
pub fn mom_estimate_with(field: &SampledField, bins: &BinSpec, exec: Execution) -> Result<MoMTable> {
    let size = bins.n_distance_bins() * bins.n_lags();
    let scanner = PairScanner::new(field, bins);
    let partials = exec.map_indexed(field.n_locations(), |i| {
        let mut sums = vec![0.0; size];
        let mut counts = vec![0u64; size];
        scanner.visit(i, |k, prod| {
            sums[k] += prod;
            counts[k] += 1;
        });
        (sums, counts)
    });
    let mut sums = vec![0.0; size];
    let mut counts = vec![0u64; size];
    for (s, c) in partials {
        for k in 0..size {
            sums[k] += s[k];
            counts[k] += c[k];
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::EmptyTable);
    }
    let estimates = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
        .collect();
    MoMTable::new(bins.clone(), estimates, counts)
}
