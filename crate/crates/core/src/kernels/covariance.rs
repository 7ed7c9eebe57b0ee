use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::intrinsic::IntrinsicSpec;
use crate::kernels::model::ModelSpec;
use crate::sphere::{great_circle, legendre_sequence_unchecked, SpherePoint};

/// A model together with its intrinsic order, with the low-degree Legendre
/// bands cached per lag.
///
/// `icf_core` is `φ0(ψ,h) − Σ_{l<κ} (2l+1)/(4π) B_l(h) P_l(cos ψ)` where
/// `B_l` is the band coefficient of the family (`a_l(h)` for the generating
/// function with `γ = 1`).
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    spec: ModelSpec,
    intrinsic: IntrinsicSpec,
    /// `bands[h][l] = (2l+1)/(4π) B_l(h)` for `h < bands.len()`, `l < κ`.
    bands: Vec<Vec<f64>>,
}

impl CovarianceModel {
    pub fn new(spec: ModelSpec, intrinsic: IntrinsicSpec) -> Self {
        Self::with_max_lag(spec, intrinsic, 0)
    }

    /// Pre-computes band coefficients for lags `0..=max_lag`.
    pub fn with_max_lag(spec: ModelSpec, intrinsic: IntrinsicSpec, max_lag: usize) -> Self {
        let bands = (0..=max_lag as i64)
            .map(|h| band_row(&spec, intrinsic.kappa(), h))
            .collect();
        Self {
            spec,
            intrinsic,
            bands,
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn intrinsic(&self) -> &IntrinsicSpec {
        &self.intrinsic
    }

    /// The intrinsic covariance without the `γ0` factor.
    pub fn icf_core(&self, psi: f64, h: i64) -> f64 {
        let kappa = self.intrinsic.kappa();
        let phi0 = self.spec.phi0(psi, h);
        if kappa == 0 {
            return phi0;
        }
        let p = legendre_sequence_unchecked(kappa - 1, psi.cos().clamp(-1.0, 1.0));
        let lag = h.unsigned_abs() as usize;
        let owned;
        let band = match self.bands.get(lag) {
            Some(b) => b,
            None => {
                owned = band_row(&self.spec, kappa, h);
                &owned
            }
        };
        phi0 - band.iter().zip(&p).map(|(b, p)| b * p).sum::<f64>()
    }

    /// `γ0 · icf_core(ψ, h)`.
    pub fn icf_value(&self, psi: f64, h: i64) -> f64 {
        self.intrinsic.gamma0() * self.icf_core(psi, h)
    }

    /// `[icf_core(ψ, 0), ..., icf_core(ψ, max_lag)]`.
    pub fn lag_sequence(&self, psi: f64, max_lag: usize) -> Vec<f64> {
        (0..=max_lag as i64).map(|h| self.icf_core(psi, h)).collect()
    }

    /// Non-stationary kernel `φ_κ(ψ, (t, s))`.
    ///
    /// For `d = 0` this is `icf_core(ψ, t − s)`. For `d = 1` it is the
    /// covariance of the unit-step integrated process anchored at the
    /// origin, `Σ_{u≤t} Σ_{v≤s} icf_core(ψ, u − v)`.
    pub fn integrated_block(&self, psi: f64, t: i64, s: i64) -> Result<f64> {
        if t < 0 || s < 0 {
            return Err(Error::Domain(format!("negative time index ({t}, {s})")));
        }
        if self.intrinsic.d() == 0 {
            return Ok(self.icf_core(psi, t - s));
        }
        let (hi, lo) = if t >= s { (t as usize, s as usize) } else { (s as usize, t as usize) };
        if lo == 0 {
            return Ok(0.0);
        }
        let lags = self.lag_sequence(psi, hi - 1);
        Ok(integrated_single(&lags, hi, lo))
    }

    /// The `T × T` block `φ_κ(ψ, (t, s))` for `t, s ∈ 1..=T`, row-major.
    /// Exactly symmetric.
    pub fn block(&self, psi: f64, times: usize) -> Vec<f64> {
        if times == 0 {
            return Vec::new();
        }
        let lags = self.lag_sequence(psi, times - 1);
        block_from_lags(&lags, times, self.intrinsic.d())
    }

    /// Full non-homogeneous, non-stationary covariance `R(P, Q, t, s)`.
    pub fn full_covariance(&self, p: &SpherePoint, q: &SpherePoint, t: i64, s: i64) -> Result<f64> {
        let g0 = self.intrinsic.gamma0();
        let mut r = g0 * g0 * self.integrated_block(great_circle(p, q), t, s)?;
        let k2 = self.intrinsic.kappa().pow(2);
        if k2 == 0 {
            return Ok(r);
        }
        let anchors = self.intrinsic.anchors();
        let gnu = self.intrinsic.gamma_nu();
        let qp = self.intrinsic.nil_values(p);
        let qq = self.intrinsic.nil_values(q);
        for nu in 0..k2 {
            for mu in 0..k2 {
                let phi = self.integrated_block(great_circle(&anchors[nu], &anchors[mu]), t, s)?;
                r += gnu[nu] * gnu[mu] * phi * qp[nu] * qq[mu];
            }
            r += gnu[nu] * gnu[nu] * qp[nu] * qq[nu];
            r -= g0 * gnu[nu] * self.integrated_block(great_circle(q, &anchors[nu]), t, s)? * qp[nu];
            r -= g0 * gnu[nu] * self.integrated_block(great_circle(p, &anchors[nu]), t, s)? * qq[nu];
        }
        Ok(r)
    }
}

fn band_row(spec: &ModelSpec, kappa: usize, h: i64) -> Vec<f64> {
    (0..kappa)
        .map(|l| (2.0 * l as f64 + 1.0) / (4.0 * PI) * spec.band_coefficient(l, h))
        .collect()
}

/// Signed cumulative lag sums: `cum[k] = Σ_{j=-L}^{k-L-1} c(|j|)` with `L = lags.len() - 1`.
fn cumulative(lags: &[f64]) -> Vec<f64> {
    let l = lags.len() as i64 - 1;
    let mut cum = Vec::with_capacity(2 * lags.len());
    cum.push(0.0);
    let mut acc = 0.0;
    for j in -l..=l {
        acc += lags[j.unsigned_abs() as usize];
        cum.push(acc);
    }
    cum
}

/// `D(u, s) = Σ_{v=1}^{s} c(|u − v|)` from the cumulative sums.
#[inline]
fn column_sum(cum: &[f64], l: usize, u: usize, s: usize) -> f64 {
    // Σ_{j=u-s}^{u-1} c(|j|) = cum[u-1+L+1] - cum[u-s+L]
    cum[u + l] - cum[u + l - s]
}

fn integrated_single(lags: &[f64], hi: usize, lo: usize) -> f64 {
    let l = lags.len() - 1;
    let cum = cumulative(lags);
    let mut acc = 0.0;
    for u in 1..=hi {
        acc += column_sum(&cum, l, u, lo);
    }
    acc
}

pub(crate) fn block_from_lags(lags: &[f64], times: usize, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; times * times];
    if d == 0 {
        for a in 0..times {
            for b in 0..times {
                out[a * times + b] = lags[a.abs_diff(b)];
            }
        }
        return out;
    }
    let l = lags.len() - 1;
    let cum = cumulative(lags);
    for lo in 1..=times {
        let mut acc = 0.0;
        for u in 1..=times {
            acc += column_sum(&cum, l, u, lo);
            if u >= lo {
                out[(u - 1) * times + (lo - 1)] = acc;
                out[(lo - 1) * times + (u - 1)] = acc;
            }
        }
    }
    out
}

/// `γ0 [φ0(ψ,h) − Σ_{l<κ} (2l+1)/(4π) B_l(h) P_l(cos ψ)]`.
pub fn icf_value(spec: &ModelSpec, intrinsic: &IntrinsicSpec, psi: f64, h: i64) -> f64 {
    CovarianceModel::new(*spec, intrinsic.clone()).icf_value(psi, h)
}

/// See [`CovarianceModel::integrated_block`].
pub fn integrated_block(spec: &ModelSpec, intrinsic: &IntrinsicSpec, psi: f64, t: i64, s: i64) -> Result<f64> {
    let max_lag = t.max(s).max(1) as usize - 1;
    CovarianceModel::with_max_lag(*spec, intrinsic.clone(), max_lag).integrated_block(psi, t, s)
}

/// See [`CovarianceModel::full_covariance`].
pub fn full_covariance(
    spec: &ModelSpec,
    intrinsic: &IntrinsicSpec,
    p: &SpherePoint,
    q: &SpherePoint,
    t: i64,
    s: i64,
) -> Result<f64> {
    let max_lag = t.max(s).max(1) as usize - 1;
    CovarianceModel::with_max_lag(*spec, intrinsic.clone(), max_lag).full_covariance(p, q, t, s)
}
