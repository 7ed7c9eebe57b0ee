use std::f64::consts::PI;

use faer::prelude::Solve;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{great_circle, harmonics_below_degree, SpherePoint};

/// Largest condition number accepted for the anchor evaluation matrix.
pub const ANCHOR_CONDITION_LIMIT: f64 = 1e12;

/// Default weight of every nil-space component, `1 / (2√π)`.
pub const DEFAULT_GAMMA_NU: f64 = 0.282_094_791_773_878_14;

/// Intrinsic order `(κ, d)` together with the scale parameters, the anchors
/// `τ_ν` and the interpolating nil-space basis `q_ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IntrinsicRaw")]
pub struct IntrinsicSpec {
    kappa: usize,
    d: usize,
    gamma0: f64,
    gamma_nu: Vec<f64>,
    anchors: Vec<SpherePoint>,
    /// Row `ν` holds the harmonic coefficients of `q_ν` (row-major, κ² × κ²).
    nil_basis: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct IntrinsicRaw {
    kappa: usize,
    d: usize,
    #[serde(default = "one")]
    gamma0: f64,
    #[serde(default)]
    gamma_nu: Option<Vec<f64>>,
    #[serde(default)]
    anchors: Option<Vec<SpherePoint>>,
    // accepted so a serialized spec reads back; always recomputed
    #[serde(default)]
    #[allow(dead_code)]
    nil_basis: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<IntrinsicRaw> for IntrinsicSpec {
    type Error = Error;

    fn try_from(raw: IntrinsicRaw) -> Result<Self> {
        IntrinsicSpec::with_parts(raw.kappa, raw.d, raw.gamma0, raw.gamma_nu, raw.anchors)
    }
}

impl IntrinsicSpec {
    /// Default anchors and `γ_ν = 1/(2√π)`.
    pub fn new(kappa: usize, d: usize, gamma0: f64) -> Result<Self> {
        Self::with_parts(kappa, d, gamma0, None, None)
    }

    pub fn with_parts(
        kappa: usize,
        d: usize,
        gamma0: f64,
        gamma_nu: Option<Vec<f64>>,
        anchors: Option<Vec<SpherePoint>>,
    ) -> Result<Self> {
        if d > 1 {
            return Err(Error::Config(format!("temporal order d = {d} not supported (0 or 1)")));
        }
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(Error::Config(format!("gamma0 {gamma0} must be positive")));
        }
        let k2 = kappa * kappa;
        let anchors = match anchors {
            Some(a) => a,
            None => default_anchors(kappa),
        };
        if anchors.len() != k2 {
            return Err(Error::Config(format!(
                "kappa = {kappa} needs {k2} anchors, got {}",
                anchors.len()
            )));
        }
        let gamma_nu = gamma_nu.unwrap_or_else(|| vec![DEFAULT_GAMMA_NU; k2]);
        if gamma_nu.len() != k2 {
            return Err(Error::Config(format!(
                "kappa = {kappa} needs {k2} gamma_nu values, got {}",
                gamma_nu.len()
            )));
        }
        if let Some(g) = gamma_nu.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::Config(format!("gamma_nu entry {g} must be positive")));
        }
        for i in 0..k2 {
            for j in 0..i {
                let dist = great_circle(&anchors[i], &anchors[j]);
                if dist <= 1e-9 {
                    return Err(Error::Config(format!(
                        "anchors {j} and {i} coincide (distance {dist:e})"
                    )));
                }
            }
        }
        let nil_basis = nil_space_basis(kappa, &anchors)?;
        Ok(Self {
            kappa,
            d,
            gamma0,
            gamma_nu,
            anchors,
            nil_basis,
        })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }
    pub fn gamma_nu(&self) -> &[f64] {
        &self.gamma_nu
    }
    pub fn anchors(&self) -> &[SpherePoint] {
        &self.anchors
    }
    pub fn nil_basis(&self) -> &[f64] {
        &self.nil_basis
    }

    /// `[q_1(p), ..., q_{κ²}(p)]`.
    pub fn nil_values(&self, p: &SpherePoint) -> Vec<f64> {
        let k2 = self.kappa * self.kappa;
        let y = harmonics_below_degree(self.kappa, p);
        (0..k2)
            .map(|nu| {
                self.nil_basis[nu * k2..(nu + 1) * k2]
                    .iter()
                    .zip(&y)
                    .map(|(c, y)| c * y)
                    .sum()
            })
            .collect()
    }
}

/// Reproducible default anchors: the north pole for `κ = 1`, a regular
/// tetrahedron with one vertex at the north pole for `κ = 2`, and a
/// Fibonacci lattice of `κ²` points beyond that.
pub fn default_anchors(kappa: usize) -> Vec<SpherePoint> {
    match kappa {
        0 => Vec::new(),
        1 => vec![SpherePoint::north_pole()],
        2 => {
            let lat = (-1.0f64 / 3.0).asin();
            let mut v = vec![SpherePoint::north_pole()];
            for k in 0..3 {
                v.push(SpherePoint::new(2.0 * PI * k as f64 / 3.0, lat).expect("valid vertex"));
            }
            v
        }
        _ => fibonacci_points(kappa * kappa),
    }
}

/// Fibonacci (golden-angle) lattice of `n` nearly equal-area points.
pub fn fibonacci_points(n: usize) -> Vec<SpherePoint> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            SpherePoint::new(golden * i as f64, z.asin()).expect("lattice point on the sphere")
        })
        .collect()
}

/// Coefficients `c` (row-major κ² × κ²) with
/// `q_ν(P) = Σ_j c[ν][j] Y_j(P)` and `q_ν(τ_μ) = δ_νμ`.
///
/// With `A[μ][j] = Y_j(τ_μ)` the interpolation conditions read `C Aᵀ = I`,
/// so `C = A⁻ᵀ`.
pub fn nil_space_basis(kappa: usize, anchors: &[SpherePoint]) -> Result<Vec<f64>> {
    let k2 = kappa * kappa;
    if anchors.len() != k2 {
        return Err(Error::Config(format!(
            "kappa = {kappa} needs {k2} anchors, got {}",
            anchors.len()
        )));
    }
    if k2 == 0 {
        return Ok(Vec::new());
    }
    let rows: Vec<Vec<f64>> = anchors.iter().map(|a| harmonics_below_degree(kappa, a)).collect();
    let a_t = Mat::<f64>::from_fn(k2, k2, |j, mu| rows[mu][j]);
    let sv = a_t.singular_values().map_err(|e| Error::Numeric(format!("{e:?}")))?;
    let (smax, smin) = sv
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition.is_nan() || condition > ANCHOR_CONDITION_LIMIT {
        return Err(Error::SingularConfiguration {
            condition,
            limit: ANCHOR_CONDITION_LIMIT,
        });
    }
    // C = (Aᵀ)⁻¹: solve Aᵀ X = I, X = C
    let identity = Mat::<f64>::identity(k2, k2);
    let c = a_t.partial_piv_lu().solve(&identity);
    let coeffs: Vec<f64> = (0..k2 * k2).map(|k| c[(k / k2, k % k2)]).collect();

    for (mu, row) in rows.iter().enumerate() {
        for nu in 0..k2 {
            let q: f64 = coeffs[nu * k2..(nu + 1) * k2].iter().zip(row).map(|(c, y)| c * y).sum();
            let target = if nu == mu { 1.0 } else { 0.0 };
            if (q - target).abs() > 1e-10 {
                return Err(Error::SingularConfiguration {
                    condition,
                    limit: ANCHOR_CONDITION_LIMIT,
                });
            }
        }
    }
    Ok(coeffs)
}
