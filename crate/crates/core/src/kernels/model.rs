use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{legendre_sequence_unchecked, legendre_unchecked, projection_rule, MAX_DEGREE};

const FOUR_PI: f64 = 4.0 * PI;

/// Stationary spatio-temporal covariance families on the sphere. Every
/// family is written in terms of `ρ = α g(h)` and `cos ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Generating function of Legendre polynomials.
    GeneratingFunction,
    /// Shape parameter τ > 0.
    NegativeBinomial,
    /// Shape parameter τ > 0.
    Multiquadric,
    SineSeries,
    /// Shape parameter η ∈ (0, 2].
    SinePower,
    /// Shape parameter τ > 0.
    AdaptedMultiquadric,
    /// Shape parameter λ > 0.
    Poisson,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::GeneratingFunction,
        Family::NegativeBinomial,
        Family::Multiquadric,
        Family::SineSeries,
        Family::SinePower,
        Family::AdaptedMultiquadric,
        Family::Poisson,
    ];

    /// Default shape parameter, or `None` for families without one.
    pub fn default_shape(self) -> Option<f64> {
        match self {
            Family::GeneratingFunction | Family::SineSeries => None,
            _ => Some(1.0),
        }
    }

    fn check_shape(self, shape: f64) -> Result<()> {
        let ok = match self {
            Family::SinePower => shape > 0.0 && shape <= 2.0,
            _ => shape > 0.0,
        };
        if ok && shape.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("shape {shape} out of range for {self:?}")))
        }
    }
}

/// A parametric family with its parameters: `α ∈ (0,1)`, temporal decay
/// `β > 0` of `g(h) = exp(-β|h|)`, scale `γ > 0` and the family shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelSpecRaw")]
pub struct ModelSpec {
    family: Family,
    alpha: f64,
    beta: f64,
    gamma: f64,
    shape: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpecRaw {
    family: Family,
    alpha: f64,
    beta: f64,
    #[serde(default = "one")]
    gamma: f64,
    #[serde(default)]
    shape: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<ModelSpecRaw> for ModelSpec {
    type Error = Error;

    fn try_from(raw: ModelSpecRaw) -> Result<Self> {
        ModelSpec::new(raw.family, raw.alpha, raw.beta, raw.gamma, raw.shape)
    }
}

impl ModelSpec {
    /// Validates every parameter; a missing shape falls back to the family default.
    pub fn new(family: Family, alpha: f64, beta: f64, gamma: f64, shape: Option<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha {alpha} outside (0, 1)")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("beta {beta} must be positive")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma {gamma} must be positive")));
        }
        let shape = match (family.default_shape(), shape) {
            (None, Some(s)) => {
                return Err(Error::Config(format!("{family:?} takes no shape parameter (got {s})")))
            }
            (None, None) => None,
            (Some(default), given) => {
                let s = given.unwrap_or(default);
                family.check_shape(s)?;
                Some(s)
            }
        };
        Ok(Self {
            family,
            alpha,
            beta,
            gamma,
            shape,
        })
    }

    /// Generating-function model with `γ = 1`.
    pub fn generating_function(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::GeneratingFunction, alpha, beta, 1.0, None)
    }

    pub fn family(&self) -> Family {
        self.family
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn shape(&self) -> Option<f64> {
        self.shape
    }

    /// `g(h) = exp(-β|h|)`.
    pub fn temporal_g(&self, h: i64) -> f64 {
        (-self.beta * h.unsigned_abs() as f64).exp()
    }

    /// `a_l(h) = α^l g(h)^l`.
    pub fn a_ell(&self, l: usize, h: i64) -> f64 {
        self.rho(h).powi(l as i32)
    }

    fn rho(&self, h: i64) -> f64 {
        self.alpha * self.temporal_g(h)
    }

    /// Closed-form stationary covariance `φ0(ψ, h)`.
    pub fn phi0(&self, psi: f64, h: i64) -> f64 {
        self.phi0_cos(psi.cos(), h)
    }

    pub(crate) fn phi0_cos(&self, c: f64, h: i64) -> f64 {
        let g = self.temporal_g(h);
        let rho = self.alpha * g;
        let a = self.alpha;
        let scale = self.gamma / FOUR_PI;
        let shape = self.shape.unwrap_or(1.0);
        match self.family {
            Family::GeneratingFunction => {
                let den = 1.0 - 2.0 * rho * c + rho * rho;
                scale * (1.0 - rho * rho) / (den * den.sqrt())
            }
            Family::NegativeBinomial => scale * ((1.0 - a) / (1.0 - rho * c)).powf(shape),
            Family::Multiquadric => {
                scale * (1.0 - a).powf(2.0 * shape) / (1.0 + a * a - 2.0 * rho * c).powf(shape)
            }
            Family::SineSeries => scale * (rho * c - 1.0).exp() * (1.0 + rho * c) / 2.0,
            Family::SinePower => {
                let half = 0.5 * shape;
                scale * (1.0 - 2f64.powf(-half) * (1.0 - rho * c).powf(half))
            }
            Family::AdaptedMultiquadric => {
                let num = (1.0 + a * g * g) * (1.0 - a);
                let den = 1.0 + rho * rho - 2.0 * rho * c;
                scale * (num / den).powf(shape)
            }
            Family::Poisson => self.gamma * (shape * (c * rho - 1.0)).exp(),
        }
    }

    /// Truncated Legendre expansion `γ Σ_{l=0}^{L} (2l+1)/(4π) a_l(h) P_l(cos ψ)`.
    ///
    /// This is the series of the generating-function family; it serves as
    /// the independent reference for [`ModelSpec::phi0`] on that family.
    pub fn phi0_series(&self, psi: f64, h: i64, degree: usize) -> Result<f64> {
        if degree > MAX_DEGREE {
            return Err(Error::Config(format!(
                "series degree {degree} exceeds the maximum supported degree {MAX_DEGREE}"
            )));
        }
        let p = legendre_sequence_unchecked(degree, psi.cos().clamp(-1.0, 1.0));
        let rho = self.rho(h);
        let mut sum = 0.0;
        let mut rho_l = 1.0;
        for (l, pl) in p.iter().enumerate() {
            sum += (2.0 * l as f64 + 1.0) / FOUR_PI * rho_l * pl;
            rho_l *= rho;
        }
        Ok(self.gamma * sum)
    }

    /// Legendre coefficient `B_l(h)` in `φ0 = Σ (2l+1)/(4π) B_l(h) P_l(cos ψ)`.
    ///
    /// Closed form `γ a_l(h)` for the generating function; the other
    /// families are projected with a 128-point Gauss-Legendre rule.
    pub fn band_coefficient(&self, l: usize, h: i64) -> f64 {
        if self.family == Family::GeneratingFunction {
            return self.gamma * self.a_ell(l, h);
        }
        let (nodes, weights) = projection_rule();
        let integral: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(&c, &w)| w * self.phi0_cos(c, h) * legendre_unchecked(l, c))
            .sum();
        2.0 * PI * integral
    }
}
