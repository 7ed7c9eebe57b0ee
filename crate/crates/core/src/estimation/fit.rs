use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::bfgs::{minimize, BfgsOptions};
use crate::estimation::mom::MoMTable;
use crate::kernels::ModelSpec;
use crate::sphere::legendre_sequence_unchecked;

/// Starting `(α, β)` pairs, tried in this order.
pub const START_GRID: [(f64, f64); 5] = [(0.3, 0.1), (0.3, 0.5), (0.6, 0.1), (0.6, 0.5), (0.8, 0.1)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Number of entries of [`START_GRID`] to use (1 to 5).
    pub starts: usize,
    pub max_iter: usize,
    /// Gradient-norm tolerance.
    pub tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            max_iter: 500,
            tol: 1e-8,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(1..=START_GRID.len()).contains(&self.starts) {
            return Err(Error::Config(format!("starts must be in 1..=5, got {}", self.starts)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol {} must be positive", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub gamma0_hat: f64,
    /// Sum of squared residuals over non-missing bins.
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Index into [`START_GRID`] of the winning start.
    pub start_index: usize,
}

/// Intrinsic covariance of the generating-function model with `γ = 1`,
/// without the `γ0` factor.
fn gf_icf_core(alpha: f64, beta: f64, kappa: usize, psi: f64, h: u64) -> f64 {
    let rho = alpha * (-beta * h as f64).exp();
    let c = psi.cos();
    let den = 1.0 - 2.0 * rho * c + rho * rho;
    let phi0 = (1.0 - rho * rho) / (den * den.sqrt()) / (4.0 * PI);
    if kappa == 0 {
        return phi0;
    }
    let p = legendre_sequence_unchecked(kappa - 1, c.clamp(-1.0, 1.0));
    let mut band = 0.0;
    let mut rho_l = 1.0;
    for (l, pl) in p.iter().enumerate() {
        band += (2.0 * l as f64 + 1.0) / (4.0 * PI) * rho_l * pl;
        rho_l *= rho;
    }
    phi0 - band
}

/// `Σ_{i,j} [φ̂(ψ_i, h_j) − γ0 φ_κ(ψ_i, h_j; α, β)]²` over non-missing bins,
/// in index order.
pub fn loss(alpha: f64, beta: f64, gamma0: f64, mom: &MoMTable, kappa: usize) -> f64 {
    mom.entries()
        .map(|(_, _, psi, h, est)| {
            let r = est - gamma0 * gf_icf_core(alpha, beta, kappa, psi, h);
            r * r
        })
        .sum()
}

/// `(α, β) ↦ ModelSpec` sanity check that the closed form used by [`loss`]
/// agrees with the kernel module. Exposed for tests.
#[doc(hidden)]
pub fn model_icf_core(spec: &ModelSpec, kappa: usize, psi: f64, h: u64) -> f64 {
    gf_icf_core(spec.alpha(), spec.beta(), kappa, psi, h)
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn unpack(x: &[f64; 3]) -> (f64, f64, f64) {
    (logistic(x[0]), x[1].exp(), x[2].exp())
}

/// Least-squares fit of `(α, β, γ0)` by BFGS in the unconstrained
/// coordinates `α = logistic(u)`, `β = exp(v)`, `γ0 = exp(w)`, from each
/// start of [`START_GRID`]. The objective is divided by `Σ φ̂²`, which makes
/// the fit equivariant under rescaling the table.
pub fn fit(mom: &MoMTable, kappa: usize, options: &FitOptions) -> Result<FitResult> {
    options.validate()?;
    let n = mom.non_missing();
    if n < 3 {
        return Err(Error::Precondition(format!(
            "fitting needs at least 3 non-missing bins, the table has {n}"
        )));
    }
    let norm = {
        let s: f64 = mom.entries().map(|e| e.4 * e.4).sum();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let objective = |x: &[f64; 3]| {
        let (a, b, g) = unpack(x);
        if !(a > 0.0 && a < 1.0 && b > 0.0 && b.is_finite() && g > 0.0 && g.is_finite()) {
            return f64::INFINITY;
        }
        let v = loss(a, b, g, mom, kappa) / norm;
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let bfgs = BfgsOptions {
        max_iter: options.max_iter,
        grad_tol: options.tol,
        rel_decrease_tol: 1e-12,
    };
    let mut best: Option<FitResult> = None;
    for (k, &(a0, b0)) in START_GRID.iter().take(options.starts).enumerate() {
        // optimal γ0 for the starting shape
        let (num, den) = mom.entries().fold((0.0, 0.0), |(num, den), (_, _, psi, h, est)| {
            let f = gf_icf_core(a0, b0, kappa, psi, h);
            (num + est * f, den + f * f)
        });
        let g0 = if num > 0.0 && den > 0.0 { num / den } else { 1.0 };
        let x0 = [(a0 / (1.0 - a0)).ln(), b0.ln(), g0.ln()];
        let out = minimize(objective, x0, bfgs);
        if !out.f.is_finite() {
            continue;
        }
        let (a, b, g) = unpack(&out.x);
        let candidate = FitResult {
            alpha_hat: a,
            beta_hat: b,
            gamma0_hat: g,
            loss: loss(a, b, g, mom, kappa),
            iterations: out.iterations,
            converged: out.converged,
            start_index: k,
        };
        if best.is_none_or(|b| candidate.loss < b.loss) {
            best = Some(candidate);
        }
    }
    best.ok_or_else(|| Error::Numeric("every fit start produced a non-finite objective".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::mom::BinSpec;
    use crate::kernels::{icf_value, IntrinsicSpec};

    fn exact_table(alpha: f64, beta: f64, gamma0: f64, kappa: usize) -> MoMTable {
        let spec = ModelSpec::generating_function(alpha, beta).unwrap();
        let intrinsic = IntrinsicSpec::new(kappa, 1, gamma0).unwrap();
        MoMTable::from_fn(BinSpec::default(), |psi, h| icf_value(&spec, &intrinsic, psi, h as i64)).unwrap()
    }

    #[test]
    fn closed_form_matches_kernel_module() {
        for kappa in 0..4 {
            let spec = ModelSpec::generating_function(0.7, 0.2).unwrap();
            let intrinsic = IntrinsicSpec::new(kappa, 0, 1.0).unwrap();
            for psi in [0.0, 0.4, 1.3, 3.0] {
                for h in 0..4u64 {
                    let a = gf_icf_core(0.7, 0.2, kappa, psi, h);
                    let b = icf_value(&spec, &intrinsic, psi, h as i64);
                    assert!((a - b).abs() < 1e-13, "kappa {kappa} psi {psi} h {h}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn loss_examples() {
        let t = exact_table(0.8, 0.1, 1.0, 1);
        assert!(loss(0.8, 0.1, 1.0, &t, 1) < 1e-20);
        assert!(loss(0.8, 0.1, 1.1, &t, 1) > 0.0);
        let mut brute = 0.0;
        for (i, &psi) in t.bins().psi_centers().iter().enumerate() {
            for (j, &h) in t.bins().lags().iter().enumerate() {
                let rho = 0.5 * (-0.1 * h as f64).exp();
                let c = psi.cos();
                let model = (1.0 - rho * rho) / (1.0 - 2.0 * rho * c + rho * rho).powf(1.5) / (4.0 * PI)
                    - 1.0 / (4.0 * PI);
                brute += (t.estimate(i, j).unwrap() - model).powi(2);
            }
        }
        let got = loss(0.5, 0.1, 1.0, &t, 1);
        assert!((got - brute).abs() <= 1e-12 * brute);
    }

    #[test]
    fn exact_inversion() {
        let t = exact_table(0.8, 0.1, 1.0, 1);
        let r = fit(&t, 1, &FitOptions::default()).unwrap();
        assert!((r.alpha_hat - 0.8).abs() < 1e-4, "{r:?}");
        assert!((r.beta_hat - 0.1).abs() < 1e-4, "{r:?}");
        assert!((r.gamma0_hat - 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn precondition_on_sparse_table() {
        let bins = BinSpec::new(vec![0.1, 0.3], 0.1, vec![0, 1], false).unwrap();
        let t = MoMTable::new(bins, vec![Some(1.0), None, Some(0.5), None], vec![3, 0, 2, 0]).unwrap();
        assert!(matches!(fit(&t, 1, &FitOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn deterministic() {
        let t = exact_table(0.6, 0.3, 2.0, 1).scaled(1.01);
        let a = fit(&t, 1, &FitOptions::default()).unwrap();
        let b = fit(&t, 1, &FitOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
