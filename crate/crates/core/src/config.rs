//! Run configuration: one JSON document per run. Flag overrides are merged
//! into the raw document before it is validated, so overridden values pass
//! through the same checks as file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::estimation::{BinSpec, FitOptions};
use crate::field::{GridSpec, DEFAULT_ROW_CAP};
use crate::kernels::{IntrinsicSpec, ModelSpec};
use crate::order::DEFAULT_DROP_RATIO;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderConfig {
    #[serde(default = "default_n_max")]
    pub n_max: i64,
    #[serde(default = "default_drop_ratio")]
    pub drop_ratio: f64,
}

fn default_n_max() -> i64 {
    3
}

fn default_drop_ratio() -> f64 {
    DEFAULT_DROP_RATIO
}

impl Default for OrderConfig {
    fn default() -> Self {
        Self {
            n_max: default_n_max(),
            drop_ratio: default_drop_ratio(),
        }
    }
}

/// Parameters used to add a `theoretical` column to fit curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrueParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma0: f64,
}

/// Grid of the `curves` export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurveGrid {
    pub psi_max: f64,
    pub psi_step: f64,
    pub max_lag: u64,
}

impl Default for CurveGrid {
    fn default() -> Self {
        Self {
            psi_max: std::f64::consts::PI,
            psi_step: 0.05,
            max_lag: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub intrinsic: Option<IntrinsicSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub bins: Option<BinSpec>,
    #[serde(default)]
    pub fit: Option<FitOptions>,
    #[serde(default)]
    pub order: Option<OrderConfig>,
    #[serde(default)]
    pub curves: Option<CurveGrid>,
    #[serde(default)]
    pub true_params: Option<TrueParams>,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub cap: Option<usize>,
}

/// Scalar command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub kappa: Option<usize>,
    pub d: Option<usize>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

/// A validated configuration together with the resolved JSON document it
/// was built from.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub config: RunConfig,
    pub raw: Value,
}

fn object<'a>(root: &'a mut Map<String, Value>, key: &str) -> Result<&'a mut Map<String, Value>> {
    root.entry(key.to_string())
        .or_insert_with(|| Value::Object(Map::new()))
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("`{key}` must be an object")))
}

impl ResolvedConfig {
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let raw = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Map::new()),
        };
        Self::from_value(raw, overrides)
    }

    pub fn from_value(mut raw: Value, overrides: &Overrides) -> Result<Self> {
        let root = raw
            .as_object_mut()
            .ok_or_else(|| Error::Config("configuration must be a JSON object".into()))?;
        if let Some(seed) = overrides.seed {
            object(root, "grid")?.insert("seed".into(), seed.into());
        }
        if overrides.kappa.is_some() || overrides.d.is_some() {
            let intr = object(root, "intrinsic")?;
            if let Some(k) = overrides.kappa {
                intr.insert("kappa".into(), k.into());
            }
            if let Some(d) = overrides.d {
                intr.insert("d".into(), d.into());
            }
            if !intr.contains_key("kappa") {
                intr.insert("kappa".into(), 0.into());
            }
            if !intr.contains_key("d") {
                intr.insert("d".into(), 0.into());
            }
        }
        if let Some(out) = &overrides.out {
            root.insert("out".into(), Value::String(out.display().to_string()));
        }
        if let Some(input) = &overrides.input {
            root.insert("input".into(), Value::String(input.display().to_string()));
        }
        let config: RunConfig =
            serde_json::from_value(raw.clone()).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(fit) = &config.fit {
            fit.validate()?;
        }
        if let Some(order) = &config.order {
            if order.n_max < 0 {
                return Err(Error::Config(format!("n_max must be non-negative, got {}", order.n_max)));
            }
            if !(order.drop_ratio > 1.0 && order.drop_ratio.is_finite()) {
                return Err(Error::Config(format!("drop_ratio {} must exceed 1", order.drop_ratio)));
            }
        }
        if let Some(c) = &config.curves {
            if !(c.psi_step > 0.0 && c.psi_max >= 0.0 && c.psi_max <= std::f64::consts::PI + 1e-12) {
                return Err(Error::Config("curves need psi_step > 0 and psi_max in [0, pi]".into()));
            }
        }
        if let Some(tp) = &config.true_params {
            ModelSpec::generating_function(tp.alpha, tp.beta)?;
            if !(tp.gamma0 > 0.0 && tp.gamma0.is_finite()) {
                return Err(Error::Config("true gamma0 must be positive".into()));
            }
        }
        if config.cap == Some(0) {
            return Err(Error::Config("cap must be positive".into()));
        }
        Ok(Self { config, raw })
    }

    fn missing(key: &str) -> Error {
        Error::Config(format!("configuration needs `{key}`"))
    }

    pub fn model(&self) -> Result<ModelSpec> {
        self.config.model.ok_or_else(|| Self::missing("model"))
    }

    pub fn intrinsic(&self) -> Result<IntrinsicSpec> {
        self.config.intrinsic.clone().ok_or_else(|| Self::missing("intrinsic"))
    }

    pub fn grid(&self) -> Result<GridSpec> {
        self.config.grid.clone().ok_or_else(|| Self::missing("grid"))
    }

    pub fn bins(&self) -> BinSpec {
        self.config.bins.clone().unwrap_or_default()
    }

    pub fn fit_options(&self) -> FitOptions {
        self.config.fit.unwrap_or_default()
    }

    pub fn order(&self) -> OrderConfig {
        self.config.order.clone().unwrap_or_default()
    }

    pub fn input(&self) -> Result<&Path> {
        self.config.input.as_deref().ok_or_else(|| Self::missing("input"))
    }

    pub fn out(&self) -> Result<&Path> {
        self.config.out.as_deref().ok_or_else(|| Self::missing("out"))
    }

    pub fn cap(&self) -> usize {
        self.config.cap.unwrap_or(DEFAULT_ROW_CAP)
    }
}
