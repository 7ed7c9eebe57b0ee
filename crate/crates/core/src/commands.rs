//! The pipeline steps behind each subcommand. Every JSON output embeds the
//! resolved configuration under `config`.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::json;

use crate::config::ResolvedConfig;
use crate::error::{Error, Result};
use crate::estimation::{fit, mom_estimate, MoMTable};
use crate::exec::Execution;
use crate::field::{difference_time, simulate_irf_with, truncate_harmonics, AssemblyOptions, SampledField};
use crate::io::{read_field_csv, write_field_csv, write_json, write_text};
use crate::kernels::{CovarianceModel, IntrinsicSpec, ModelSpec};
use crate::order::m_criterion_with;

fn prepare_out(cfg: &ResolvedConfig) -> Result<PathBuf> {
    let out = cfg.out()?.to_path_buf();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    Ok(out)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Simulates a field; writes `field.csv` and `field.json`.
pub fn run_simulate(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>> {
    let spec = cfg.model()?;
    let intrinsic = cfg.intrinsic()?;
    let grid = cfg.grid()?;
    let out = prepare_out(cfg)?;
    let options = AssemblyOptions {
        cap: cfg.cap(),
        ..AssemblyOptions::default()
    };
    let field = simulate_irf_with(&spec, &intrinsic, &grid, options)?;
    let csv = out.join("field.csv");
    let meta = out.join("field.json");
    write_field_csv(&field, &csv)?;
    write_json(
        &json!({
            "config": cfg.raw,
            "spec": spec,
            "intrinsic": intrinsic,
            "grid": grid,
            "seed": grid.seed,
            "jitter_used": field.meta().jitter_used,
        }),
        &meta,
    )?;
    Ok(vec![csv, meta])
}

/// Reads the input field and applies truncation of order κ then
/// differencing of order d.
fn prepared_field(cfg: &ResolvedConfig) -> Result<(SampledField, usize, usize)> {
    let (kappa, d) = cfg
        .config
        .intrinsic
        .as_ref()
        .map_or((0, 0), |i| (i.kappa(), i.d()));
    let field = read_field_csv(cfg.input()?)?;
    let field = difference_time(&truncate_harmonics(&field, kappa)?, d)?;
    Ok((field, kappa, d))
}

fn table_json(mom: &MoMTable) -> serde_json::Value {
    json!({
        "bins": mom.bins(),
        "estimates": mom.estimates(),
        "counts": mom.counts(),
    })
}

/// Moment table of the truncated and differenced input; writes `mom.json`
/// and `mom.csv`.
pub fn run_mom(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>> {
    let (field, _, _) = prepared_field(cfg)?;
    let out = prepare_out(cfg)?;
    let mom = mom_estimate(&field, &cfg.bins())?;
    let mut csv = String::from("psi,h,estimate,count\n");
    for (i, &psi) in mom.bins().psi_centers().iter().enumerate() {
        for (j, &h) in mom.bins().lags().iter().enumerate() {
            let est = mom.estimate(i, j).map(fmt).unwrap_or_default();
            writeln!(csv, "{},{h},{est},{}", fmt(psi), mom.count(i, j)).expect("string write");
        }
    }
    let json_path = out.join("mom.json");
    let csv_path = out.join("mom.csv");
    let mut doc = table_json(&mom);
    doc["config"] = cfg.raw.clone();
    write_json(&doc, &json_path)?;
    write_text(&csv, &csv_path)?;
    Ok(vec![json_path, csv_path])
}

/// Fits `(α, β, γ0)`; writes `fit.json` and `curves.csv`.
pub fn run_fit(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>> {
    let (field, kappa, d) = prepared_field(cfg)?;
    let out = prepare_out(cfg)?;
    let mom = mom_estimate(&field, &cfg.bins())?;
    let options = cfg.fit_options();
    let result = fit(&mom, kappa, &options)?;

    let fitted = CovarianceModel::new(
        ModelSpec::generating_function(result.alpha_hat, result.beta_hat)?,
        IntrinsicSpec::new(kappa, d, result.gamma0_hat)?,
    );
    let truth = match cfg.config.true_params {
        Some(tp) => Some(CovarianceModel::new(
            ModelSpec::generating_function(tp.alpha, tp.beta)?,
            IntrinsicSpec::new(kappa, d, tp.gamma0)?,
        )),
        None => None,
    };
    let mut csv = String::from(if truth.is_some() {
        "psi,h,mom,fitted,theoretical\n"
    } else {
        "psi,h,mom,fitted\n"
    });
    for (i, &psi) in mom.bins().psi_centers().iter().enumerate() {
        for (j, &h) in mom.bins().lags().iter().enumerate() {
            let m = mom.estimate(i, j).map(fmt).unwrap_or_default();
            write!(csv, "{},{h},{m},{}", fmt(psi), fmt(fitted.icf_value(psi, h as i64))).expect("string write");
            if let Some(t) = &truth {
                write!(csv, ",{}", fmt(t.icf_value(psi, h as i64))).expect("string write");
            }
            csv.push('\n');
        }
    }
    let mut doc = json!({
        "alpha_hat": result.alpha_hat,
        "beta_hat": result.beta_hat,
        "gamma0_hat": result.gamma0_hat,
        "loss": result.loss,
        "iterations": result.iterations,
        "converged": result.converged,
        "start_index": result.start_index,
        "kappa": kappa,
        "d": d,
        "fit_options": options,
    });
    let table = table_json(&mom);
    doc["bins"] = table["bins"].clone();
    doc["counts"] = table["counts"].clone();
    doc["estimates"] = table["estimates"].clone();
    doc["config"] = cfg.raw.clone();
    let json_path = out.join("fit.json");
    let csv_path = out.join("curves.csv");
    write_json(&doc, &json_path)?;
    write_text(&csv, &csv_path)?;
    Ok(vec![json_path, csv_path])
}

/// Order-selection report; writes `order.json` and `order.csv`.
pub fn run_select_order(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>> {
    let order = cfg.order();
    let n_max = usize::try_from(order.n_max)
        .map_err(|_| Error::Config(format!("n_max must be non-negative, got {}", order.n_max)))?;
    let d = cfg.config.intrinsic.as_ref().map_or(0, |i| i.d());
    let field = read_field_csv(cfg.input()?)?;
    let out = prepare_out(cfg)?;
    let report = m_criterion_with(&field, d, n_max, &cfg.bins(), order.drop_ratio, Execution::default())?;
    let mut csv = String::from("n,logM\n");
    for (n, lm) in report.n_values.iter().zip(&report.log_m) {
        writeln!(csv, "{n},{}", lm.map(fmt).unwrap_or_default()).expect("string write");
    }
    let mut doc = json!({
        "n": report.n_values,
        "M": report.m,
        "logM": report.log_m,
        "kappa_hat": report.kappa_hat,
        "drop_ratio": report.drop_ratio,
        "rule": report.rule,
        "d": d,
    });
    doc["config"] = cfg.raw.clone();
    let json_path = out.join("order.json");
    let csv_path = out.join("order.csv");
    write_json(&doc, &json_path)?;
    write_text(&csv, &csv_path)?;
    Ok(vec![json_path, csv_path])
}

/// Theoretical curves `φ0` and the intrinsic covariance over a `(ψ, h)` grid;
/// writes `curves.csv`.
pub fn run_curves(cfg: &ResolvedConfig) -> Result<Vec<PathBuf>> {
    let spec = cfg.model()?;
    let intrinsic = match &cfg.config.intrinsic {
        Some(i) => i.clone(),
        None => IntrinsicSpec::new(0, 0, 1.0)?,
    };
    let grid = cfg.config.curves.unwrap_or_default();
    let out = prepare_out(cfg)?;
    let model = CovarianceModel::with_max_lag(spec, intrinsic, grid.max_lag as usize);
    let steps = (grid.psi_max / grid.psi_step + 1e-9).floor() as usize;
    let mut csv = String::from("psi,h,phi0,icf\n");
    for h in 0..=grid.max_lag as i64 {
        for k in 0..=steps {
            let psi = (k as f64 * grid.psi_step).min(std::f64::consts::PI);
            writeln!(csv, "{},{h},{},{}", fmt(psi), fmt(spec.phi0(psi, h)), fmt(model.icf_value(psi, h)))
                .expect("string write");
        }
    }
    let path = out.join("curves.csv");
    write_text(&csv, &path)?;
    Ok(vec![path])
}
