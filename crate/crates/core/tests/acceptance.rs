//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use sphirf::commands::{run_fit, run_simulate};
use sphirf::config::{Overrides, ResolvedConfig};
use sphirf::estimation::{fit, replicate_fits, BinSpec, FitOptions, MoMTable, PairScanner};
use sphirf::Execution;
use sphirf::field::{difference_time, simulate_irf, truncate_harmonics, uniform_points, GridSpec};
use sphirf::io::{read_field_csv, write_field_csv};
use sphirf::kernels::{icf_value, CovarianceModel, Family, IntrinsicSpec, ModelSpec};
use sphirf::order::{m_criterion, m_from_tables};
use sphirf::sphere::{
    gauss_legendre_nodes, great_circle, legendre_p, real_spherical_harmonic, HarmonicIndex, SpherePoint,
};

const TABLE_ROWS: [(f64, f64); 5] = [(0.90, 0.05), (0.80, 0.10), (0.70, 0.20), (0.60, 0.35), (0.20, 0.10)];
const DESK_LOCATIONS: usize = 300;
const DESK_TIMES: usize = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(n: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let pass = o.pass && elapsed < budget;
    println!(
        "criterion {n} [{}] {name}: {}; {:.1}s (budget {}s)",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn dot(p: &SpherePoint, q: &SpherePoint) -> f64 {
    let (u, v) = (p.unit_vector(), q.unit_vector());
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn special_functions() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let pairs: Vec<_> = (0..100).map(|_| (uniform_points(1, &mut rng)[0], uniform_points(1, &mut rng)[0])).collect();
    let mut addition = 0.0f64;
    for l in 0..=15usize {
        let idx: Vec<_> = (-(l as i64)..=l as i64).map(|m| HarmonicIndex::new(l, m).unwrap()).collect();
        for (p, q) in &pairs {
            let sum: f64 = idx
                .iter()
                .map(|&i| real_spherical_harmonic(i, p).unwrap() * real_spherical_harmonic(i, q).unwrap())
                .sum();
            let expected = (2 * l + 1) as f64 / (4.0 * PI) * legendre_p(l, dot(p, q).clamp(-1.0, 1.0)).unwrap();
            addition = addition.max((sum - expected).abs());
        }
    }

    let (x, w) = gauss_legendre_nodes(64);
    let n_lon = 128;
    let mut nodes = Vec::new();
    for (xi, wi) in x.iter().zip(&w) {
        for k in 0..n_lon {
            let lon = 2.0 * PI * k as f64 / n_lon as f64;
            nodes.push((SpherePoint::new(lon, xi.asin()).unwrap(), wi * 2.0 * PI / n_lon as f64));
        }
    }
    let basis = HarmonicIndex::below_degree(9);
    let values: Vec<Vec<f64>> = basis
        .iter()
        .map(|&i| nodes.iter().map(|(p, _)| real_spherical_harmonic(i, p).unwrap()).collect())
        .collect();
    let mut ortho = 0.0f64;
    for a in 0..basis.len() {
        for b in a..basis.len() {
            let g: f64 = nodes.iter().enumerate().map(|(k, (_, wk))| wk * values[a][k] * values[b][k]).sum();
            ortho = ortho.max((g - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    outcome(
        addition <= 1e-10 && ortho <= 1e-8,
        format!("addition max err {addition:.2e} (tol 1e-10), orthonormality max err {ortho:.2e} (tol 1e-8)"),
    )
}

fn series_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for (alpha, beta) in [(0.8, 0.1), (0.9, 0.05), (0.2, 0.1)] {
        let spec = ModelSpec::generating_function(alpha, beta).unwrap();
        for k in 0..=31 {
            let psi = 0.1 * k as f64;
            for h in 0..=6 {
                let series = spec.phi0_series(psi, h, 2000).unwrap();
                worst = worst.max((spec.phi0(psi, h) - series).abs());
            }
        }
    }
    outcome(worst <= 1e-8, format!("max |closed - series| {worst:.2e} (tol 1e-8)"))
}

fn psd() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(33);
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..25 {
        let family = Family::ALL[rng.random_range(0..Family::ALL.len())];
        let alpha = rng.random_range(0.05..0.95);
        let beta = rng.random_range(0.02..1.5);
        let shape = family.default_shape().map(|_| match family {
            Family::SinePower => rng.random_range(0.2..2.0),
            _ => rng.random_range(0.3..3.0),
        });
        let spec = ModelSpec::new(family, alpha, beta, 1.0, shape).unwrap();
        let intrinsic = IntrinsicSpec::new(rng.random_range(0..=2), rng.random_range(0..=1), 1.0).unwrap();
        let points = uniform_points(60, &mut rng);
        let times: Vec<i64> = (0..60).map(|_| rng.random_range(1..=10)).collect();
        let model = CovarianceModel::with_max_lag(spec, intrinsic, 10);
        let r = faer::Mat::<f64>::from_fn(60, 60, |i, j| {
            model.full_covariance(&points[i], &points[j], times[i], times[j]).unwrap()
        });
        let eig = r.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_diag = (0..60).map(|i| r[(i, i)]).fold(0.0, f64::max);
        let rel = min / max_diag;
        worst = worst.min(rel);
        if rel < -1e-8 {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures}/25 specs below -1e-8; worst min eigenvalue / max diagonal {worst:.2e}"),
    )
}

fn exact_inversion() -> Outcome {
    let mut worst = 0.0f64;
    for (alpha, beta) in TABLE_ROWS {
        let spec = ModelSpec::generating_function(alpha, beta).unwrap();
        let intrinsic = IntrinsicSpec::new(1, 1, 1.0).unwrap();
        let table =
            MoMTable::from_fn(BinSpec::default(), |psi, h| icf_value(&spec, &intrinsic, psi, h as i64)).unwrap();
        let r = fit(&table, 1, &FitOptions::default()).unwrap();
        let err = (r.alpha_hat - alpha).abs().max((r.beta_hat - beta).abs()).max((r.gamma0_hat - 1.0).abs());
        worst = worst.max(err);
    }
    outcome(worst <= 1e-4, format!("max parameter error over 5 rows {worst:.2e} (tol 1e-4)"))
}

fn desk_scale() -> Outcome {
    let spec = ModelSpec::generating_function(0.8, 0.1).unwrap();
    let intrinsic = IntrinsicSpec::new(1, 1, 1.0).unwrap();
    let reps = 100;
    let seeds: Vec<u64> = (5_000..5_000 + reps as u64).collect();
    let grid = GridSpec::new(DESK_LOCATIONS, DESK_TIMES, 0);
    let est: Vec<[f64; 3]> =
        replicate_fits(&spec, &intrinsic, &grid, &seeds, &BinSpec::default(), &FitOptions::default(), Execution::default())
            .into_iter()
            .map(|r| {
                let r = r.unwrap();
                [r.alpha_hat, r.beta_hat, r.gamma0_hat]
            })
            .collect();
    let mean = |k: usize| est.iter().map(|e| e[k]).sum::<f64>() / reps as f64;
    let sd = |k: usize| {
        let m = mean(k);
        (est.iter().map(|e| (e[k] - m).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
    };
    let (a, b, g) = (mean(0), mean(1), mean(2));
    outcome(
        (0.77..=0.83).contains(&a) && (0.05..=0.20).contains(&b) && (0.85..=1.15).contains(&g),
        format!(
            "means alpha {a:.4} (sd {:.4}) in [0.77,0.83], beta {b:.4} (sd {:.4}) in [0.05,0.20], gamma0 {g:.4} (sd {:.4}) in [0.85,1.15]",
            sd(0),
            sd(1),
            sd(2)
        ),
    )
}

fn split_half() -> Outcome {
    let spec = ModelSpec::generating_function(0.8, 0.1).unwrap();
    let intrinsic = IntrinsicSpec::new(1, 1, 1.0).unwrap();
    let bins = BinSpec::default();
    let n_bins = bins.n_distance_bins() * bins.n_lags();
    let mut rng = ChaCha20Rng::seed_from_u64(66);
    let (mut populated, mut agreeing) = (0usize, 0usize);
    for seed in 0..20u64 {
        let field = simulate_irf(&spec, &intrinsic, &GridSpec::new(DESK_LOCATIONS, DESK_TIMES, 6_000 + seed)).unwrap();
        let prepared = difference_time(&truncate_harmonics(&field, 1).unwrap(), 1).unwrap();
        let scanner = PairScanner::new(&prepared, &bins);
        // per bin and half: count, sum, sum of squares
        let mut acc = vec![[[0.0f64; 3]; 2]; n_bins];
        for i in 0..prepared.n_locations() {
            scanner.visit(i, |k, prod| {
                let half = &mut acc[k][usize::from(rng.random::<bool>())];
                half[0] += 1.0;
                half[1] += prod;
                half[2] += prod * prod;
            });
        }
        for halves in &acc {
            if halves.iter().any(|h| h[0] < 2.0) {
                continue;
            }
            let stats: Vec<(f64, f64, f64)> = halves
                .iter()
                .map(|h| {
                    let m = h[1] / h[0];
                    (h[0], m, (h[2] - h[0] * m * m) / (h[0] - 1.0))
                })
                .collect();
            let se = (stats[0].2 / stats[0].0 + stats[1].2 / stats[1].0).sqrt();
            populated += 1;
            if (stats[0].1 - stats[1].1).abs() < 4.0 * se {
                agreeing += 1;
            }
        }
    }
    let share = agreeing as f64 / populated.max(1) as f64;
    outcome(
        populated > 0 && share >= 0.95,
        format!("{agreeing}/{populated} populated bins within 4 pooled SE ({:.1}%, need >= 95%)", 100.0 * share),
    )
}

fn order_selection() -> Outcome {
    let spec = ModelSpec::generating_function(0.8, 0.1).unwrap();
    let bins = BinSpec::default();
    let rate = |kappa: usize, base: u64| {
        let intrinsic = IntrinsicSpec::new(kappa, kappa, 1.0).unwrap();
        (0..20u64)
            .filter(|s| {
                let field =
                    simulate_irf(&spec, &intrinsic, &GridSpec::new(DESK_LOCATIONS, DESK_TIMES, base + s)).unwrap();
                m_criterion(&field, kappa, 3, &bins).unwrap().kappa_hat == kappa
            })
            .count()
    };
    let irf11 = rate(1, 7_000);
    let irf00 = rate(0, 8_000);

    let mut identity = 0.0f64;
    for kappa_d in [0, 1] {
        let tables: Vec<MoMTable> = (0..=4)
            .map(|n| {
                let intrinsic = IntrinsicSpec::new(n, kappa_d, 1.0).unwrap();
                MoMTable::from_fn(bins.clone(), |psi, h| icf_value(&spec, &intrinsic, psi, h as i64)).unwrap()
            })
            .collect();
        for m in m_from_tables(&tables).unwrap() {
            identity = identity.max(m.abs());
        }
    }
    outcome(
        irf11 >= 16 && irf00 >= 16 && identity <= 1e-10,
        format!(
            "IRF(1,1) -> 1 in {irf11}/20 (need >= 16), IRF(0,0) -> 0 in {irf00}/20 (need >= 16), noise-free max M {identity:.2e} (tol 1e-10)"
        ),
    )
}

fn determinism_and_io() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let field_path = dir.path().join("field.csv");
    let raw = serde_json::json!({
        "model": {"family": "generating_function", "alpha": 0.8, "beta": 0.1},
        "intrinsic": {"kappa": 1, "d": 1, "gamma0": 1.0},
        "grid": {"n_locations": 120, "time_points": 8, "seed": 42},
        "input": field_path,
        "out": dir.path(),
    });
    let cfg = ResolvedConfig::from_value(raw, &Overrides::default()).unwrap();
    let snapshot = |cfg: &ResolvedConfig| {
        let mut files = run_simulate(cfg).unwrap();
        files.extend(run_fit(cfg).unwrap());
        files.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>()
    };
    let first = snapshot(&cfg);
    let second = snapshot(&cfg);
    let identical = first == second;

    let field = simulate_irf(
        &ModelSpec::generating_function(0.6, 0.3).unwrap(),
        &IntrinsicSpec::new(2, 0, 1.0).unwrap(),
        &GridSpec::new(80, 6, 9),
    )
    .unwrap();
    let path = dir.path().join("roundtrip.csv");
    write_field_csv(&field, &path).unwrap();
    let back = read_field_csv(&path).unwrap();
    let value_err = field.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let location_err = field
        .locations()
        .iter()
        .zip(back.locations())
        .map(|(p, q)| great_circle(p, q))
        .fold(0.0, f64::max);
    let same_shape = back.times() == field.times() && back.location_ids() == field.location_ids();
    outcome(
        identical && same_shape && value_err <= 1e-12 && location_err <= 1e-12,
        format!(
            "two runs byte-identical: {identical}; roundtrip value err {value_err:.1e}, location err {location_err:.1e} (tol 1e-12)"
        ),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "special functions", secs(10), special_functions),
        run(2, "series oracle", secs(5), series_oracle),
        run(3, "positive semidefinite covariance", secs(60), psd),
        run(4, "exact inversion of the fit", secs(30), exact_inversion),
        run(5, "desk-scale parameter recovery", secs(1800), desk_scale),
        run(6, "split-half stationarity", secs(600), split_half),
        run(7, "order selection", secs(900), order_selection),
        run(8, "determinism and field I/O", secs(60), determinism_and_io),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
