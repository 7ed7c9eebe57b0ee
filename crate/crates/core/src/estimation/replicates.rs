use crate::error::Result;
use crate::estimation::fit::{fit, FitOptions, FitResult};
use crate::estimation::mom::{mom_estimate_with, BinSpec};
use crate::exec::Execution;
use crate::field::{difference_time, simulate_irf_with, truncate_harmonics, AssemblyOptions, GridSpec};
use crate::kernels::{IntrinsicSpec, ModelSpec};

/// Simulation study: for every seed, simulates on `grid` (with that seed,
/// so locations are fresh per replicate), truncates to order κ, differences
/// `d` times, estimates moments and fits. `exec` spreads the replicates;
/// each replicate itself runs sequentially, so results match for both
/// strategies.
pub fn replicate_fits(
    spec: &ModelSpec,
    intrinsic: &IntrinsicSpec,
    grid: &GridSpec,
    seeds: &[u64],
    bins: &BinSpec,
    options: &FitOptions,
    exec: Execution,
) -> Vec<Result<FitResult>> {
    let inner = AssemblyOptions {
        exec: Execution::Sequential,
        ..AssemblyOptions::default()
    };
    exec.map_indexed(seeds.len(), |k| {
        let grid = GridSpec {
            seed: seeds[k],
            ..grid.clone()
        };
        let field = simulate_irf_with(spec, intrinsic, &grid, inner)?;
        let field = difference_time(&truncate_harmonics(&field, intrinsic.kappa())?, intrinsic.d())?;
        let mom = mom_estimate_with(&field, bins, Execution::Sequential)?;
        fit(&mom, intrinsic.kappa(), options)
    })
}
