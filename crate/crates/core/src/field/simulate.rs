use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::exec::Execution;
use crate::field::covariance::{assemble_covariance_with, AssemblyOptions};
use crate::field::grid::{sample_locations, GridSpec};
use crate::field::sampled::{FieldMeta, SampledField};
use crate::field::sampler::GaussianSampler;
use crate::kernels::{CovarianceModel, IntrinsicSpec, ModelSpec};
use crate::sphere::SpherePoint;

/// Covariance assembled and factored once for a fixed set of locations,
/// ready for repeated draws.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: ModelSpec,
    intrinsic: IntrinsicSpec,
    locations: Vec<SpherePoint>,
    time_points: usize,
    sampler: GaussianSampler,
}

impl Simulator {
    pub fn new(
        spec: &ModelSpec,
        intrinsic: &IntrinsicSpec,
        locations: Vec<SpherePoint>,
        time_points: usize,
        options: AssemblyOptions,
    ) -> Result<Self> {
        let model = CovarianceModel::with_max_lag(*spec, intrinsic.clone(), time_points.saturating_sub(1));
        let cov = assemble_covariance_with(&model, &locations, time_points, options)?;
        let sampler = GaussianSampler::with_execution(&cov, options.exec)?;
        Ok(Self {
            spec: *spec,
            intrinsic: intrinsic.clone(),
            locations,
            time_points,
            sampler,
        })
    }

    pub fn jitter(&self) -> f64 {
        self.sampler.jitter()
    }

    pub fn locations(&self) -> &[SpherePoint] {
        &self.locations
    }

    /// One field drawn with `rng`, on times `1..=T`.
    pub fn draw_with<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<SampledField> {
        let values = self.sampler.draw(rng);
        let field = SampledField::from_grid_values(self.locations.clone(), self.time_points, values)?;
        Ok(field.with_meta(FieldMeta {
            spec: Some(self.spec),
            intrinsic: Some(self.intrinsic.clone()),
            grid: None,
            seed: None,
            jitter_used: self.jitter(),
            transforms: Vec::new(),
        }))
    }

    pub fn draw(&self, seed: u64) -> Result<SampledField> {
        let field = self.draw_with(&mut ChaCha20Rng::seed_from_u64(seed))?;
        let mut meta = field.meta().clone();
        meta.seed = Some(seed);
        Ok(field.with_meta(meta))
    }
}

/// Exact simulation of the field on `grid`: one ChaCha20 generator seeded
/// with `grid.seed` first places the locations, then draws the normals.
pub fn simulate_irf(spec: &ModelSpec, intrinsic: &IntrinsicSpec, grid: &GridSpec) -> Result<SampledField> {
    simulate_irf_with(spec, intrinsic, grid, AssemblyOptions::default())
}

pub fn simulate_irf_with(
    spec: &ModelSpec,
    intrinsic: &IntrinsicSpec,
    grid: &GridSpec,
    options: AssemblyOptions,
) -> Result<SampledField> {
    grid.validate(intrinsic.d())?;
    let mut rng = ChaCha20Rng::seed_from_u64(grid.seed);
    let locations = sample_locations(grid, &mut rng)?;
    let sim = Simulator::new(spec, intrinsic, locations, grid.time_points, options)?;
    let field = sim.draw_with(&mut rng)?;
    let mut meta = field.meta().clone();
    meta.grid = Some(grid.clone());
    meta.seed = Some(grid.seed);
    Ok(field.with_meta(meta))
}

/// Simulation with sequential execution; used where bitwise output must not
/// depend on the thread pool.
pub fn simulate_irf_sequential(spec: &ModelSpec, intrinsic: &IntrinsicSpec, grid: &GridSpec) -> Result<SampledField> {
    simulate_irf_with(
        spec,
        intrinsic,
        grid,
        AssemblyOptions {
            exec: Execution::Sequential,
            ..AssemblyOptions::default()
        },
    )
}
