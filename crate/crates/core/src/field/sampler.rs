use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt::factor::{cholesky_in_place, cholesky_in_place_scratch};
use faer::Mat;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::covariance::CovarianceMatrix;

/// Relative jitter levels tried after a failed plain factorization,
/// as multiples of the mean diagonal.
pub const JITTER_LADDER: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Draws from `N(0, Σ)` through a Cholesky factor computed once.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    factor: Mat<f64>,
    jitter: f64,
}

impl GaussianSampler {
    pub fn new(matrix: &CovarianceMatrix) -> Result<Self> {
        Self::with_execution(matrix, Execution::default())
    }

    /// Factors `matrix`, escalating the diagonal jitter along
    /// [`JITTER_LADDER`] until the factorization succeeds.
    pub fn with_execution(matrix: &CovarianceMatrix, exec: Execution) -> Result<Self> {
        let n = matrix.dim();
        let mean_diag = if n == 0 { 0.0 } else { matrix.mean_diagonal() };
        let a = matrix.as_mat_ref();
        let levels = std::iter::once(0.0).chain(JITTER_LADDER.iter().map(|r| r * mean_diag));
        for jitter in levels {
            let mut l = Mat::<f64>::zeros(n, n);
            l.copy_from_triangular_lower(a);
            for i in 0..n {
                l[(i, i)] += jitter;
            }
            let par = exec.faer_par();
            let mut mem = MemBuffer::new(cholesky_in_place_scratch::<f64>(n, par, Default::default()));
            let stack = MemStack::new(&mut mem);
            if cholesky_in_place(l.as_mut(), Default::default(), par, stack, Default::default()).is_ok() {
                for j in 0..n {
                    for i in 0..j {
                        l[(i, j)] = 0.0;
                    }
                }
                return Ok(Self { factor: l, jitter });
            }
        }
        Err(Error::NotPositiveSemidefinite {
            max_jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// Absolute jitter that was added to the diagonal (0 if none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `L z` with `z` standard normal drawn from `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.dim();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut x = vec![0.0; n];
        for (j, zj) in z.iter().enumerate() {
            let col = self.factor.col_as_slice(j);
            for i in j..n {
                x[i] += col[i] * zj;
            }
        }
        x
    }

    pub fn draw_seeded(&self, seed: u64) -> Vec<f64> {
        self.draw(&mut ChaCha20Rng::seed_from_u64(seed))
    }
}

/// One draw from `N(0, matrix)` with a ChaCha20 generator seeded by `seed`.
/// Returns the draw and the jitter used.
pub fn sample_gaussian(matrix: &CovarianceMatrix, seed: u64) -> Result<(Vec<f64>, f64)> {
    let sampler = GaussianSampler::new(matrix)?;
    Ok((sampler.draw_seeded(seed), sampler.jitter()))
}
