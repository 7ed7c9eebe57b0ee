use faer::MatRef;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernels::{CovarianceModel, IntrinsicSpec, ModelSpec};
use crate::sphere::{great_circle, SpherePoint};

/// Default limit on the number of rows `n · T` of an assembled covariance.
pub const DEFAULT_ROW_CAP: usize = 6000;

#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    pub cap: usize,
    pub exec: Execution,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_ROW_CAP,
            exec: Execution::default(),
        }
    }
}

/// Dense symmetric matrix in column-major order. Row `i · T + (t − 1)`
/// belongs to location `i` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn from_column_major(dim: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data has the wrong length");
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.dim + row]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mat_ref(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.dim, self.dim)
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_diagonal(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum::<f64>() / self.dim as f64
    }
}

/// Covariance of the field at `locations × {1, ..., T}` with entries `R(P, Q, t, s)`.
pub fn assemble_covariance(
    spec: &ModelSpec,
    intrinsic: &IntrinsicSpec,
    locations: &[SpherePoint],
    time_points: usize,
) -> Result<CovarianceMatrix> {
    let model = CovarianceModel::with_max_lag(*spec, intrinsic.clone(), time_points.saturating_sub(1));
    assemble_covariance_with(&model, locations, time_points, AssemblyOptions::default())
}

/// Block-structured assembly: one `T × T` block per location pair, computed
/// from the lag sequence of that pair. Column blocks are filled
/// independently (in parallel when requested) and the lower triangle is
/// mirrored from the upper one, so the result is exactly symmetric and does
/// not depend on the worker count.
pub fn assemble_covariance_with(
    model: &CovarianceModel,
    locations: &[SpherePoint],
    time_points: usize,
    options: AssemblyOptions,
) -> Result<CovarianceMatrix> {
    let n = locations.len();
    let t = time_points;
    let dim = n
        .checked_mul(t)
        .ok_or(Error::CapExceeded { required: usize::MAX, cap: options.cap })?;
    if dim > options.cap {
        return Err(Error::CapExceeded {
            required: dim,
            cap: options.cap,
        });
    }
    if dim == 0 {
        return Ok(CovarianceMatrix::from_column_major(0, Vec::new()));
    }
    let intrinsic = model.intrinsic();
    let k2 = intrinsic.kappa().pow(2);
    let g0 = intrinsic.gamma0();
    let gnu = intrinsic.gamma_nu();
    let anchors = intrinsic.anchors();
    let tt = t * t;
    let exec = options.exec;

    let q: Vec<Vec<f64>> = locations.iter().map(|p| intrinsic.nil_values(p)).collect();
    // anchor_blocks[i][ν] = φ_κ(ψ(P_i, τ_ν), ·, ·)
    let anchor_blocks: Vec<Vec<Vec<f64>>> = exec.map_indexed(n, |i| {
        anchors
            .iter()
            .map(|a| model.block(great_circle(&locations[i], a), t))
            .collect()
    });
    let anchor_pairs: Vec<Vec<f64>> = (0..k2 * k2)
        .map(|k| model.block(great_circle(&anchors[k / k2.max(1)], &anchors[k % k2.max(1)]), t))
        .collect();
    // weighted[i][μ] = Σ_ν γ_ν q_ν(P_i) φ_κ(ψ(τ_ν, τ_μ), ·, ·)
    let weighted: Vec<Vec<Vec<f64>>> = exec.map_indexed(n, |i| {
        (0..k2)
            .map(|mu| {
                let mut acc = vec![0.0; tt];
                for nu in 0..k2 {
                    let w = gnu[nu] * q[i][nu];
                    for (a, b) in acc.iter_mut().zip(&anchor_pairs[nu * k2 + mu]) {
                        *a += w * b;
                    }
                }
                acc
            })
            .collect()
    });

    let mut data = vec![0.0; dim * dim];
    exec.for_each_chunk_mut(&mut data, t * dim, |j, chunk| {
        for i in 0..=j {
            let mut blk = model.block(great_circle(&locations[i], &locations[j]), t);
            for v in blk.iter_mut() {
                *v *= g0 * g0;
            }
            let mut constant = 0.0;
            for nu in 0..k2 {
                let w_cross = gnu[nu] * q[j][nu];
                let ai = &anchor_blocks[i][nu];
                let aj = &anchor_blocks[j][nu];
                let w_i = g0 * gnu[nu] * q[i][nu];
                let w_j = g0 * gnu[nu] * q[j][nu];
                let wb = &weighted[i][nu];
                for k in 0..tt {
                    blk[k] += w_cross * wb[k] - w_i * aj[k] - w_j * ai[k];
                }
                constant += gnu[nu] * gnu[nu] * q[i][nu] * q[j][nu];
            }
            for a in 0..t {
                let b_start = if i == j { a } else { 0 };
                for b in b_start..t {
                    chunk[b * dim + i * t + a] = blk[a * t + b] + constant;
                }
            }
        }
    });
    for c in 0..dim {
        for r in c + 1..dim {
            data[c * dim + r] = data[r * dim + c];
        }
    }
    Ok(CovarianceMatrix::from_column_major(dim, data))
}
