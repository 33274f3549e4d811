//! Exact diagonalization and ground-state observables.
//!
//! Bases up to [`DEFAULT_DENSE_THRESHOLD`] states are diagonalized densely.
//! Larger ones go through a restarted block Krylov iteration with a seeded
//! random start block, so repeated runs give identical results.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, StateVector};
use crate::hamiltonian::SparseOperator;
use crate::orbitals::phi_all;

pub const DEFAULT_DENSE_THRESHOLD: usize = 5000;
pub const DEFAULT_DENSE_TOL: f64 = 1e-10;
pub const DEFAULT_ITERATIVE_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0x5eed_b05e;

/// Which eigensolver path to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverPath {
    /// Dense below the threshold, iterative above.
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Residual bound `||H v - λ v||`; `None` picks the path default.
    pub tol: Option<f64>,
    pub dense_threshold: usize,
    pub path: SolverPath,
    pub seed: u64,
    pub max_restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: None,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            path: SolverPath::Auto,
            seed: DEFAULT_SEED,
            max_restarts: 200,
        }
    }
}

impl SolverOptions {
    fn uses_dense(&self, dim: usize) -> bool {
        match self.path {
            SolverPath::Dense => true,
            SolverPath::Iterative => false,
            SolverPath::Auto => dim <= self.dense_threshold,
        }
    }
}

/// Lowest eigenpairs in ascending order.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
    pub residual_norms: Vec<f64>,
}

impl SpectrumResult {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> &StateVector {
        &self.eigenvectors[0]
    }

    /// `E_1 - E_0`, when at least two levels were computed.
    pub fn first_gap(&self) -> Option<f64> {
        (self.eigenvalues.len() > 1).then(|| self.eigenvalues[1] - self.eigenvalues[0])
    }
}

/// Lowest eigenpair of `h`.
pub fn solve_ground(h: &SparseOperator, basis: &Arc<FockBasis>, options: &SolverOptions) -> Result<SpectrumResult> {
    solve_lowest_k(h, basis, 1, options)
}

/// The `k` lowest eigenpairs of `h`. Within a degenerate cluster the vectors
/// are an arbitrary orthonormal basis of the eigenspace.
pub fn solve_lowest_k(
    h: &SparseOperator,
    basis: &Arc<FockBasis>,
    k: usize,
    options: &SolverOptions,
) -> Result<SpectrumResult> {
    let dim = h.dim();
    if dim != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {dim} on a basis of {} states",
            basis.len()
        )));
    }
    if k == 0 || k > dim {
        return Err(Error::InvalidParameter(format!(
            "requested {k} eigenpairs of a {dim}-dimensional operator"
        )));
    }

    let (values, vectors, residuals) = if options.uses_dense(dim) {
        let tol = options.tol.unwrap_or(DEFAULT_DENSE_TOL);
        let (values, vectors) = dense_lowest(h, k);
        let residuals: Vec<f64> = values.iter().zip(&vectors).map(|(&l, v)| residual(h, l, v)).collect();
        if let Some(worst) = residuals.iter().copied().find(|&r| r > tol) {
            return Err(Error::NonConvergence {
                what: "dense eigensolver",
                iterations: 1,
                residual: worst,
            });
        }
        (values, vectors, residuals)
    } else {
        let tol = options.tol.unwrap_or(DEFAULT_ITERATIVE_TOL);
        block_krylov_lowest(h, k, tol, options.seed, options.max_restarts)?
    };

    let eigenvectors = vectors
        .into_iter()
        .map(|v| StateVector::new(basis.clone(), v))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult {
        eigenvalues: values,
        eigenvectors,
        residual_norms: residuals,
    })
}

fn residual(h: &SparseOperator, lambda: f64, v: &[f64]) -> f64 {
    h.apply_vec(v)
        .iter()
        .zip(v)
        .map(|(hv, x)| (hv - lambda * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn dense_lowest(h: &SparseOperator, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order
        .into_iter()
        .take(k)
        .map(|i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            fix_sign(&mut v);
            (eig.eigenvalues[i], v)
        })
        .unzip()
}

/// Makes the largest-magnitude component positive.
fn fix_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Orthogonalizes `v` against `basis` twice, then normalizes. Returns false
/// when nothing independent is left.
fn orthonormalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> bool {
    let start = dot(v, v).sqrt();
    if start == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
    let norm = dot(v, v).sqrt();
    if norm <= 1e-10 * start {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

type Eigenpairs = (Vec<f64>, Vec<Vec<f64>>, Vec<f64>);

/// Restarted block Krylov iteration with Rayleigh-Ritz extraction. The
/// block is wider than `k` so small degenerate clusters are resolved.
fn block_krylov_lowest(h: &SparseOperator, k: usize, tol: f64, seed: u64, max_restarts: usize) -> Result<Eigenpairs> {
    let n = h.dim();
    let block = (k + 2).min(n);
    let cap = n.min((12 * block).max(90));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut start: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut best = f64::INFINITY;

    for _ in 0..max_restarts {
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(cap);
        let mut hq: Vec<Vec<f64>> = Vec::with_capacity(cap);
        let mut pending = std::mem::take(&mut start);
        while q.len() < cap && !pending.is_empty() {
            let mut fresh = Vec::new();
            for mut v in pending.drain(..) {
                if q.len() >= cap {
                    break;
                }
                if orthonormalize_against(&mut v, &q) {
                    let hv = h.apply_vec(&v);
                    q.push(v);
                    hq.push(hv.clone());
                    fresh.push(hv);
                }
            }
            pending = fresh;
        }

        let m = q.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = 0.5 * (dot(&q[i], &hq[j]) + dot(&q[j], &hq[i]));
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let keep = block.min(m);
        let mut values = Vec::with_capacity(keep);
        let mut vectors = Vec::with_capacity(keep);
        let mut residuals = Vec::with_capacity(keep);
        for &idx in order.iter().take(keep) {
            let theta = eig.eigenvalues[idx];
            let s = eig.eigenvectors.column(idx);
            let mut y = vec![0.0; n];
            let mut hy = vec![0.0; n];
            for (c, (qv, hqv)) in s.iter().zip(q.iter().zip(&hq)) {
                axpy(*c, qv, &mut y);
                axpy(*c, hqv, &mut hy);
            }
            let r = hy
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - theta * b).powi(2))
                .sum::<f64>()
                .sqrt();
            values.push(theta);
            vectors.push(y);
            residuals.push(r);
        }

        let worst = residuals.iter().take(k).copied().fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= tol {
            values.truncate(k);
            vectors.truncate(k);
            residuals.truncate(k);
            for v in vectors.iter_mut() {
                fix_sign(v);
            }
            return Ok((values, vectors, residuals));
        }
        start = vectors;
    }

    Err(Error::NonConvergence {
        what: "block Krylov eigensolver",
        iterations: max_restarts,
        residual: best,
    })
}

/// `rho_ij = <b_i^† b_j>` in a many-body state.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBodyDensityMatrix {
    matrix: DMatrix<f64>,
    particles: usize,
}

impl OneBodyDensityMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>, particles: usize) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("density matrix must be square".into()));
        }
        Ok(Self { matrix, particles })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Occupations of the natural orbitals, descending.
    pub fn natural_occupations(&self) -> Vec<f64> {
        let mut occ: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        occ.sort_by(|a, b| b.total_cmp(a));
        occ
    }

    /// Penrose-Onsager fraction: largest natural occupation over N.
    pub fn condensate_fraction(&self) -> Result<f64> {
        if self.particles == 0 {
            return Err(Error::InvalidParameter(
                "condensate fraction is undefined for zero particles".into(),
            ));
        }
        Ok(self.natural_occupations()[0] / self.particles as f64)
    }

    /// `n(x) = sum_ij phi_i(x) phi_j(x) rho_ij` at each position.
    pub fn density_profile(&self, xs: &[f64]) -> Vec<f64> {
        let m = self.matrix.nrows();
        xs.iter()
            .map(|&x| {
                let phi = nalgebra::DVector::from_vec(phi_all(m, x));
                phi.dot(&(&self.matrix * &phi))
            })
            .collect()
    }
}

/// One-body density matrix of a many-body state.
pub fn obdm(state: &StateVector) -> OneBodyDensityMatrix {
    let basis = state.basis();
    let m = basis.mode_count();
    let amps = state.amplitudes();
    let mut rho = DMatrix::zeros(m, m);
    let mut scratch = vec![0u32; m];
    for (p, s) in basis.states().iter().enumerate() {
        let a = amps[p];
        if a == 0.0 {
            continue;
        }
        let counts = s.counts();
        for j in 0..m {
            let nj = counts[j];
            if nj == 0 {
                continue;
            }
            for i in 0..m {
                scratch.copy_from_slice(counts);
                scratch[j] -= 1;
                scratch[i] += 1;
                let coeff = (nj as f64).sqrt() * (scratch[i] as f64).sqrt();
                let q = basis.index_of(&scratch).expect("hopping conserves particle number");
                rho[(i, j)] += amps[q] * a * coeff;
            }
        }
    }
    let sym = 0.5 * (&rho + rho.transpose());
    OneBodyDensityMatrix {
        matrix: sym,
        particles: basis.particles(),
    }
}

/// Density of a many-body state at the given positions.
pub fn density_profile(state: &StateVector, xs: &[f64]) -> Vec<f64> {
    obdm(state).density_profile(xs)
}
