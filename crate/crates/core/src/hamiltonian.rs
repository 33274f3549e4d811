//! Second-quantized Hamiltonian `H = H0 + g V` on a fixed-N Fock basis.
//!
//! `H0 = sum_n E_n b_n^† b_n` is diagonal. The contact interaction is
//! `V = 1/2 sum_{ijkl} I_ijkl b_i^† b_j^† b_l b_k`, assembled without the
//! coupling so that `g` can be applied when the parts are combined.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{pair_string_in_place, FockBasis};
use crate::orbitals::{energy, InteractionTensor};

/// Many-body operator in coordinate form, sorted by `(row, col)` with
/// duplicates merged. Both triangles are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
    row_ptr: Vec<usize>,
    symmetric: bool,
}

impl SparseOperator {
    /// Sorts and merges `(row, col, value)` triplets. Exact zeros left after
    /// merging are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, f64)>, symmetric: bool) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|&&(r, c, _)| r >= dim || c >= dim) {
            return Err(Error::DimensionMismatch(format!(
                "entry ({r}, {c}) outside a {dim}x{dim} operator"
            )));
        }
        triplets.sort_by_key(|t| (t.0, t.1));

        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        let rows: Vec<usize> = merged.iter().map(|t| t.0).collect();
        let cols: Vec<usize> = merged.iter().map(|t| t.1).collect();
        let values: Vec<f64> = merged.iter().map(|t| t.2).collect();

        let mut row_ptr = vec![0; dim + 1];
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            dim,
            rows,
            cols,
            values,
            row_ptr,
            symmetric,
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new(), true).expect("empty operator")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Whether the operator was declared symmetric at assembly.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.values)
            .map(|((&r, &c), &v)| (r, c, v))
    }

    /// Stored value at `(row, col)`, zero when absent.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[span.clone()].binary_search(&col) {
            Ok(p) => self.values[span.start + p],
            Err(_) => 0.0,
        }
    }

    /// Largest `|A_rc - A_cr|` over stored entries.
    pub fn max_asymmetry(&self) -> f64 {
        self.entries()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let span = self.row_ptr[r]..self.row_ptr[r + 1];
            *out = self.cols[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&c, &v)| v * x[c])
                .sum();
        });
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: f64, other: &SparseOperator, beta: f64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot combine operators of dimension {} and {}",
                self.dim, other.dim
            )));
        }
        let triplets = self
            .entries()
            .map(|(r, c, v)| (r, c, alpha * v))
            .chain(other.entries().map(|(r, c, v)| (r, c, beta * v)))
            .collect();
        Self::from_triplets(self.dim, triplets, self.symmetric && other.symmetric)
    }

    /// Debug dump with columns `row,col,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row,col,value")?;
        for (r, c, v) in self.entries() {
            writeln!(out, "{r},{c},{v:e}")?;
        }
        Ok(())
    }
}

/// Particle number, mode cutoff and contact coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub particles: usize,
    pub modes: usize,
    pub coupling: f64,
}

impl ModelParams {
    pub fn new(particles: usize, modes: usize, coupling: f64) -> Result<Self> {
        let params = Self {
            particles,
            modes,
            coupling,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::InvalidParameter("mode cutoff must be at least 1".into()));
        }
        if !self.coupling.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling must be finite, got {}",
                self.coupling
            )));
        }
        Ok(())
    }

    pub fn is_attractive(&self) -> bool {
        self.coupling < 0.0
    }
}

/// Diagonal `sum_i (i + 1/2) n_i`.
pub fn assemble_h0(basis: &FockBasis) -> SparseOperator {
    let triplets = basis
        .states()
        .iter()
        .enumerate()
        .filter_map(|(p, s)| {
            let e: f64 = s.counts().iter().enumerate().map(|(i, &n)| energy(i) * n as f64).sum();
            (e != 0.0).then_some((p, p, e))
        })
        .collect();
    SparseOperator::from_triplets(basis.len(), triplets, true).expect("diagonal in range")
}

/// Matrix of `V / g` on the basis.
///
/// Terms are grouped by unordered creation and annihilation pairs: bosonic
/// operators commute, so each unordered pair `{k, l}` with `k != l` stands
/// for two ordered terms of the full sum.
pub fn assemble_interaction(basis: &FockBasis, tensor: &InteractionTensor) -> Result<SparseOperator> {
    let m = basis.mode_count();
    if tensor.mode_count() != m {
        return Err(Error::DimensionMismatch(format!(
            "tensor covers {} modes, basis has {m}",
            tensor.mode_count()
        )));
    }
    let pairs: Vec<(usize, usize, f64)> = (0..m)
        .flat_map(|a| (a..m).map(move |b| (a, b, if a == b { 1.0 } else { 2.0 })))
        .collect();

    let columns: Vec<Vec<(usize, usize, f64)>> = basis
        .states()
        .par_iter()
        .enumerate()
        .map(|(col, state)| {
            let mut out = Vec::new();
            let mut scratch = state.counts().to_vec();
            for &(k, l, mult_kl) in &pairs {
                for &(i, j, mult_ij) in &pairs {
                    if (i + j + k + l) % 2 == 1 {
                        continue;
                    }
                    let value = tensor.get(i, j, k, l);
                    if value == 0.0 {
                        continue;
                    }
                    scratch.copy_from_slice(state.counts());
                    let Some(coeff) = pair_string_in_place(i, j, k, l, &mut scratch) else {
                        // annihilation part is independent of (i, j)
                        break;
                    };
                    let row = basis.index_of(&scratch).expect("pair string conserves particle number");
                    out.push((row, col, 0.5 * mult_ij * mult_kl * value * coeff));
                }
            }
            out
        })
        .collect();

    SparseOperator::from_triplets(basis.len(), columns.into_iter().flatten().collect(), true)
}

/// `H0 + g V`.
pub fn assemble_total(params: &ModelParams, basis: &FockBasis, tensor: &InteractionTensor) -> Result<SparseOperator> {
    params.validate()?;
    if params.particles != basis.particles() || params.modes != basis.mode_count() {
        return Err(Error::DimensionMismatch(format!(
            "parameters (N={}, M={}) do not match basis (N={}, M={})",
            params.particles,
            params.modes,
            basis.particles(),
            basis.mode_count()
        )));
    }
    let h0 = assemble_h0(basis);
    if params.coupling == 0.0 {
        return Ok(h0);
    }
    let v = assemble_interaction(basis, tensor)?;
    h0.linear_combination(1.0, &v, params.coupling)
}
