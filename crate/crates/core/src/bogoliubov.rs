//! Condensate orbital, quadratic fluctuation Hamiltonian and its
//! symplectic diagonalization.
//!
//! # Derivation
//!
//! Rotate the trap modes `a_i` onto an orthonormal basis made of the
//! condensate orbital `c` and fluctuation vectors `e_p` (`p = 1 .. M-1`):
//! `a_i = c_i b_0 + sum_p (e_p)_i b_p`. In that basis the Hamiltonian keeps
//! its form with `h -> W^T h W` and the overlap tensor rotated on every
//! index. Replacing `b_0` and `b_0^†` by `sqrt(n0)` and collecting powers of
//! the fluctuation operators gives:
//!
//! * order 0: `n0 c.h.c + (g/2) n0^2 I(c,c,c,c)`;
//! * order 1: `sqrt(n0) sum_p f_p (b_p + b_p^†)` with
//!   `f_p = e_p . (h c + g n0 K(c))`, `K(c)_i = sum_jkl I_ijkl c_j c_k c_l`;
//! * order 2: `sum_pq (h_pq + 2 g n0 K_pq) b_p^† b_q +
//!   (g n0 / 2) sum_pq K_pq (b_p^† b_q^† + b_p b_q)` with
//!   `K_pq = sum_ijkl I_ijkl (e_p)_i (e_q)_j c_k c_l`.
//!
//! The factor 2 in the normal term counts the four equivalent placements
//! of the two condensate indices.
//!
//! The first-order coefficients vanish exactly when `h c + g n0 K(c)` is
//! parallel to `c`, i.e. when `c` is stationary for
//! `E[c] = c.h.c + (g n0 / 2) I(c,c,c,c)` on the unit sphere. The Lagrange
//! multiplier of that constraint is the chemical potential `mu`. Working
//! with `H - mu N` shifts the diagonal of the normal block by `-mu`, which
//! also accounts for particles moved out of the condensate at fixed total N.
//!
//! Third and fourth orders are dropped. With `n0` set to the interaction
//! weight `kappa` (N by default, N-1 optionally):
//!
//! ```text
//! A  = h_fluct + 2 g kappa K - mu 1
//! B  = g kappa K
//! c0 = N E[c]
//! ```
//!
//! and the quadratic Hamiltonian `c0 + sum A_pq b_p^† b_q
//! + 1/2 sum B_pq (b_p^† b_q^† + b_p b_q)` is diagonalized by the positive
//! branch of `[[A, B], [-B, -A]]`, giving
//! `E_bog = c0 + 1/2 (sum_j eps_j - tr A)` and the depletion
//! `sum_j |v_j|^2`.
//!
//! # Symplectic reduction
//!
//! With `x = u + v` and `y = u - v` the paired eigenproblem splits into
//! `(A - B) y = eps x` and `(A + B) x = eps y`. When `A + B = L L^T` is
//! positive definite, `L^T (A - B) L z = eps^2 z` is a symmetric problem and
//! `x = L^{-T} z`, `y = L z / eps`. Since `|u|^2 - |v|^2 = x . y = |z|^2 / eps`,
//! scaling `|z|^2 = eps` yields the symplectic normalization. Negative
//! `eps^2` means an imaginary frequency. If only `A - B` is definite the
//! roles of the two blocks swap.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::ModelParams;
use crate::orbitals::{energy, InteractionTensor};

pub const DEFAULT_GP_TOL: f64 = 1e-10;
pub const DEFAULT_GP_MAX_ITER: usize = 100_000;
pub const DEFAULT_GOLDSTONE_TOL: f64 = 1e-8;

/// How many partners each condensate particle interacts with in the
/// c-number energy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InteractionWeight {
    /// `kappa = N`.
    #[default]
    Particles,
    /// `kappa = N - 1`, the exact pair count of a product state.
    ParticlesMinusOne,
}

impl InteractionWeight {
    pub fn kappa(self, particles: usize) -> f64 {
        match self {
            InteractionWeight::Particles => particles as f64,
            InteractionWeight::ParticlesMinusOne => particles.saturating_sub(1) as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub weight: InteractionWeight,
}

impl Default for GpOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_GP_TOL,
            max_iter: DEFAULT_GP_MAX_ITER,
            weight: InteractionWeight::default(),
        }
    }
}

/// Kinetic, trap and interaction parts of the per-particle energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub trap: f64,
    pub interaction: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.trap + self.interaction
    }

    /// `d/dλ E[sqrt(λ) ψ(λx)]` at `λ = 1`; zero for a stationary orbital in
    /// a complete basis.
    pub fn virial_residual(&self) -> f64 {
        2.0 * self.kinetic - 2.0 * self.trap + self.interaction
    }
}

/// The c-number energy per particle
/// `E[c] = sum_n E_n c_n^2 + (g kappa / 2) sum I_ijkl c_i c_j c_k c_l`.
#[derive(Clone, Debug)]
pub struct MeanFieldFunctional<'a> {
    tensor: &'a InteractionTensor,
    strength: f64,
}

impl<'a> MeanFieldFunctional<'a> {
    pub fn new(params: &ModelParams, tensor: &'a InteractionTensor, weight: InteractionWeight) -> Result<Self> {
        Self::with_kappa(params, tensor, weight.kappa(params.particles))
    }

    pub fn with_kappa(params: &ModelParams, tensor: &'a InteractionTensor, kappa: f64) -> Result<Self> {
        params.validate()?;
        if tensor.mode_count() != params.modes {
            return Err(Error::DimensionMismatch(format!(
                "tensor covers {} modes, parameters ask for {}",
                tensor.mode_count(),
                params.modes
            )));
        }
        Ok(Self {
            tensor,
            strength: params.coupling * kappa,
        })
    }

    pub fn modes(&self) -> usize {
        self.tensor.mode_count()
    }

    /// `g * kappa`.
    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn energy(&self, c: &[f64]) -> f64 {
        let one_body: f64 = c.iter().enumerate().map(|(n, x)| energy(n) * x * x).sum();
        one_body + 0.5 * self.strength * self.tensor.contract_four(c)
    }

    /// `h c + g kappa K(c)`, half the gradient of `E`.
    pub fn action(&self, c: &[f64]) -> Vec<f64> {
        let k = self.tensor.contract_three(c);
        c.iter()
            .zip(k)
            .enumerate()
            .map(|(n, (x, kn))| energy(n) * x + self.strength * kn)
            .collect()
    }

    pub fn gradient(&self, c: &[f64]) -> Vec<f64> {
        self.action(c).into_iter().map(|a| 2.0 * a).collect()
    }

    pub fn parts(&self, c: &[f64]) -> EnergyParts {
        let (kinetic, trap) = kinetic_and_trap(c);
        EnergyParts {
            kinetic,
            trap,
            interaction: 0.5 * self.strength * self.tensor.contract_four(c),
        }
    }
}

/// `<p^2/2>` and `<x^2/2>` for an orbital given by oscillator coefficients.
/// Both are tridiagonal in steps of two:
/// `<n|x^2/2|n+2> = +sqrt((n+1)(n+2))/4`, `<n|p^2/2|n+2>` the negative.
fn kinetic_and_trap(c: &[f64]) -> (f64, f64) {
    let mut diag = 0.0;
    let mut off = 0.0;
    for (n, x) in c.iter().enumerate() {
        diag += 0.5 * energy(n) * x * x;
        if n + 2 < c.len() {
            let nf = n as f64;
            off += 2.0 * ((nf + 1.0) * (nf + 2.0)).sqrt() / 4.0 * x * c[n + 2];
        }
    }
    (diag - off, diag + off)
}

/// Condensate orbital over the trap modes.
#[derive(Clone, Debug, PartialEq)]
pub struct CondensateOrbital {
    pub coeffs: Vec<f64>,
    pub mu: f64,
    pub energy_per_particle: f64,
    pub converged: bool,
    /// `|h c + g kappa K(c) - mu c|` at the returned iterate.
    pub residual: f64,
    pub iterations: usize,
    pub kappa: f64,
    pub tolerance: f64,
}

/// Projected gradient descent on the unit sphere, starting from the trap
/// ground state. The step halves whenever the energy would rise.
pub fn solve_condensate(
    params: &ModelParams,
    tensor: &InteractionTensor,
    options: &GpOptions,
) -> Result<CondensateOrbital> {
    if params.particles == 0 {
        return Err(Error::InvalidParameter("condensate needs at least one particle".into()));
    }
    if options.tol.is_nan() || options.tol <= 0.0 {
        return Err(Error::InvalidParameter("condensate tolerance must be positive".into()));
    }
    let functional = MeanFieldFunctional::new(params, tensor, options.weight)?;
    let m = params.modes;

    let mut c = vec![0.0; m];
    c[0] = 1.0;
    let mut e = functional.energy(&c);
    let step_max = 2.0 / (energy(m - 1) + functional.strength().abs());
    let mut step = 0.5 * step_max;

    let mut iterations = 0;
    let (mu, residual) = loop {
        let action = functional.action(&c);
        let mu = dot(&c, &action);
        let r: Vec<f64> = action.iter().zip(&c).map(|(a, x)| a - mu * x).collect();
        let residual = norm(&r);
        if !residual.is_finite() || !e.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite energy or residual after {iterations} iterations"
            )));
        }
        if residual <= options.tol || iterations >= options.max_iter {
            break (mu, residual);
        }
        iterations += 1;

        loop {
            let mut trial: Vec<f64> = c.iter().zip(&r).map(|(x, ri)| x - step * ri).collect();
            let n = norm(&trial);
            trial.iter_mut().for_each(|x| *x /= n);
            let e_trial = functional.energy(&trial);
            if e_trial <= e + 8.0 * f64::EPSILON * e.abs().max(1.0) {
                c = trial;
                e = e_trial;
                step = (step * 1.25).min(step_max);
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                return Err(Error::Divergence(
                    "step size underflowed without lowering the energy".into(),
                ));
            }
        }
    };

    let pivot = c
        .iter()
        .copied()
        .fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
    if pivot < 0.0 {
        c.iter_mut().for_each(|x| *x = -*x);
    }

    Ok(CondensateOrbital {
        energy_per_particle: functional.energy(&c),
        coeffs: c,
        mu,
        converged: residual <= options.tol,
        residual,
        iterations,
        kappa: options.weight.kappa(params.particles),
        tolerance: options.tol,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal completion of `c`. The trap mode with the largest overlap
/// on `c` is left out; the others are orthogonalized in index order.
pub fn fluctuation_basis(c: &[f64]) -> DMatrix<f64> {
    let m = c.len();
    let skip = (0..m)
        .max_by(|&a, &b| c[a].abs().total_cmp(&c[b].abs()).then(b.cmp(&a)))
        .unwrap_or(0);
    let mut accepted: Vec<Vec<f64>> = vec![c.to_vec()];
    for n in (0..m).filter(|&n| n != skip) {
        let mut v = vec![0.0; m];
        v[n] = 1.0;
        for _ in 0..2 {
            for q in &accepted {
                let proj = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= proj * qi);
            }
        }
        let len = norm(&v);
        v.iter_mut().for_each(|x| *x /= len);
        accepted.push(v);
    }
    DMatrix::from_fn(m, m - 1, |i, p| accepted[p + 1][i])
}

/// Quadratic fluctuation Hamiltonian
/// `c0 + sum A_pq b_p^† b_q + 1/2 sum B_pq (b_p^† b_q^† + b_p b_q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c0: f64,
    /// Columns span the complement of the condensate orbital.
    pub fluct_basis: DMatrix<f64>,
    pub mu: f64,
    /// Norm of the linear-term coefficients `e_p . (h c + g kappa K(c))`.
    pub first_order_norm: f64,
}

impl QuadraticForm {
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// Builds `A`, `B` and `c0` around a converged orbital. Refuses when the
/// first-order coefficients exceed ten times the orbital's tolerance.
pub fn build_quadratic(
    params: &ModelParams,
    tensor: &InteractionTensor,
    orbital: &CondensateOrbital,
) -> Result<QuadraticForm> {
    if !orbital.converged {
        return Err(Error::NonConvergence {
            what: "condensate orbital",
            iterations: orbital.iterations,
            residual: orbital.residual,
        });
    }
    if orbital.coeffs.len() != params.modes {
        return Err(Error::DimensionMismatch(format!(
            "orbital has {} coefficients for {} modes",
            orbital.coeffs.len(),
            params.modes
        )));
    }
    let functional = MeanFieldFunctional::with_kappa(params, tensor, orbital.kappa)?;
    let strength = functional.strength();
    let c = &orbital.coeffs;
    let m = params.modes;

    let fluct = fluctuation_basis(c);
    let action = DVector::from_vec(functional.action(c));
    let mu = dot(c, action.as_slice());
    let first_order = fluct.transpose() * &action;
    let first_order_norm = first_order.norm();
    let limit = 10.0 * orbital.tolerance;
    if first_order_norm > limit {
        return Err(Error::FirstOrderResidual {
            norm: first_order_norm,
            limit,
        });
    }

    let h = DMatrix::from_fn(m, m, |i, j| if i == j { energy(i) } else { 0.0 });
    let pair = tensor.contract_pair(c, c);
    let h_fluct = fluct.transpose() * h * &fluct;
    let k = fluct.transpose() * pair * &fluct;
    let k = 0.5 * (&k + k.transpose());
    let h_fluct = 0.5 * (&h_fluct + h_fluct.transpose());

    let identity = DMatrix::identity(m - 1, m - 1);
    let a = h_fluct + 2.0 * strength * &k - mu * identity;
    let b = strength * k;

    Ok(QuadraticForm {
        a,
        b,
        c0: params.particles as f64 * functional.energy(c),
        fluct_basis: fluct,
        mu,
        first_order_norm,
    })
}

/// Positive-frequency quasiparticles, ascending, Goldstone modes removed.
#[derive(Clone, Debug, PartialEq)]
pub struct BogoliubovSpectrum {
    pub epsilons: Vec<f64>,
    pub u_modes: Vec<Vec<f64>>,
    pub v_modes: Vec<Vec<f64>>,
    pub depletion: f64,
    pub ground_energy: f64,
    pub goldstone_count: usize,
}

impl BogoliubovSpectrum {
    /// `|u|^2 - |v|^2` for each retained mode.
    pub fn symplectic_norms(&self) -> Vec<f64> {
        self.u_modes
            .iter()
            .zip(&self.v_modes)
            .map(|(u, v)| dot(u, u) - dot(v, v))
            .collect()
    }
}

/// `|A u + B v - eps u| + |-B u - A v - eps v|` for one mode.
pub fn mode_residual(form: &QuadraticForm, eps: f64, u: &[f64], v: &[f64]) -> f64 {
    let u = DVector::from_column_slice(u);
    let v = DVector::from_column_slice(v);
    let top = &form.a * &u + &form.b * &v - eps * &u;
    let bottom = -(&form.b * &u) - &form.a * &v - eps * &v;
    top.norm() + bottom.norm()
}

/// Solves `[[A, B], [-B, -A]] (u, v) = eps (u, v)` for the positive branch.
pub fn diagonalize(form: &QuadraticForm, goldstone_tol: f64) -> Result<BogoliubovSpectrum> {
    let n = form.dim();
    let trace_a = form.a.trace();
    if n == 0 {
        return Ok(BogoliubovSpectrum {
            epsilons: Vec::new(),
            u_modes: Vec::new(),
            v_modes: Vec::new(),
            depletion: 0.0,
            ground_energy: form.c0,
            goldstone_count: 0,
        });
    }

    if form.b.iter().all(|&x| x == 0.0) {
        return diagonalize_unpaired(form, goldstone_tol);
    }

    let plus = &form.a + &form.b;
    let minus = &form.a - &form.b;
    // (x, y) = (u + v, u - v); `swapped` when A - B is the factored block
    let (chol, other, swapped) = if let Some(ch) = plus.clone().cholesky() {
        (ch, minus, false)
    } else if let Some(ch) = minus.clone().cholesky() {
        (ch, plus, true)
    } else {
        let imag = max_imaginary_frequency(form);
        return Err(if imag > goldstone_tol {
            Error::Instability { imag }
        } else {
            Error::IndefiniteForm
        });
    };

    let l = chol.l();
    let reduced = l.transpose() * other * &l;
    let reduced = 0.5 * (&reduced + reduced.transpose());
    let eig = SymmetricEigen::new(reduced);

    let mut modes: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::with_capacity(n);
    let mut goldstone_count = 0;
    for idx in 0..n {
        let lambda = eig.eigenvalues[idx];
        if lambda < 0.0 && (-lambda).sqrt() > goldstone_tol {
            return Err(Error::Instability { imag: (-lambda).sqrt() });
        }
        let eps = lambda.max(0.0).sqrt();
        if eps < goldstone_tol {
            goldstone_count += 1;
            continue;
        }
        let z = eig.eigenvectors.column(idx) * eps.sqrt();
        let first = l
            .transpose()
            .solve_upper_triangular(&z)
            .expect("Cholesky factor is invertible");
        let second = &l * &z / eps;
        let (x, y) = if swapped { (second, first) } else { (first, second) };
        let u: Vec<f64> = ((&x + &y) * 0.5).iter().copied().collect();
        let v: Vec<f64> = ((&x - &y) * 0.5).iter().copied().collect();
        modes.push((eps, u, v));
    }
    Ok(collect_modes(modes, goldstone_count, form.c0, trace_a))
}

/// Without pairing the quasiparticles are the eigenvectors of `A` and `v = 0`.
fn diagonalize_unpaired(form: &QuadraticForm, goldstone_tol: f64) -> Result<BogoliubovSpectrum> {
    let eig = SymmetricEigen::new(form.a.clone());
    let mut modes = Vec::new();
    let mut goldstone_count = 0;
    for (idx, &eps) in eig.eigenvalues.iter().enumerate() {
        if eps < -goldstone_tol {
            // positive-norm mode at negative energy
            return Err(Error::IndefiniteForm);
        }
        if eps.abs() < goldstone_tol {
            goldstone_count += 1;
            continue;
        }
        let u: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        modes.push((eps, u, vec![0.0; form.dim()]));
    }
    Ok(collect_modes(modes, goldstone_count, form.c0, form.a.trace()))
}

fn collect_modes(
    mut modes: Vec<(f64, Vec<f64>, Vec<f64>)>,
    goldstone_count: usize,
    c0: f64,
    trace_a: f64,
) -> BogoliubovSpectrum {
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));

    let depletion = modes.iter().map(|(_, _, v)| dot(v, v)).sum();
    let eps_sum: f64 = modes.iter().map(|m| m.0).sum();
    let mut epsilons = Vec::with_capacity(modes.len());
    let mut u_modes = Vec::with_capacity(modes.len());
    let mut v_modes = Vec::with_capacity(modes.len());
    for (e, u, v) in modes {
        epsilons.push(e);
        u_modes.push(u);
        v_modes.push(v);
    }
    BogoliubovSpectrum {
        epsilons,
        u_modes,
        v_modes,
        depletion,
        ground_energy: c0 + 0.5 * (eps_sum - trace_a),
        goldstone_count,
    }
}

/// Largest imaginary part among the eigenvalues of the full paired matrix.
fn max_imaginary_frequency(form: &QuadraticForm) -> f64 {
    let n = form.dim();
    let mut full = DMatrix::zeros(2 * n, 2 * n);
    full.view_mut((0, 0), (n, n)).copy_from(&form.a);
    full.view_mut((0, n), (n, n)).copy_from(&form.b);
    full.view_mut((n, 0), (n, n)).copy_from(&(-&form.b));
    full.view_mut((n, n), (n, n)).copy_from(&(-&form.a));
    full.complex_eigenvalues()
        .iter()
        .map(|z| z.im.abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BogoliubovOptions {
    pub gp: GpOptions,
    pub goldstone_tol: f64,
}

impl Default for BogoliubovOptions {
    fn default() -> Self {
        Self {
            gp: GpOptions::default(),
            goldstone_tol: DEFAULT_GOLDSTONE_TOL,
        }
    }
}

/// Everything the Bogoliubov pipeline produces for one parameter point.
#[derive(Clone, Debug)]
pub struct BogoliubovReport {
    pub mu: f64,
    /// `N E[c]`.
    pub e_gp: f64,
    pub e_bog: f64,
    pub depletion: f64,
    /// `1 - depletion / N`.
    pub condensate_fraction: f64,
    pub epsilons: Vec<f64>,
    pub orbital: CondensateOrbital,
    pub form: QuadraticForm,
    pub spectrum: BogoliubovSpectrum,
}

/// Orbital, quadratic form and spectrum in one call.
pub fn bogoliubov_report(
    params: &ModelParams,
    tensor: &InteractionTensor,
    options: &BogoliubovOptions,
) -> Result<BogoliubovReport> {
    let orbital = solve_condensate(params, tensor, &options.gp)?;
    let form = build_quadratic(params, tensor, &orbital)?;
    let spectrum = diagonalize(&form, options.goldstone_tol)?;
    let n = params.particles as f64;
    Ok(BogoliubovReport {
        mu: orbital.mu,
        e_gp: n * orbital.energy_per_particle,
        e_bog: spectrum.ground_energy,
        depletion: spectrum.depletion,
        condensate_fraction: 1.0 - spectrum.depletion / n,
        epsilons: spectrum.epsilons.clone(),
        orbital,
        form,
        spectrum,
    })
}
