//! Harmonic-oscillator single-particle data: energies, eigenfunctions,
//! Gauss-Hermite quadrature and the contact-interaction overlap tensor.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Largest node count the quadrature generator accepts. Beyond this the
/// Christoffel sums overflow `f64` at the outermost nodes.
pub const MAX_QUADRATURE_NODES: usize = 256;

/// `E_n = n + 1/2`.
pub fn energy(n: usize) -> f64 {
    n as f64 + 0.5
}

/// Normalized oscillator eigenfunction `phi_n(x)`.
pub fn phi(n: usize, x: f64) -> f64 {
    let mut out = vec![0.0; n + 1];
    fill_orbitals(x, &mut out);
    out[n]
}

/// `phi_0(x) .. phi_{count-1}(x)` in one pass of the recurrence.
pub fn phi_all(count: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    fill_orbitals(x, &mut out);
    out
}

fn fill_orbitals(x: f64, out: &mut [f64]) {
    fill_reduced(x, out);
    let gauss = (-0.5 * x * x).exp();
    out.iter_mut().for_each(|v| *v *= gauss);
}

/// `phi_n(x) * exp(x^2 / 2)`: the orthonormal Hermite polynomials for the
/// weight `exp(-x^2)`. Products of these against a Gaussian weight are what
/// the quadrature integrates.
pub fn reduced_orbitals(count: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; count];
    fill_reduced(x, &mut out);
    out
}

fn fill_reduced(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = PI.powf(-0.25);
    if out.len() > 1 {
        out[1] = 2f64.sqrt() * x * out[0];
    }
    for n in 1..out.len().saturating_sub(1) {
        let nf = n as f64;
        out[n + 1] = x * (2.0 / (nf + 1.0)).sqrt() * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
    }
}

/// Gauss-Hermite rule for the weight `exp(-alpha x^2)`.
///
/// `integrate_weighted` applies the rule to the polynomial part of an
/// integrand; `integrate` takes a full integrand and divides the weight out.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
}

impl QuadratureRule {
    /// `nodes`-point rule for `exp(-alpha x^2)`, exact for polynomials up to
    /// degree `2 * nodes - 1`.
    pub fn gauss_hermite(nodes: usize, alpha: f64) -> Result<Self> {
        if nodes == 0 || nodes > MAX_QUADRATURE_NODES {
            return Err(Error::UnsupportedQuadrature(nodes));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Gaussian weight exponent must be positive, got {alpha}"
            )));
        }
        let (ys, ws) = standard_gauss_hermite(nodes);
        let scale = alpha.sqrt();
        Ok(Self {
            nodes: ys.iter().map(|y| y / scale).collect(),
            weights: ws.iter().map(|w| w / scale).collect(),
            alpha,
        })
    }

    /// Rule for `∫ p(x) exp(-2x^2) dx` exact up to `max_poly_degree`.
    pub fn for_quartic_products(max_poly_degree: usize) -> Result<Self> {
        Self::gauss_hermite(max_poly_degree / 2 + 1, 2.0)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    /// `∫ p(x) exp(-alpha x^2) dx`.
    pub fn integrate_weighted(&self, p: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * p(x)).sum()
    }

    /// `∫ f(x) dx` for an integrand that already carries its Gaussian decay.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.integrate_weighted(|x| f(x) * (self.alpha * x * x).exp())
    }
}

/// Rule for `∫ p(x) exp(-2 x^2) dx`, exact up to `max_poly_degree`.
pub fn build_quadrature(max_poly_degree: usize) -> Result<QuadratureRule> {
    QuadratureRule::for_quartic_products(max_poly_degree)
}

/// Nodes and weights for `exp(-y^2)`: Golub-Welsch for the initial nodes,
/// Newton polish on the orthonormal recurrence, Christoffel weights.
fn standard_gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut ys: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    ys.sort_by(f64::total_cmp);

    let mut buf = vec![0.0; n + 1];
    for y in ys.iter_mut() {
        for _ in 0..3 {
            fill_reduced(*y, &mut buf);
            // d/dy h_n = sqrt(2n) h_{n-1}
            let step = buf[n] / ((2.0 * n as f64).sqrt() * buf[n - 1]);
            if !step.is_finite() {
                break;
            }
            *y -= step;
        }
    }
    // symmetrize so odd moments cancel exactly
    for i in 0..n / 2 {
        let m = 0.5 * (ys[n - 1 - i] - ys[i]);
        ys[i] = -m;
        ys[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        ys[n / 2] = 0.0;
    }

    let ws = ys
        .iter()
        .map(|&y| {
            fill_reduced(y, &mut buf[..n]);
            1.0 / buf[..n].iter().map(|h| h * h).sum::<f64>()
        })
        .collect();
    (ys, ws)
}

/// Overlap integrals `I_ijkl = ∫ phi_i phi_j phi_k phi_l dx`, without the
/// coupling constant. Stored densely over `M^4` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionTensor {
    modes: usize,
    values: Vec<f64>,
}

impl InteractionTensor {
    pub fn mode_count(&self) -> usize {
        self.modes
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.modes + j) * self.modes + k) * self.modes + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.values[self.offset(i, j, k, l)]
    }

    /// `sum_{kl} I_ijkl a_k b_l` as an `M x M` matrix.
    pub fn contract_pair(&self, a: &[f64], b: &[f64]) -> DMatrix<f64> {
        let m = self.modes;
        DMatrix::from_fn(m, m, |i, j| {
            let mut acc = 0.0;
            for (k, &ak) in a.iter().enumerate() {
                if ak == 0.0 {
                    continue;
                }
                let base = self.offset(i, j, k, 0);
                let row = &self.values[base..base + m];
                acc += ak * row.iter().zip(b).map(|(v, bl)| v * bl).sum::<f64>();
            }
            acc
        })
    }

    /// `sum_{jkl} I_ijkl c_j c_k c_l`.
    pub fn contract_three(&self, c: &[f64]) -> Vec<f64> {
        let pair = self.contract_pair(c, c);
        (0..self.modes)
            .map(|i| (0..self.modes).map(|j| pair[(i, j)] * c[j]).sum())
            .collect()
    }

    /// `sum_{ijkl} I_ijkl c_i c_j c_k c_l`.
    pub fn contract_four(&self, c: &[f64]) -> f64 {
        self.contract_three(c).iter().zip(c).map(|(k, ci)| k * ci).sum()
    }

    /// Debug dump with columns `i,j,k,l,value`, one row per stored entry.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,k,l,value")?;
        let m = self.modes;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        writeln!(out, "{i},{j},{k},{l},{:e}", self.get(i, j, k, l))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Quadrature node count used when the caller does not choose one.
pub fn default_quadrature_nodes(modes: usize) -> usize {
    2 * modes + 2
}

/// Tabulates `I_ijkl` for `M` modes. The rule must carry the `exp(-2x^2)`
/// weight and integrate degree `4(M-1)` exactly.
pub fn interaction_tensor(modes: usize, rule: &QuadratureRule) -> Result<InteractionTensor> {
    if modes == 0 {
        return Err(Error::InvalidParameter("mode cutoff must be at least 1".into()));
    }
    if rule.alpha() != 2.0 {
        return Err(Error::InvalidParameter(format!(
            "interaction tensor needs the exp(-2x^2) weight, rule has exp(-{}x^2)",
            rule.alpha()
        )));
    }
    let required = 4 * (modes - 1);
    if rule.exact_degree() < required {
        return Err(Error::InsufficientQuadrature {
            required,
            available: rule.exact_degree(),
        });
    }

    let table: Vec<Vec<f64>> = rule.nodes().iter().map(|&x| reduced_orbitals(modes, x)).collect();

    let mut quads = Vec::new();
    for i in 0..modes {
        for j in i..modes {
            for k in j..modes {
                for l in k..modes {
                    if (i + j + k + l) % 2 == 0 {
                        quads.push([i, j, k, l]);
                    }
                }
            }
        }
    }
    let integrals: Vec<f64> = quads
        .par_iter()
        .map(|&[i, j, k, l]| {
            table
                .iter()
                .zip(rule.weights())
                .map(|(h, w)| w * h[i] * h[j] * h[k] * h[l])
                .sum()
        })
        .collect();

    let mut tensor = InteractionTensor {
        modes,
        values: vec![0.0; modes.pow(4)],
    };
    for (q, value) in quads.iter().zip(integrals) {
        for p in permutations(*q) {
            let off = tensor.offset(p[0], p[1], p[2], p[3]);
            tensor.values[off] = value;
        }
    }
    Ok(tensor)
}

/// Tensor with the default rule of `2M + 2` nodes.
pub fn default_interaction_tensor(modes: usize) -> Result<InteractionTensor> {
    let rule = QuadratureRule::gauss_hermite(default_quadrature_nodes(modes), 2.0)?;
    interaction_tensor(modes, &rule)
}

fn permutations(q: [usize; 4]) -> impl Iterator<Item = [usize; 4]> {
    const ORDERS: [[usize; 4]; 24] = [
        [0, 1, 2, 3],
        [0, 1, 3, 2],
        [0, 2, 1, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
        [0, 3, 2, 1],
        [1, 0, 2, 3],
        [1, 0, 3, 2],
        [1, 2, 0, 3],
        [1, 2, 3, 0],
        [1, 3, 0, 2],
        [1, 3, 2, 0],
        [2, 0, 1, 3],
        [2, 0, 3, 1],
        [2, 1, 0, 3],
        [2, 1, 3, 0],
        [2, 3, 0, 1],
        [2, 3, 1, 0],
        [3, 0, 1, 2],
        [3, 0, 2, 1],
        [3, 1, 0, 2],
        [3, 1, 2, 0],
        [3, 2, 0, 1],
        [3, 2, 1, 0],
    ];
    ORDERS.into_iter().map(move |o| [q[o[0]], q[o[1]], q[o[2]], q[o[3]]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Physicists' Hermite polynomial coefficients from `H_{n+1} = 2x H_n - 2n H_{n-1}`.
    fn hermite_coefficients(n: usize) -> Vec<f64> {
        let mut prev = vec![1.0];
        if n == 0 {
            return prev;
        }
        let mut cur = vec![0.0, 2.0];
        for k in 1..n {
            let mut next = vec![0.0; k + 2];
            for (p, c) in cur.iter().enumerate() {
                next[p + 1] += 2.0 * c;
            }
            for (p, c) in prev.iter().enumerate() {
                next[p] -= 2.0 * k as f64 * c;
            }
            prev = cur;
            cur = next;
        }
        cur
    }

    fn phi_direct(n: usize, x: f64) -> f64 {
        let h: f64 = hermite_coefficients(n)
            .iter()
            .enumerate()
            .map(|(p, c)| c * x.powi(p as i32))
            .sum();
        let factorial: f64 = (1..=n).map(|k| k as f64).product();
        let norm = (2f64.powi(n as i32) * factorial * PI.sqrt()).sqrt();
        h * (-0.5 * x * x).exp() / norm
    }

    #[test]
    fn energies() {
        assert_eq!(energy(0), 0.5);
        assert_eq!(energy(1), 1.5);
        assert_eq!(energy(10), 10.5);
    }

    #[test]
    fn phi_values() {
        assert_abs_diff_eq!(phi(0, 0.0), PI.powf(-0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(phi(0, 0.0), 0.7511255444649425, epsilon = 1e-15);
        assert_eq!(phi(1, 0.0), 0.0);
        assert_eq!(phi(3, 0.0), 0.0);
    }

    #[test]
    fn recurrence_matches_explicit_hermite() {
        for n in 0..=15 {
            for i in 0..41 {
                let x = -4.0 + 0.2 * i as f64;
                let direct = phi_direct(n, x);
                assert!(
                    (phi(n, x) - direct).abs() <= 1e-9,
                    "n={n} x={x}: {} vs {direct}",
                    phi(n, x)
                );
            }
        }
    }

    #[test]
    fn orthonormality_to_mode_30() {
        let rule = QuadratureRule::gauss_hermite(40, 1.0).unwrap();
        let table: Vec<Vec<f64>> = rule.nodes().iter().map(|&x| reduced_orbitals(31, x)).collect();
        for i in 0..=30 {
            for j in 0..=30 {
                let s: f64 = table.iter().zip(rule.weights()).map(|(h, w)| w * h[i] * h[j]).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((s - expected).abs() <= 1e-10, "<{i}|{j}> = {s}");
            }
        }
    }

    #[test]
    fn full_integrand_normalization() {
        let rule = QuadratureRule::gauss_hermite(40, 1.0).unwrap();
        for n in [0, 5, 17, 30] {
            let s = rule.integrate(|x| phi(n, x).powi(2));
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn quartic_weight_moments() {
        let rule = build_quadrature(8).unwrap();
        assert!(rule.exact_degree() >= 8);
        assert_abs_diff_eq!(rule.integrate_weighted(|_| 1.0), (PI / 2.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(rule.integrate_weighted(|x| x), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            rule.integrate_weighted(|x| x * x),
            0.25 * (PI / 2.0).sqrt(),
            epsilon = 1e-14
        );
        // ∫x^8 e^{-2x^2} = 105/256 sqrt(pi/2)
        assert_abs_diff_eq!(
            rule.integrate_weighted(|x| x.powi(8)),
            105.0 / 256.0 * (PI / 2.0).sqrt(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn rule_shape() {
        let rule = QuadratureRule::gauss_hermite(17, 2.0).unwrap();
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(rule.weights().iter().all(|&w| w > 0.0));
        assert!(QuadratureRule::gauss_hermite(0, 1.0).is_err());
        assert!(QuadratureRule::gauss_hermite(MAX_QUADRATURE_NODES + 1, 1.0).is_err());
        assert!(QuadratureRule::gauss_hermite(MAX_QUADRATURE_NODES, 1.0).is_ok());
    }

    #[test]
    fn tensor_analytic_entries() {
        let t = default_interaction_tensor(4).unwrap();
        let s = (2.0 * PI).sqrt();
        assert_abs_diff_eq!(t.get(0, 0, 0, 0), 1.0 / s, epsilon = 1e-12);
        assert_abs_diff_eq!(t.get(0, 0, 1, 1), 0.5 / s, epsilon = 1e-12);
        assert_eq!(t.get(0, 0, 0, 1), 0.0);
    }

    #[test]
    fn tensor_symmetry_and_parity() {
        let m = 8;
        let t = default_interaction_tensor(m).unwrap();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let v = t.get(i, j, k, l);
                        if (i + j + k + l) % 2 == 1 {
                            assert!(v.abs() <= 1e-12);
                        }
                        for p in permutations([i, j, k, l]) {
                            assert!((t.get(p[0], p[1], p[2], p[3]) - v).abs() <= 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_refuses_weak_rule() {
        let rule = QuadratureRule::gauss_hermite(6, 2.0).unwrap();
        assert!(matches!(
            interaction_tensor(4, &rule),
            Err(Error::InsufficientQuadrature {
                required: 12,
                available: 11
            })
        ));
        let rule = QuadratureRule::gauss_hermite(20, 1.0).unwrap();
        assert!(interaction_tensor(4, &rule).is_err());
    }

    #[test]
    fn contractions_agree_with_loops() {
        let m = 5;
        let t = default_interaction_tensor(m).unwrap();
        let c = [0.9, 0.1, -0.3, 0.2, 0.05];
        let mut brute = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        brute += t.get(i, j, k, l) * c[i] * c[j] * c[k] * c[l];
                    }
                }
            }
        }
        assert_abs_diff_eq!(t.contract_four(&c), brute, epsilon = 1e-14);
    }

    #[test]
    fn csv_dump_has_all_rows() {
        let t = default_interaction_tensor(2).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,j,k,l,value\n"));
        assert_eq!(text.lines().count(), 17);
    }
}
