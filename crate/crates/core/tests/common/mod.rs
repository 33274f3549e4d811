//! Independent oracles shared by the integration tests and the acceptance
//! harness.

#![allow(dead_code)]

use std::collections::HashMap;

use bogolab::fock::{apply_annihilate, apply_create, FockBasis, OccupationVector};
use bogolab::orbitals::{phi, InteractionTensor};
use nalgebra::DMatrix;

/// Sparse ket over occupation vectors of any particle number.
pub type Ket = HashMap<Vec<u32>, f64>;

pub fn ket(counts: &[u32]) -> Ket {
    HashMap::from([(counts.to_vec(), 1.0)])
}

pub fn annihilate(mode: usize, ket: &Ket) -> Ket {
    let mut out = Ket::new();
    for (counts, amp) in ket {
        let state = OccupationVector::new(counts.clone());
        if let Some((c, next)) = apply_annihilate(mode, &state).unwrap() {
            *out.entry(next.counts().to_vec()).or_insert(0.0) += c * amp;
        }
    }
    out
}

pub fn create(mode: usize, ket: &Ket) -> Ket {
    let mut out = Ket::new();
    for (counts, amp) in ket {
        let state = OccupationVector::new(counts.clone());
        let (c, next) = apply_create(mode, &state).unwrap();
        *out.entry(next.counts().to_vec()).or_insert(0.0) += c * amp;
    }
    out
}

pub fn subtract(a: &Ket, b: &Ket) -> Ket {
    let mut out = a.clone();
    for (counts, amp) in b {
        *out.entry(counts.clone()).or_insert(0.0) -= amp;
    }
    out
}

pub fn max_amplitude(ket: &Ket) -> f64 {
    ket.values().fold(0.0, |m, a| m.max(a.abs()))
}

/// Largest deviation from `[b_i, b_j] = 0`, `[b_i^†, b_j^†] = 0` and
/// `[b_i, b_j^†] = δ_ij` over every basis state with `N <= max_n`,
/// `M <= max_m`.
pub fn ladder_violation(max_n: usize, max_m: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for m in 1..=max_m {
        for n in 0..=max_n {
            let basis = FockBasis::new(n, m).unwrap();
            for state in basis.states() {
                let s = ket(state.counts());
                for i in 0..m {
                    for j in 0..m {
                        let aa = subtract(&annihilate(i, &annihilate(j, &s)), &annihilate(j, &annihilate(i, &s)));
                        let cc = subtract(&create(i, &create(j, &s)), &create(j, &create(i, &s)));
                        let mut ac = subtract(&annihilate(i, &create(j, &s)), &create(j, &annihilate(i, &s)));
                        if i == j {
                            ac = subtract(&ac, &s);
                        }
                        worst = worst
                            .max(max_amplitude(&aa))
                            .max(max_amplitude(&cc))
                            .max(max_amplitude(&ac));
                    }
                }
            }
        }
    }
    worst
}

/// `1/2 sum_ijkl I_ijkl <r| b_i^† b_j^† b_l b_k |c>`, one ladder operator
/// at a time.
pub fn brute_force_interaction(basis: &FockBasis, tensor: &InteractionTensor) -> DMatrix<f64> {
    let m = basis.mode_count();
    let dim = basis.len();
    let mut out = DMatrix::zeros(dim, dim);
    for (col, state) in basis.states().iter().enumerate() {
        let s = ket(state.counts());
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let value = tensor.get(i, j, k, l);
                        if value == 0.0 {
                            continue;
                        }
                        let t = create(i, &create(j, &annihilate(l, &annihilate(k, &s))));
                        for (counts, amp) in t {
                            let row = basis.index_of(&counts).expect("particle number is conserved");
                            out[(row, col)] += 0.5 * value * amp;
                        }
                    }
                }
            }
        }
    }
    out
}

/// `∫ φ_i φ_j φ_k φ_l dx` by composite Simpson on `[-L, L]`.
pub fn simpson_overlap(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let half_width = 14.0;
    let intervals = 40_000;
    let h = 2.0 * half_width / intervals as f64;
    let f = |x: f64| phi(i, x) * phi(j, x) * phi(k, x) * phi(l, x);
    let mut sum = f(-half_width) + f(half_width);
    for s in 1..intervals {
        let x = -half_width + s as f64 * h;
        sum += if s % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    sum * h / 3.0
}

/// All 24 orderings of four indices.
pub fn permutations(q: [usize; 4]) -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([q[a], q[b], q[c], q[d]]);
                    }
                }
            }
        }
    }
    out
}

/// Largest `|I_p - I_q|` over permutations and largest `|I|` over
/// odd-parity quadruples.
pub fn tensor_symmetry_and_parity(tensor: &InteractionTensor) -> (f64, f64) {
    let m = tensor.mode_count();
    let mut asym: f64 = 0.0;
    let mut odd: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let v = tensor.get(i, j, k, l);
                    if (i + j + k + l) % 2 == 1 {
                        odd = odd.max(v.abs());
                    }
                    for p in permutations([i, j, k, l]) {
                        asym = asym.max((tensor.get(p[0], p[1], p[2], p[3]) - v).abs());
                    }
                }
            }
        }
    }
    (asym, odd)
}
