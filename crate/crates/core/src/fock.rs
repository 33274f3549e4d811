//! Bosonic Fock space at fixed particle number.
//!
//! Basis states are occupation vectors over `M` modes. The basis is ordered
//! lexicographically with the occupation of mode 0 descending first, so the
//! fully condensed state `(N, 0, ..., 0)` sits at index 0.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest basis enumerated unless the caller raises the limit.
pub const DEFAULT_MAX_STATES: usize = 5_000_000;

/// One Fock ket `|n_0 n_1 ... n_{M-1}>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationVector(Vec<u32>);

impl OccupationVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn vacuum(modes: usize) -> Self {
        Self(vec![0; modes])
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn mode_count(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&n| n as u64).sum()
    }

    pub fn get(&self, mode: usize) -> u32 {
        self.0[mode]
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.0.len() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                index: mode,
                modes: self.0.len(),
            })
        }
    }
}

impl Borrow<[u32]> for OccupationVector {
    fn borrow(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// Number of occupation vectors with `particles` bosons over `modes` modes,
/// `C(N + M - 1, M - 1)`.
pub fn dimension(particles: usize, modes: usize) -> Result<usize> {
    if modes == 0 {
        return Err(Error::InvalidParameter("mode cutoff must be at least 1".into()));
    }
    let top = (particles as u128)
        .checked_add(modes as u128 - 1)
        .ok_or_else(|| overflow(particles, modes))?;
    let k = (modes as u128 - 1).min(particles as u128);
    let mut acc: u128 = 1;
    for i in 1..=k {
        // acc * (top - k + i) / i stays integral at every step
        acc = acc.checked_mul(top - k + i).ok_or_else(|| overflow(particles, modes))? / i;
    }
    usize::try_from(acc).map_err(|_| overflow(particles, modes))
}

fn overflow(particles: usize, modes: usize) -> Error {
    Error::Capacity(format!(
        "basis dimension for N={particles}, M={modes} overflows the counting arithmetic"
    ))
}

/// The fixed-N sector of the truncated Fock space.
#[derive(Clone, Debug)]
pub struct FockBasis {
    modes: usize,
    particles: usize,
    states: Vec<OccupationVector>,
    index: HashMap<OccupationVector, usize>,
}

impl FockBasis {
    /// Enumerates the basis with the default state limit.
    pub fn new(particles: usize, modes: usize) -> Result<Self> {
        Self::with_limit(particles, modes, DEFAULT_MAX_STATES)
    }

    /// Enumerates the basis, refusing when its dimension exceeds `max_states`.
    pub fn with_limit(particles: usize, modes: usize, max_states: usize) -> Result<Self> {
        let dim = dimension(particles, modes)?;
        if dim > max_states {
            return Err(Error::Capacity(format!(
                "basis for N={particles}, M={modes} has {dim} states, limit is {max_states}"
            )));
        }
        let n =
            u32::try_from(particles).map_err(|_| Error::Capacity(format!("particle count {particles} too large")))?;

        let mut states = Vec::with_capacity(dim);
        let mut current = vec![0u32; modes];
        current[0] = n;
        loop {
            states.push(OccupationVector(current.clone()));
            if !advance(&mut current) {
                break;
            }
        }
        debug_assert_eq!(states.len(), dim);

        let index = states.iter().enumerate().map(|(p, s)| (s.clone(), p)).collect();
        Ok(Self {
            modes,
            particles,
            states,
            index,
        })
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn mode_count(&self) -> usize {
        self.modes
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[OccupationVector] {
        &self.states
    }

    pub fn state(&self, position: usize) -> &OccupationVector {
        &self.states[position]
    }

    /// Position of a state in the basis, `None` if it lies outside the sector.
    pub fn index_of(&self, counts: &[u32]) -> Option<usize> {
        self.index.get(counts).copied()
    }
}

/// Steps `counts` to its successor in descending lexicographic order.
/// Returns false once the last state `(0, ..., 0, N)` has been passed.
fn advance(counts: &mut [u32]) -> bool {
    let last = counts.len() - 1;
    let Some(k) = (0..last).rev().find(|&k| counts[k] > 0) else {
        return false;
    };
    let tail: u32 = counts[k + 1..].iter().sum();
    counts[k] -= 1;
    for c in counts[k + 1..].iter_mut() {
        *c = 0;
    }
    counts[k + 1] = tail + 1;
    true
}

/// `b_i |s>`: `None` when mode `i` is empty.
pub fn apply_annihilate(mode: usize, state: &OccupationVector) -> Result<Option<(f64, OccupationVector)>> {
    state.check_mode(mode)?;
    let n = state.0[mode];
    if n == 0 {
        return Ok(None);
    }
    let mut out = state.clone();
    out.0[mode] = n - 1;
    Ok(Some(((n as f64).sqrt(), out)))
}

/// `b_i^† |s>`. The result has one more particle than `s`.
pub fn apply_create(mode: usize, state: &OccupationVector) -> Result<(f64, OccupationVector)> {
    state.check_mode(mode)?;
    let mut out = state.clone();
    out.0[mode] += 1;
    Ok(((out.0[mode] as f64).sqrt(), out))
}

/// `b_i^† b_j^† b_k b_l |s>`, applied right to left.
pub fn apply_pair_string(
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    state: &OccupationVector,
) -> Result<Option<(f64, OccupationVector)>> {
    for m in [i, j, k, l] {
        state.check_mode(m)?;
    }
    let mut counts = state.0.clone();
    match pair_string_in_place(i, j, k, l, &mut counts) {
        Some(coeff) => Ok(Some((coeff, OccupationVector(counts)))),
        None => Ok(None),
    }
}

/// In-place variant used by assembly loops. Indices must already be valid.
pub(crate) fn pair_string_in_place(i: usize, j: usize, k: usize, l: usize, counts: &mut [u32]) -> Option<f64> {
    let mut coeff = 1.0;
    for m in [l, k] {
        let n = counts[m];
        if n == 0 {
            return None;
        }
        coeff *= (n as f64).sqrt();
        counts[m] = n - 1;
    }
    for m in [j, i] {
        counts[m] += 1;
        coeff *= (counts[m] as f64).sqrt();
    }
    Some(coeff)
}

/// Real amplitudes over the kets of a basis.
#[derive(Clone, Debug)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: Vec<f64>,
}

impl StateVector {
    pub fn new(basis: Arc<FockBasis>, amplitudes: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a basis of {} states",
                amplitudes.len(),
                basis.len()
            )));
        }
        Ok(Self { basis, amplitudes })
    }

    /// The normalized basis ket at `position`.
    pub fn basis_state(basis: Arc<FockBasis>, position: usize) -> Self {
        let mut amplitudes = vec![0.0; basis.len()];
        amplitudes[position] = 1.0;
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= norm);
        }
    }

    pub fn dot(&self, other: &StateVector) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn occ(v: &[u32]) -> OccupationVector {
        OccupationVector::new(v.to_vec())
    }

    fn brute_force_count(particles: u32, modes: usize) -> usize {
        fn rec(rem: u32, modes_left: usize) -> usize {
            if modes_left == 1 {
                return 1;
            }
            (0..=rem).map(|n| rec(rem - n, modes_left - 1)).sum()
        }
        rec(particles, modes)
    }

    #[test]
    fn dimension_small_cases() {
        assert_eq!(dimension(0, 5).unwrap(), 1);
        assert_eq!(dimension(2, 2).unwrap(), 3);
        assert_eq!(dimension(3, 4).unwrap(), brute_force_count(3, 4));
        assert_eq!(dimension(3, 4).unwrap(), 20);
        assert_eq!(dimension(6, 10).unwrap(), 5005);
        for n in 0..6u32 {
            for m in 1..7 {
                assert_eq!(dimension(n as usize, m).unwrap(), brute_force_count(n, m));
            }
        }
    }

    #[test]
    fn dimension_overflow_is_capacity_error() {
        let err = dimension(usize::MAX / 2, 400).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
        assert!(dimension(3, 0).is_err());
    }

    #[test]
    fn enumeration_order() {
        let basis = FockBasis::new(1, 3).unwrap();
        assert_eq!(basis.states(), &[occ(&[1, 0, 0]), occ(&[0, 1, 0]), occ(&[0, 0, 1])]);
        let basis = FockBasis::new(2, 2).unwrap();
        assert_eq!(basis.states(), &[occ(&[2, 0]), occ(&[1, 1]), occ(&[0, 2])]);
        assert_eq!(FockBasis::new(4, 6).unwrap().len(), 126);
    }

    #[test]
    fn vacuum_sector_and_single_mode() {
        let basis = FockBasis::new(0, 4).unwrap();
        assert_eq!(basis.states(), &[OccupationVector::vacuum(4)]);
        let basis = FockBasis::new(5, 1).unwrap();
        assert_eq!(basis.states(), &[occ(&[5])]);
    }

    #[test]
    fn capacity_limit_is_enforced() {
        let err = FockBasis::with_limit(6, 10, 5000).unwrap_err();
        assert!(matches!(err, Error::Capacity(_)));
        assert_eq!(FockBasis::with_limit(6, 10, 5005).unwrap().len(), 5005);
    }

    #[test]
    fn ladder_examples() {
        let (c, s) = apply_annihilate(0, &occ(&[2, 0])).unwrap().unwrap();
        assert_eq!(c, 2f64.sqrt());
        assert_eq!(s, occ(&[1, 0]));
        assert!(apply_annihilate(1, &occ(&[1, 0])).unwrap().is_none());

        let (c, s) = apply_create(0, &occ(&[1, 0])).unwrap();
        assert_eq!(c, 2f64.sqrt());
        assert_eq!(s, occ(&[2, 0]));
        let (c, s) = apply_create(1, &occ(&[0, 0])).unwrap();
        assert_eq!(c, 1.0);
        assert_eq!(s, occ(&[0, 1]));

        for n0 in 0..8u32 {
            let s = occ(&[n0, 1]);
            if let Some((c, _)) = apply_annihilate(0, &s).unwrap() {
                assert!((c * c - n0 as f64).abs() < 1e-12);
            } else {
                assert_eq!(n0, 0);
            }
        }
    }

    #[test]
    fn mode_out_of_range() {
        let s = occ(&[1, 0]);
        assert!(matches!(
            apply_annihilate(2, &s),
            Err(Error::ModeOutOfRange { index: 2, modes: 2 })
        ));
        assert!(apply_create(5, &s).is_err());
        assert!(apply_pair_string(0, 0, 0, 2, &s).is_err());
    }

    #[test]
    fn pair_string_examples() {
        let (c, s) = apply_pair_string(0, 0, 0, 0, &occ(&[2, 0])).unwrap().unwrap();
        assert!((c - 2.0).abs() < 1e-15);
        assert_eq!(s, occ(&[2, 0]));

        let (c, s) = apply_pair_string(1, 1, 0, 0, &occ(&[2, 0])).unwrap().unwrap();
        assert!((c - 2.0).abs() < 1e-15);
        assert_eq!(s, occ(&[0, 2]));

        assert!(apply_pair_string(0, 0, 1, 0, &occ(&[2, 0])).unwrap().is_none());
        assert!(apply_pair_string(0, 0, 0, 0, &occ(&[1, 3])).unwrap().is_none());
    }

    #[test]
    fn state_vector_length_is_checked() {
        let basis = FockBasis::new(2, 2).unwrap().into_shared();
        assert!(StateVector::new(basis.clone(), vec![1.0; 2]).is_err());
        let mut v = StateVector::new(basis, vec![1.0, 1.0, 1.0]).unwrap();
        v.normalize();
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }
}
