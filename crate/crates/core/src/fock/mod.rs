//! Truncated Fock space for two beams with two polarization modes each.
//!
//! The four modes are labelled (beam, polarization) with beam ∈ {A, B} and
//! polarization ∈ {H, V}. Truncation keeps every state whose *total* photon
//! number per beam is at most `n_max`, so each beam spans
//! `(n_max+1)(n_max+2)/2` occupation states and the full space is the tensor
//! product of the two beams.
//!
//! Basis order is lexicographic in the tuple
//! `(n_A_total, n_AH, n_B_total, n_BH)`, each component ascending. The flat
//! index factorizes as `beam_index(A) * beam_dim + beam_index(B)`, which is
//! exactly the Kronecker-product convention used by [`SparseOperator::kron`].

mod io;
mod op;
mod state;

pub use io::{read_operator_csv, read_state_csv, write_operator_csv, write_state_csv};
pub use op::SparseOperator;
pub use state::{QuantumState, DENSE_DIM_CAP};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Beam {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    H,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeId {
    pub beam: Beam,
    pub pol: Polarization,
}

impl ModeId {
    pub const fn new(beam: Beam, pol: Polarization) -> Self {
        Self { beam, pol }
    }

    pub const ALL: [ModeId; 4] = [
        ModeId::new(Beam::A, Polarization::H),
        ModeId::new(Beam::A, Polarization::V),
        ModeId::new(Beam::B, Polarization::H),
        ModeId::new(Beam::B, Polarization::V),
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Raise,
    Lower,
}

/// Photon occupation of all four modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OccupationState {
    pub n_ah: u32,
    pub n_av: u32,
    pub n_bh: u32,
    pub n_bv: u32,
}

impl OccupationState {
    pub const fn new(n_ah: u32, n_av: u32, n_bh: u32, n_bv: u32) -> Self {
        Self { n_ah, n_av, n_bh, n_bv }
    }

    pub const fn beam_total(&self, beam: Beam) -> u32 {
        match beam {
            Beam::A => self.n_ah + self.n_av,
            Beam::B => self.n_bh + self.n_bv,
        }
    }

    pub const fn count(&self, mode: ModeId) -> u32 {
        match (mode.beam, mode.pol) {
            (Beam::A, Polarization::H) => self.n_ah,
            (Beam::A, Polarization::V) => self.n_av,
            (Beam::B, Polarization::H) => self.n_bh,
            (Beam::B, Polarization::V) => self.n_bv,
        }
    }
}

/// Per-beam total photon number cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Truncation {
    n_max: u32,
}

impl Truncation {
    pub const fn new(n_max: u32) -> Self {
        Self { n_max }
    }

    pub const fn n_max(&self) -> u32 {
        self.n_max
    }

    /// Number of occupation states of a single beam: `(n_max+1)(n_max+2)/2`.
    pub const fn beam_dim(&self) -> usize {
        let m = self.n_max as usize;
        (m + 1) * (m + 2) / 2
    }

    pub const fn total_dim(&self) -> usize {
        self.beam_dim() * self.beam_dim()
    }

    /// Flat index of a beam occupation `(total, n_h)` with `n_h <= total <= n_max`.
    pub const fn beam_index(&self, total: u32, n_h: u32) -> usize {
        let n = total as usize;
        n * (n + 1) / 2 + n_h as usize
    }

    /// Inverse of [`Truncation::beam_index`].
    pub fn beam_occupation(&self, index: usize) -> (u32, u32) {
        debug_assert!(index < self.beam_dim());
        let mut n = 0usize;
        while (n + 1) * (n + 2) / 2 <= index {
            n += 1;
        }
        let h = index - n * (n + 1) / 2;
        (n as u32, h as u32)
    }

    pub fn contains(&self, occ: &OccupationState) -> bool {
        occ.beam_total(Beam::A) <= self.n_max && occ.beam_total(Beam::B) <= self.n_max
    }

    pub fn index_of(&self, occ: &OccupationState) -> Option<usize> {
        if !self.contains(occ) {
            return None;
        }
        let a = self.beam_index(occ.beam_total(Beam::A), occ.n_ah);
        let b = self.beam_index(occ.beam_total(Beam::B), occ.n_bh);
        Some(a * self.beam_dim() + b)
    }

    pub fn occupation(&self, index: usize) -> OccupationState {
        let d = self.beam_dim();
        let (na, nah) = self.beam_occupation(index / d);
        let (nb, nbh) = self.beam_occupation(index % d);
        OccupationState::new(nah, na - nah, nbh, nb - nbh)
    }

    /// Canonically ordered basis of the full four-mode space.
    pub fn enumerate_basis(&self) -> Vec<OccupationState> {
        (0..self.total_dim()).map(|i| self.occupation(i)).collect()
    }

    /// Canonically ordered basis of one beam as `(total, n_h)` pairs.
    pub fn beam_basis(&self) -> Vec<(u32, u32)> {
        (0..self.beam_dim()).map(|i| self.beam_occupation(i)).collect()
    }
}

/// Creation or annihilation operator of one polarization mode on the
/// single-beam space. Raising a state across the per-beam cutoff yields zero.
pub fn beam_ladder(pol: Polarization, kind: Ladder, trunc: &Truncation) -> SparseOperator {
    let d = trunc.beam_dim();
    let mut triplets = Vec::new();
    for col in 0..d {
        let (n, h) = trunc.beam_occupation(col);
        let v = n - h;
        let (nh2, nv2, amp) = match (pol, kind) {
            (Polarization::H, Ladder::Raise) => (h + 1, v, ((h + 1) as f64).sqrt()),
            (Polarization::V, Ladder::Raise) => (h, v + 1, ((v + 1) as f64).sqrt()),
            (Polarization::H, Ladder::Lower) => {
                if h == 0 {
                    continue;
                }
                (h - 1, v, (h as f64).sqrt())
            }
            (Polarization::V, Ladder::Lower) => {
                if v == 0 {
                    continue;
                }
                (h, v - 1, (v as f64).sqrt())
            }
        };
        if nh2 + nv2 > trunc.n_max() {
            continue;
        }
        let row = trunc.beam_index(nh2 + nv2, nh2);
        triplets.push((row, col, Complex64::new(amp, 0.0)));
    }
    SparseOperator::from_triplets(d, triplets)
}

/// Ladder operator of one mode on the full four-mode space.
pub fn ladder(mode: ModeId, kind: Ladder, trunc: &Truncation) -> SparseOperator {
    lift(mode.beam, &beam_ladder(mode.pol, kind, trunc), trunc)
}

/// Diagonal total photon number on the single-beam space.
pub fn beam_number(trunc: &Truncation) -> SparseOperator {
    beam_diagonal(trunc, |n, _| n as f64)
}

/// Total photon number of one beam on the full space.
pub fn number_op(beam: Beam, trunc: &Truncation) -> SparseOperator {
    lift(beam, &beam_number(trunc), trunc)
}

/// Diagonal single-beam operator from a function of `(total, n_h)`.
pub fn beam_diagonal(trunc: &Truncation, f: impl Fn(u32, u32) -> f64) -> SparseOperator {
    let d = trunc.beam_dim();
    let diag: Vec<Complex64> = (0..d)
        .map(|i| {
            let (n, h) = trunc.beam_occupation(i);
            Complex64::new(f(n, h), 0.0)
        })
        .collect();
    SparseOperator::diagonal(&diag)
}

/// Embed a single-beam operator into the full space, acting as identity on
/// the other beam.
pub fn lift(beam: Beam, op: &SparseOperator, trunc: &Truncation) -> SparseOperator {
    let eye = SparseOperator::identity(trunc.beam_dim());
    match beam {
        Beam::A => op.kron(&eye),
        Beam::B => eye.kron(op),
    }
}

/// Unitary change of polarization basis on the single-beam space.
///
/// `u` maps mode operators as `c_i = Σ_j u[i][j] a_j` with `j ∈ {H, V}`;
/// column `beam_index(n, h)` of the result is the Fock state with `h` photons
/// in mode `c_0` and `n-h` in `c_1`, expanded over the `(H, V)` basis. The
/// result is block diagonal over beam photon-number sectors and unitary when
/// `u` is.
pub fn mode_rotation(u: &[[Complex64; 2]; 2], trunc: &Truncation) -> SparseOperator {
    let d = trunc.beam_dim();
    let c0 = (u[0][0].conj(), u[0][1].conj());
    let c1 = (u[1][0].conj(), u[1][1].conj());
    let mut triplets = Vec::new();
    for col in 0..d {
        let (n, h) = trunc.beam_occupation(col);
        let mut vec = vec![Complex64::new(0.0, 0.0); d];
        vec[0] = Complex64::new(1.0, 0.0);
        for _ in 0..h {
            vec = apply_beam_creation(c0, &vec, trunc);
        }
        for _ in 0..(n - h) {
            vec = apply_beam_creation(c1, &vec, trunc);
        }
        let norm = (factorial(h) * factorial(n - h)).sqrt();
        for (row, amp) in vec.iter().enumerate() {
            if amp.norm_sqr() > 0.0 {
                triplets.push((row, col, amp / norm));
            }
        }
    }
    SparseOperator::from_triplets(d, triplets)
}

/// Binomial photon-loss Kraus operators for one beam (both polarization
/// modes attenuated with the same transmission `eta`). The set is indexed by
/// the number of photons lost from each mode and is trace preserving on the
/// truncated space because loss only lowers photon numbers.
pub fn loss_kraus(eta: f64, trunc: &Truncation) -> Vec<SparseOperator> {
    let d = trunc.beam_dim();
    let n_max = trunc.n_max();
    let mut kraus = Vec::new();
    for k_h in 0..=n_max {
        for k_v in 0..=n_max {
            let mut triplets = Vec::new();
            for col in 0..d {
                let (n, h) = trunc.beam_occupation(col);
                let v = n - h;
                if k_h > h || k_v > v {
                    continue;
                }
                let amp = (binomial(h, k_h)
                    * eta.powi((h - k_h) as i32)
                    * (1.0 - eta).powi(k_h as i32)
                    * binomial(v, k_v)
                    * eta.powi((v - k_v) as i32)
                    * (1.0 - eta).powi(k_v as i32))
                .sqrt();
                if amp == 0.0 {
                    continue;
                }
                let row = trunc.beam_index(n - k_h - k_v, h - k_h);
                triplets.push((row, col, Complex64::new(amp, 0.0)));
            }
            if !triplets.is_empty() {
                kraus.push(SparseOperator::from_triplets(d, triplets));
            }
        }
    }
    kraus
}

fn apply_beam_creation(
    coeff: (Complex64, Complex64),
    vec: &[Complex64],
    trunc: &Truncation,
) -> Vec<Complex64> {
    let d = trunc.beam_dim();
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    for (i, amp) in vec.iter().enumerate() {
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let (n, h) = trunc.beam_occupation(i);
        if n + 1 > trunc.n_max() {
            continue;
        }
        let j_h = trunc.beam_index(n + 1, h + 1);
        out[j_h] += coeff.0 * amp * ((h + 1) as f64).sqrt();
        let j_v = trunc.beam_index(n + 1, h);
        out[j_v] += coeff.1 * amp * ((n - h + 1) as f64).sqrt();
    }
    out
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn basis_sizes_match_closed_form() {
        assert_eq!(Truncation::new(0).enumerate_basis().len(), 1);
        assert_eq!(Truncation::new(1).enumerate_basis().len(), 9);
        assert_eq!(Truncation::new(2).enumerate_basis().len(), 36);
    }

    #[test]
    fn basis_order_is_lexicographic_in_documented_tuple() {
        let trunc = Truncation::new(2);
        let basis = trunc.enumerate_basis();
        let keys: Vec<_> = basis
            .iter()
            .map(|o| (o.beam_total(Beam::A), o.n_ah, o.beam_total(Beam::B), o.n_bh))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn index_roundtrip_is_a_bijection() {
        for n_max in 0..=5u32 {
            let trunc = Truncation::new(n_max);
            for (i, occ) in trunc.enumerate_basis().iter().enumerate() {
                assert_eq!(trunc.index_of(occ), Some(i));
                assert_eq!(trunc.occupation(i), *occ);
            }
        }
    }

    #[test]
    fn out_of_truncation_occupation_has_no_index() {
        let trunc = Truncation::new(1);
        assert_eq!(trunc.index_of(&OccupationState::new(1, 1, 0, 0)), None);
    }

    #[test]
    fn raising_matrix_elements() {
        let trunc = Truncation::new(2);
        let up = ladder(ModeId::new(Beam::A, Polarization::H), Ladder::Raise, &trunc);
        let vac = trunc.index_of(&OccupationState::new(0, 0, 0, 0)).unwrap();
        let one = trunc.index_of(&OccupationState::new(1, 0, 0, 0)).unwrap();
        let two = trunc.index_of(&OccupationState::new(2, 0, 0, 0)).unwrap();
        assert_relative_eq!(up.get(one, vac).re, 1.0, max_relative = 1e-15);
        assert_relative_eq!(up.get(two, one).re, 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn lowering_vacuum_gives_zero_and_raising_truncates() {
        let trunc = Truncation::new(1);
        let down = ladder(ModeId::new(Beam::B, Polarization::V), Ladder::Lower, &trunc);
        let vac = trunc.index_of(&OccupationState::new(0, 0, 0, 0)).unwrap();
        for r in 0..trunc.total_dim() {
            assert_eq!(down.get(r, vac), Complex64::new(0.0, 0.0));
        }
        let up = ladder(ModeId::new(Beam::B, Polarization::V), Ladder::Raise, &trunc);
        let one = trunc.index_of(&OccupationState::new(0, 0, 0, 1)).unwrap();
        for r in 0..trunc.total_dim() {
            assert_eq!(up.get(r, one), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn lower_is_adjoint_of_raise() {
        let trunc = Truncation::new(3);
        for mode in ModeId::ALL {
            let up = ladder(mode, Ladder::Raise, &trunc);
            let down = ladder(mode, Ladder::Lower, &trunc);
            assert_eq!(up.adjoint().max_abs_diff(&down), 0.0);
        }
    }

    #[test]
    fn number_operator_counts_photons_and_beam_numbers_commute() {
        let trunc = Truncation::new(2);
        let na = number_op(Beam::A, &trunc);
        let idx = trunc.index_of(&OccupationState::new(1, 1, 0, 0)).unwrap();
        assert_relative_eq!(na.get(idx, idx).re, 2.0, max_relative = 1e-15);
        let vac = trunc.index_of(&OccupationState::new(0, 0, 0, 0)).unwrap();
        assert_eq!(na.get(vac, vac), Complex64::new(0.0, 0.0));

        let nb = number_op(Beam::B, &trunc);
        let ab = na.compose(&nb).unwrap();
        let ba = nb.compose(&na).unwrap();
        assert_eq!(ab.max_abs_diff(&ba), 0.0);
    }

    #[test]
    fn number_via_ladder_products() {
        let trunc = Truncation::new(3);
        for beam in [Beam::A, Beam::B] {
            let built: SparseOperator = [Polarization::H, Polarization::V]
                .iter()
                .map(|&pol| {
                    let mode = ModeId::new(beam, pol);
                    ladder(mode, Ladder::Raise, &trunc)
                        .compose(&ladder(mode, Ladder::Lower, &trunc))
                        .unwrap()
                })
                .reduce(|a, b| a.add(&b).unwrap())
                .unwrap();
            assert!(built.max_abs_diff(&number_op(beam, &trunc)) < 1e-14);
        }
    }

    #[test]
    fn mode_rotation_is_unitary_and_identity_for_trivial_map() {
        let trunc = Truncation::new(4);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let eye = mode_rotation(&[[one, zero], [zero, one]], &trunc);
        assert!(eye.max_abs_diff(&SparseOperator::identity(trunc.beam_dim())) < 1e-15);

        let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let w = mode_rotation(&[[s, s], [s, -s]], &trunc);
        let wtw = w.adjoint().compose(&w).unwrap();
        assert!(wtw.max_abs_diff(&SparseOperator::identity(trunc.beam_dim())) < 1e-12);
    }

    #[test]
    fn loss_kraus_resolve_identity() {
        let trunc = Truncation::new(4);
        for eta in [0.0, 0.3, 1.0] {
            let sum = loss_kraus(eta, &trunc)
                .iter()
                .map(|k| k.adjoint().compose(k).unwrap())
                .reduce(|a, b| a.add(&b).unwrap())
                .unwrap();
            assert!(sum.max_abs_diff(&SparseOperator::identity(trunc.beam_dim())) < 1e-12);
        }
    }
}
