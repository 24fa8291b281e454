//! Stokes observables on the truncated beam space.
//!
//! Two families are built per beam. The standard operators are photon-number
//! differences between orthogonal polarization modes, one per mutually
//! unbiased basis:
//!
//! * `Θ₁ = a†_H a_V + a†_V a_H` (diagonal/antidiagonal),
//! * `Θ₂ = −i(a†_H a_V − a†_V a_H)` (right/left circular),
//! * `Θ₃ = a†_H a_H − a†_V a_V` (horizontal/vertical),
//!
//! with `Θ₀ = N̂` the total photon number. The normalized family divides by
//! the total photon number and projects out the beam vacuum,
//! `Ŝᵢ = Π̂ (Θᵢ / N̂) Π̂`, which is well defined blockwise because every `Θᵢ`
//! conserves the beam photon number. `Ŝ₀ = Π̂`.
//!
//! The sign convention for `Θ₂` (which the witnesses are insensitive to — they
//! only use squares and products over matching indices) is fixed by
//! [`basis_unitary`]: index 2 measures in the `{R, L}` basis with
//! `a_R = (a_H − i a_V)/√2`, so `Θ₂|1_R⟩ = +|1_R⟩`.
//!
//! Two operator identities pin the algebra and are checked by
//! [`verify_identities`]:
//!
//! * `Σᵢ Θᵢ² = N̂(N̂ + 2)`,
//! * `Σᵢ Ŝᵢ² = Π̂ + 2 Π̂ (1/N̂) Π̂`.
//!
//! Both are exact on the truncated space (no truncation error) because every
//! participating operator is block diagonal in beam photon number.

use num_complex::Complex64;

use crate::fock::{beam_diagonal, beam_ladder, lift, Beam, Ladder, Polarization, SparseOperator, Truncation};

/// Mutually unbiased polarization basis label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StokesIndex {
    /// i = 1: diagonal/antidiagonal (±45°).
    Diagonal,
    /// i = 2: right/left circular.
    Circular,
    /// i = 3: horizontal/vertical.
    Rectilinear,
}

impl StokesIndex {
    pub const ALL: [StokesIndex; 3] =
        [StokesIndex::Diagonal, StokesIndex::Circular, StokesIndex::Rectilinear];

    /// Zero-based position, used for array storage and RNG stream selection.
    pub const fn axis(self) -> usize {
        match self {
            StokesIndex::Diagonal => 0,
            StokesIndex::Circular => 1,
            StokesIndex::Rectilinear => 2,
        }
    }

    /// Conventional label 1, 2, 3.
    pub const fn number(self) -> u8 {
        self.axis() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        StokesIndex::ALL.get(n.checked_sub(1)? as usize).copied()
    }
}

impl std::fmt::Display for StokesIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// 2×2 unitary mapping mode operators into measurement basis `i`:
/// `c_u = Σ_v U[u][v] a_v` with `u = 0` the basis' "+" mode (eigenvalue +1 of
/// the corresponding single-photon Stokes operator) and `v ∈ {H, V}`.
pub fn basis_unitary(i: StokesIndex) -> [[Complex64; 2]; 2] {
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mi = Complex64::new(0.0, -1.0);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match i {
        StokesIndex::Diagonal => [[s, s], [s, -s]],
        StokesIndex::Circular => [[s, s * mi], [s, -s * mi]],
        StokesIndex::Rectilinear => [[one, zero], [zero, one]],
    }
}

/// Standard Stokes operator on the single-beam space.
pub fn beam_standard(i: StokesIndex, trunc: &Truncation) -> SparseOperator {
    match i {
        StokesIndex::Diagonal => {
            let hv = beam_ladder(Polarization::H, Ladder::Raise, trunc)
                .compose(&beam_ladder(Polarization::V, Ladder::Lower, trunc))
                .expect("same truncation");
            let vh = beam_ladder(Polarization::V, Ladder::Raise, trunc)
                .compose(&beam_ladder(Polarization::H, Ladder::Lower, trunc))
                .expect("same truncation");
            hv.add(&vh).expect("same truncation").flagged_hermitian()
        }
        StokesIndex::Circular => {
            let hv = beam_ladder(Polarization::H, Ladder::Raise, trunc)
                .compose(&beam_ladder(Polarization::V, Ladder::Lower, trunc))
                .expect("same truncation");
            let vh = beam_ladder(Polarization::V, Ladder::Raise, trunc)
                .compose(&beam_ladder(Polarization::H, Ladder::Lower, trunc))
                .expect("same truncation");
            hv.scale(Complex64::new(0.0, -1.0))
                .add(&vh.scale(Complex64::new(0.0, 1.0)))
                .expect("same truncation")
                .flagged_hermitian()
        }
        StokesIndex::Rectilinear => beam_diagonal(trunc, |n, h| (2 * h) as f64 - n as f64),
    }
}

/// Normalized Stokes operator `Π̂ (Θᵢ / N̂) Π̂` on the single-beam space:
/// the standard operator scaled by `1/n` on each `n ≥ 1` photon-number block
/// and zero on the beam vacuum.
pub fn beam_normalized(i: StokesIndex, trunc: &Truncation) -> SparseOperator {
    let std_op = beam_standard(i, trunc);
    let triplets: Vec<_> = std_op
        .iter()
        .filter_map(|(r, c, v)| {
            let (n, _) = trunc.beam_occupation(r);
            (n > 0).then(|| (r, c, v / n as f64))
        })
        .collect();
    SparseOperator::from_triplets(std_op.dim(), triplets).flagged_hermitian()
}

/// Projector onto the beam's non-vacuum subspace, `Π̂ = 𝕀 − |Ω⟩⟨Ω|`.
pub fn beam_vacuum_projector(trunc: &Truncation) -> SparseOperator {
    beam_diagonal(trunc, |n, _| f64::from(n > 0))
}

/// `Π̂ (1/N̂) Π̂`: `1/n` on the `n ≥ 1` blocks, zero on vacuum.
pub fn beam_pi_inv_n_pi(trunc: &Truncation) -> SparseOperator {
    beam_diagonal(trunc, |n, _| if n > 0 { 1.0 / n as f64 } else { 0.0 })
}

/// Standard Stokes operator of one beam, embedded in the full four-mode space.
pub fn stokes_standard(beam: Beam, i: StokesIndex, trunc: &Truncation) -> SparseOperator {
    lift(beam, &beam_standard(i, trunc), trunc)
}

/// Normalized Stokes operator of one beam on the full four-mode space.
pub fn stokes_normalized(beam: Beam, i: StokesIndex, trunc: &Truncation) -> SparseOperator {
    lift(beam, &beam_normalized(i, trunc), trunc)
}

/// Beam vacuum projector on the full four-mode space.
pub fn vacuum_projector(beam: Beam, trunc: &Truncation) -> SparseOperator {
    lift(beam, &beam_vacuum_projector(trunc), trunc)
}

/// The full bundle of beam-space observables used by witness evaluation.
/// The matrices are beam independent (both beams share one mode structure);
/// the beam tag only matters once operators are lifted or paired in Kronecker
/// products.
#[derive(Debug, Clone)]
pub struct BeamStokes {
    pub standard: [SparseOperator; 3],
    pub standard_sq: [SparseOperator; 3],
    pub normalized: [SparseOperator; 3],
    pub normalized_sq: [SparseOperator; 3],
    pub vacuum_projector: SparseOperator,
    pub number: SparseOperator,
    pub number_sq: SparseOperator,
    pub pi_inv_n_pi: SparseOperator,
    pub identity: SparseOperator,
}

impl BeamStokes {
    pub fn build(trunc: &Truncation) -> Self {
        let standard = StokesIndex::ALL.map(|i| beam_standard(i, trunc));
        let normalized = StokesIndex::ALL.map(|i| beam_normalized(i, trunc));
        let standard_sq = [0, 1, 2].map(|i| standard[i].square());
        let normalized_sq = [0, 1, 2].map(|i| normalized[i].square());
        Self {
            standard,
            standard_sq,
            normalized,
            normalized_sq,
            vacuum_projector: beam_vacuum_projector(trunc),
            number: crate::fock::beam_number(trunc),
            number_sq: beam_diagonal(trunc, |n, _| (n as f64) * (n as f64)),
            pi_inv_n_pi: beam_pi_inv_n_pi(trunc),
            identity: SparseOperator::identity(trunc.beam_dim()),
        }
    }
}

/// One beam's observables lifted to the full four-mode space.
#[derive(Debug, Clone)]
pub struct StokesSet {
    pub beam: Beam,
    pub standard: [SparseOperator; 3],
    pub normalized: [SparseOperator; 3],
    pub vacuum_projector: SparseOperator,
    pub number: SparseOperator,
    pub pi_inv_n_pi: SparseOperator,
}

impl StokesSet {
    pub fn build(beam: Beam, trunc: &Truncation) -> Self {
        Self {
            beam,
            standard: StokesIndex::ALL.map(|i| stokes_standard(beam, i, trunc)),
            normalized: StokesIndex::ALL.map(|i| stokes_normalized(beam, i, trunc)),
            vacuum_projector: vacuum_projector(beam, trunc),
            number: crate::fock::number_op(beam, trunc),
            pi_inv_n_pi: lift(beam, &beam_pi_inv_n_pi(trunc), trunc),
        }
    }
}

/// Elementwise deviations of the two operator identities at a truncation.
#[derive(Debug, Clone, Copy)]
pub struct IdentityReport {
    pub n_max: u32,
    /// max |Σᵢ Θᵢ² − N̂(N̂+2)| over matrix entries.
    pub standard_dev: f64,
    /// max |Σᵢ Ŝᵢ² − (Π̂ + 2 Π̂ (1/N̂) Π̂)| over matrix entries.
    pub normalized_dev: f64,
}

impl IdentityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.standard_dev < tol && self.normalized_dev < tol
    }
}

/// Check both operator identities on the single-beam space (per-beam checks
/// coincide: both beams carry the same mode structure).
pub fn verify_identities(trunc: &Truncation) -> IdentityReport {
    let ops = BeamStokes::build(trunc);
    let sum_std = ops.standard_sq[0]
        .add(&ops.standard_sq[1])
        .and_then(|s| s.add(&ops.standard_sq[2]))
        .expect("same truncation");
    let rhs_std = beam_diagonal(trunc, |n, _| (n as f64) * (n as f64 + 2.0));
    let sum_norm = ops.normalized_sq[0]
        .add(&ops.normalized_sq[1])
        .and_then(|s| s.add(&ops.normalized_sq[2]))
        .expect("same truncation");
    let rhs_norm =
        beam_diagonal(trunc, |n, _| if n > 0 { 1.0 + 2.0 / n as f64 } else { 0.0 });
    IdentityReport {
        n_max: trunc.n_max(),
        standard_dev: sum_std.max_abs_diff(&rhs_std),
        normalized_dev: sum_norm.max_abs_diff(&rhs_norm),
    }
}
