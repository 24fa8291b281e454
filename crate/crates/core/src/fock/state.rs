//! Quantum states over the truncated two-beam space.
//!
//! Besides dense pure vectors and density matrices, states keep three
//! structured forms that stay cheap at large truncation: the maximally mixed
//! state, convex blends, and a symbolic photon-loss wrapper evaluated in the
//! Heisenberg picture. All observable quantities (expectations, Kronecker
//! moments, count distributions) are defined recursively over these forms,
//! so a blend of a 10^6-dimensional pure state with white noise never
//! materializes a density matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

use super::{loss_kraus, Beam, OccupationState, SparseOperator, Truncation};

/// Largest dimension for which dense density matrices may be materialized.
pub const DENSE_DIM_CAP: usize = 4096;

/// Norm / trace deviation tolerated by state constructors.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Most negative eigenvalue tolerated by the positivity check.
pub const PSD_TOL: f64 = -1e-10;

/// Imaginary residue tolerated in expectations of hermitian operators.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone)]
pub(crate) enum StateData {
    Pure(Vec<Complex64>),
    Mixed(CMat),
    MaximallyMixed,
    Blend(Vec<(f64, StateData)>),
    Lossy { inner: Box<StateData>, eta_a: f64, eta_b: f64 },
}

#[derive(Debug, Clone)]
pub struct QuantumState {
    data: StateData,
    truncation: Truncation,
    tail_mass: f64,
}

impl QuantumState {
    /// Wraps a unit-norm amplitude vector over the canonical basis.
    pub fn from_pure(amplitudes: Vec<Complex64>, trunc: Truncation) -> Result<Self> {
        if amplitudes.len() != trunc.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: trunc.total_dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        Ok(Self { data: StateData::Pure(amplitudes), truncation: trunc, tail_mass: 0.0 })
    }

    /// Wraps a unit-trace hermitian matrix. Positivity is not verified here;
    /// [`QuantumState::validate`] checks it.
    pub fn from_density_matrix(matrix: CMat, trunc: Truncation) -> Result<Self> {
        if matrix.nrows() != trunc.total_dim() || matrix.ncols() != trunc.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: trunc.total_dim(),
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let herm_dev = hermiticity_deviation(&matrix);
        if herm_dev > super::op::HERMITICITY_TOL {
            return Err(Error::InvalidParameter(format!(
                "density matrix deviates from hermitian by {herm_dev:e}"
            )));
        }
        let tr: Complex64 = matrix.diagonal().iter().sum();
        if (tr.re - 1.0).abs() > NORMALIZATION_TOL || tr.im.abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized((tr - Complex64::new(1.0, 0.0)).norm()));
        }
        Ok(Self { data: StateData::Mixed(matrix), truncation: trunc, tail_mass: 0.0 })
    }

    /// Computational basis state with the given occupation.
    pub fn basis_state(occ: OccupationState, trunc: Truncation) -> Result<Self> {
        let idx = trunc.index_of(&occ).ok_or_else(|| {
            Error::InvalidParameter(format!("occupation {occ:?} exceeds n_max={}", trunc.n_max()))
        })?;
        let mut v = vec![Complex64::new(0.0, 0.0); trunc.total_dim()];
        v[idx] = Complex64::new(1.0, 0.0);
        Self::from_pure(v, trunc)
    }

    pub fn vacuum(trunc: Truncation) -> Self {
        Self::basis_state(OccupationState::new(0, 0, 0, 0), trunc).expect("vacuum always fits")
    }

    pub fn maximally_mixed(trunc: Truncation) -> Self {
        Self { data: StateData::MaximallyMixed, truncation: trunc, tail_mass: 0.0 }
    }

    /// Convex combination of states on the same truncation.
    pub(crate) fn blend(parts: Vec<(f64, QuantumState)>) -> Result<Self> {
        let trunc = parts
            .first()
            .map(|(_, s)| s.truncation)
            .ok_or_else(|| Error::InvalidParameter("blend of zero states".into()))?;
        let mut weight_sum = 0.0;
        let mut tail = 0.0;
        for (w, s) in &parts {
            if s.truncation != trunc {
                return Err(Error::TruncationMismatch {
                    expected: trunc.n_max() as usize,
                    found: s.truncation.n_max() as usize,
                });
            }
            if !(*w >= 0.0 && *w <= 1.0 + NORMALIZATION_TOL) {
                return Err(Error::InvalidParameter(format!("blend weight {w} outside [0, 1]")));
            }
            weight_sum += w;
            tail += w * s.tail_mass;
        }
        if (weight_sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized((weight_sum - 1.0).abs()));
        }
        let data = StateData::Blend(parts.into_iter().map(|(w, s)| (w, s.data)).collect());
        Ok(Self { data, truncation: trunc, tail_mass: tail })
    }

    /// Symbolic per-beam photon loss applied on top of `inner`.
    pub(crate) fn lossy(inner: QuantumState, eta_a: f64, eta_b: f64) -> Result<Self> {
        for eta in [eta_a, eta_b] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(Error::InvalidParameter(format!("transmission {eta} outside [0, 1]")));
            }
        }
        if eta_a == 1.0 && eta_b == 1.0 {
            return Ok(inner);
        }
        Ok(Self {
            tail_mass: inner.tail_mass,
            truncation: inner.truncation,
            data: StateData::Lossy { inner: Box::new(inner.data), eta_a, eta_b },
        })
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Probability weight of the untruncated state living above the cutoff,
    /// recorded by constructors that renormalize.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub(crate) fn with_tail_mass(mut self, tail: f64) -> Self {
        self.tail_mass = tail;
        self
    }

    pub fn is_pure_form(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn as_pure(&self) -> Option<&[Complex64]> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            _ => None,
        }
    }

    /// ⟨op⟩ on this state; `op` lives on the full four-mode space. For
    /// operators flagged hermitian the imaginary part must be a small
    /// residue and is discarded.
    pub fn expectation(&self, op: &SparseOperator) -> Result<Complex64> {
        if op.dim() != self.truncation.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.truncation.total_dim(),
                found: op.dim(),
            });
        }
        let raw = self.data.expectation(op, &self.truncation)?;
        finish_expectation(raw, op.hermitian())
    }

    /// ⟨a ⊗ b⟩ where `a` acts on beam A and `b` on beam B, both given on the
    /// single-beam space. This is the workhorse for moment evaluation: it
    /// never forms full-space operators.
    pub fn expectation_kron(&self, a: &SparseOperator, b: &SparseOperator) -> Result<Complex64> {
        let bd = self.truncation.beam_dim();
        for op in [a, b] {
            if op.dim() != bd {
                return Err(Error::DimensionMismatch { expected: bd, found: op.dim() });
            }
        }
        let raw = self.data.expectation_kron(a, b, &self.truncation)?;
        finish_expectation(raw, a.hermitian() && b.hermitian())
    }

    /// Joint photon-count distribution over the canonical basis after the
    /// same polarization-basis change `w_beam` on both beams. `w_beam` is a
    /// single-beam rotation as built by [`super::mode_rotation`].
    pub fn measurement_probabilities(&self, w_beam: &SparseOperator) -> Result<Vec<f64>> {
        let bd = self.truncation.beam_dim();
        if w_beam.dim() != bd {
            return Err(Error::DimensionMismatch { expected: bd, found: w_beam.dim() });
        }
        self.data.probabilities(w_beam, &self.truncation)
    }

    /// Dense density matrix; available below [`DENSE_DIM_CAP`].
    pub fn to_density_matrix(&self) -> Result<CMat> {
        let dim = self.truncation.total_dim();
        if dim > DENSE_DIM_CAP {
            return Err(Error::DenseLimitExceeded { dim, cap: DENSE_DIM_CAP });
        }
        Ok(self.data.densify(&self.truncation))
    }

    /// Tr ρ²; requires materialization.
    pub fn purity(&self) -> Result<f64> {
        if let StateData::Pure(_) = self.data {
            return Ok(1.0);
        }
        let rho = self.to_density_matrix()?;
        Ok(rho.iter().map(|v| v.norm_sqr()).sum())
    }

    /// |⟨self|other⟩|² for two pure-form states.
    pub fn fidelity_pure(&self, other: &Self) -> Result<f64> {
        match (self.as_pure(), other.as_pure()) {
            (Some(a), Some(b)) if a.len() == b.len() => {
                let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                Ok(ip.norm_sqr())
            }
            _ => Err(Error::InvalidParameter("fidelity_pure needs two pure states".into())),
        }
    }

    /// Largest entrywise difference between the dense forms of two states.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        let a = self.to_density_matrix()?;
        let b = other.to_density_matrix()?;
        if a.nrows() != b.nrows() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
        }
        Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }

    /// Checks normalization, hermiticity, positivity (where materializable)
    /// and structural weight constraints.
    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        if matches!(self.data, StateData::Mixed(_) | StateData::Blend(_) | StateData::Lossy { .. })
            && self.truncation.total_dim() <= DENSE_DIM_CAP
        {
            let rho = self.to_density_matrix()?;
            let min_eig = rho
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |m, &e| m.min(e));
            if min_eig < PSD_TOL {
                return Err(Error::NumericalGuard {
                    context: "density matrix positivity".into(),
                    value: min_eig,
                });
            }
        }
        Ok(())
    }
}

impl StateData {
    fn expectation(&self, op: &SparseOperator, trunc: &Truncation) -> Result<Complex64> {
        match self {
            StateData::Pure(psi) => {
                let opsi = op.apply(psi);
                Ok(psi.iter().zip(&opsi).map(|(a, b)| a.conj() * b).sum())
            }
            StateData::Mixed(rho) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (r, c, v) in op.iter() {
                    acc += v * rho[(c, r)];
                }
                Ok(acc)
            }
            StateData::MaximallyMixed => Ok(op.trace() / trunc.total_dim() as f64),
            StateData::Blend(parts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (w, part) in parts {
                    acc += *w * part.expectation(op, trunc)?;
                }
                Ok(acc)
            }
            StateData::Lossy { inner, eta_a, eta_b } => {
                let mut heisenberg = op.clone();
                for (beam, eta) in [(Beam::A, *eta_a), (Beam::B, *eta_b)] {
                    if eta < 1.0 {
                        heisenberg = heisenberg_full(&heisenberg, beam, eta, trunc);
                    }
                }
                inner.expectation(&heisenberg, trunc)
            }
        }
    }

    fn expectation_kron(
        &self,
        a: &SparseOperator,
        b: &SparseOperator,
        trunc: &Truncation,
    ) -> Result<Complex64> {
        match self {
            StateData::Pure(psi) => Ok(kron_form_pure(psi, a, b)),
            StateData::Mixed(rho) => {
                let bd = a.dim();
                let mut acc = Complex64::new(0.0, 0.0);
                for (ra, ca, va) in a.iter() {
                    for (rb, cb, vb) in b.iter() {
                        acc += va * vb * rho[(ca * bd + cb, ra * bd + rb)];
                    }
                }
                Ok(acc)
            }
            StateData::MaximallyMixed => {
                Ok(a.trace() * b.trace() / trunc.total_dim() as f64)
            }
            StateData::Blend(parts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (w, part) in parts {
                    acc += *w * part.expectation_kron(a, b, trunc)?;
                }
                Ok(acc)
            }
            StateData::Lossy { inner, eta_a, eta_b } => {
                let ha = heisenberg_beam(a, *eta_a, trunc);
                let hb = heisenberg_beam(b, *eta_b, trunc);
                inner.expectation_kron(&ha, &hb, trunc)
            }
        }
    }

    fn probabilities(&self, w: &SparseOperator, trunc: &Truncation) -> Result<Vec<f64>> {
        let bd = trunc.beam_dim();
        let dim = trunc.total_dim();
        match self {
            StateData::Pure(psi) => {
                // Ψ' = W† Ψ conj(W), then p = |Ψ'|² entrywise.
                let mut t = vec![Complex64::new(0.0, 0.0); dim];
                for (i, u, v) in w.iter() {
                    let vc = v.conj();
                    let src = &psi[i * bd..(i + 1) * bd];
                    let dst = &mut t[u * bd..(u + 1) * bd];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += vc * s;
                    }
                }
                let mut out = vec![Complex64::new(0.0, 0.0); dim];
                for (j, u2, v) in w.iter() {
                    let vc = v.conj();
                    for row in 0..bd {
                        out[row * bd + u2] += t[row * bd + j] * vc;
                    }
                }
                Ok(out.iter().map(|z| z.norm_sqr()).collect())
            }
            StateData::Mixed(rho) => {
                let wcols = columns_of(w);
                let mut probs = vec![0.0f64; dim];
                for (k, p) in probs.iter_mut().enumerate() {
                    let (i, j) = (k / bd, k % bd);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(ra, va) in &wcols[i] {
                        for &(rb, vb) in &wcols[j] {
                            let bra = (va * vb).conj();
                            let x = ra * bd + rb;
                            for &(sa, ua) in &wcols[i] {
                                for &(sb, ub) in &wcols[j] {
                                    acc += bra * rho[(x, sa * bd + sb)] * ua * ub;
                                }
                            }
                        }
                    }
                    *p = acc.re.max(0.0);
                }
                Ok(probs)
            }
            StateData::MaximallyMixed => Ok(vec![1.0 / dim as f64; dim]),
            StateData::Blend(parts) => {
                let mut probs = vec![0.0f64; dim];
                for (weight, part) in parts {
                    for (acc, p) in probs.iter_mut().zip(part.probabilities(w, trunc)?) {
                        *acc += weight * p;
                    }
                }
                Ok(probs)
            }
            StateData::Lossy { inner, eta_a, eta_b } => {
                // Balanced per-beam loss commutes with polarization rotations
                // and acts on count distributions as binomial thinning.
                let base = inner.probabilities(w, trunc)?;
                Ok(thin_probabilities(&base, *eta_a, *eta_b, trunc))
            }
        }
    }

    fn densify(&self, trunc: &Truncation) -> CMat {
        let dim = trunc.total_dim();
        match self {
            StateData::Pure(psi) => {
                let mut rho = CMat::from_element(dim, dim, Complex64::new(0.0, 0.0));
                for (i, a) in psi.iter().enumerate() {
                    if a.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (j, b) in psi.iter().enumerate() {
                        rho[(i, j)] = a * b.conj();
                    }
                }
                rho
            }
            StateData::Mixed(rho) => rho.clone(),
            StateData::MaximallyMixed => {
                CMat::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0))
            }
            StateData::Blend(parts) => {
                let mut rho = CMat::from_element(dim, dim, Complex64::new(0.0, 0.0));
                for (w, part) in parts {
                    rho += part.densify(trunc) * Complex64::new(*w, 0.0);
                }
                rho
            }
            StateData::Lossy { inner, eta_a, eta_b } => {
                let mut rho = inner.densify(trunc);
                for (beam, eta) in [(Beam::A, *eta_a), (Beam::B, *eta_b)] {
                    if eta < 1.0 {
                        rho = apply_channel_dense(&rho, beam, eta, trunc);
                    }
                }
                rho
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            StateData::Pure(psi) => {
                let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::NotNormalized((norm - 1.0).abs()));
                }
            }
            StateData::Mixed(rho) => {
                let herm = hermiticity_deviation(rho);
                if herm > super::op::HERMITICITY_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "density matrix deviates from hermitian by {herm:e}"
                    )));
                }
                let tr: Complex64 = rho.diagonal().iter().sum();
                if (tr.re - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::NotNormalized((tr.re - 1.0).abs()));
                }
            }
            StateData::MaximallyMixed => {}
            StateData::Blend(parts) => {
                let mut sum = 0.0;
                for (w, part) in parts {
                    if *w < 0.0 {
                        return Err(Error::InvalidParameter(format!("negative blend weight {w}")));
                    }
                    sum += w;
                    part.validate()?;
                }
                if (sum - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::NotNormalized((sum - 1.0).abs()));
                }
            }
            StateData::Lossy { inner, eta_a, eta_b } => {
                for eta in [eta_a, eta_b] {
                    if !(0.0..=1.0).contains(eta) {
                        return Err(Error::InvalidParameter(format!(
                            "transmission {eta} outside [0, 1]"
                        )));
                    }
                }
                inner.validate()?;
            }
        }
        Ok(())
    }
}

fn finish_expectation(raw: Complex64, hermitian: bool) -> Result<Complex64> {
    if hermitian {
        if raw.im.abs() >= IMAG_RESIDUE_TOL {
            return Err(Error::ImaginaryResidue(raw.im));
        }
        Ok(Complex64::new(raw.re, 0.0))
    } else {
        Ok(raw)
    }
}

/// ⟨ψ|(a ⊗ b)|ψ⟩ via the beam-index reshape Ψ of ψ: tr(Ψ† a Ψ bᵀ).
fn kron_form_pure(psi: &[Complex64], a: &SparseOperator, b: &SparseOperator) -> Complex64 {
    let bd = a.dim();
    let mut t = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (r, m, v) in a.iter() {
        let src = &psi[m * bd..(m + 1) * bd];
        let dst = &mut t[r * bd..(r + 1) * bd];
        for (d, s) in dst.iter_mut().zip(src) {
            *d += v * s;
        }
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, c, bv) in b.iter() {
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..bd {
            s += psi[i * bd + j].conj() * t[i * bd + c];
        }
        acc += bv * s;
    }
    acc
}

/// Adjoint (Heisenberg) action of the balanced-loss channel on a single-beam
/// operator: Σ_k K† op K.
fn heisenberg_beam(op: &SparseOperator, eta: f64, trunc: &Truncation) -> SparseOperator {
    if eta == 1.0 {
        return op.clone();
    }
    let mut acc = SparseOperator::zero(op.dim());
    for k in loss_kraus(eta, trunc) {
        let term = k.adjoint().compose(op).expect("beam dims").compose(&k).expect("beam dims");
        acc = acc.add(&term).expect("beam dims");
    }
    if op.hermitian() {
        acc = symmetrized_hermitian(acc);
    }
    acc
}

/// The Kraus sums above are hermitian exactly, but the (r,c) and (c,r)
/// entries accumulate in different orders, leaving last-ulp asymmetry that
/// grows with entry magnitude. Averaging with the adjoint removes it without
/// perturbing the hermitian part.
fn symmetrized_hermitian(op: SparseOperator) -> SparseOperator {
    op.add(&op.adjoint())
        .expect("same dims")
        .scale(Complex64::new(0.5, 0.0))
        .flagged_hermitian()
}

/// Same as [`heisenberg_beam`] but for a full-space operator and one beam.
fn heisenberg_full(
    op: &SparseOperator,
    beam: Beam,
    eta: f64,
    trunc: &Truncation,
) -> SparseOperator {
    let mut acc = SparseOperator::zero(op.dim());
    for k in loss_kraus(eta, trunc) {
        let lifted = super::lift(beam, &k, trunc);
        let term = lifted
            .adjoint()
            .compose(op)
            .expect("full dims")
            .compose(&lifted)
            .expect("full dims");
        acc = acc.add(&term).expect("full dims");
    }
    if op.hermitian() {
        acc = symmetrized_hermitian(acc);
    }
    acc
}

/// Schrödinger action of balanced per-beam loss on a dense density matrix.
fn apply_channel_dense(rho: &CMat, beam: Beam, eta: f64, trunc: &Truncation) -> CMat {
    let dim = rho.nrows();
    let mut out = CMat::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for k in loss_kraus(eta, trunc) {
        let lifted = super::lift(beam, &k, trunc);
        // t = K ρ, column by column
        let mut t = CMat::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for j in 0..dim {
            let col: Vec<Complex64> = rho.column(j).iter().copied().collect();
            let res = lifted.apply(&col);
            for (i, v) in res.into_iter().enumerate() {
                t[(i, j)] = v;
            }
        }
        // out += t K†
        for (r, c, v) in lifted.iter() {
            let vc = v.conj();
            for i in 0..dim {
                out[(i, r)] += t[(i, c)] * vc;
            }
        }
    }
    out
}

/// Binomial thinning of a joint count distribution: every photon survives
/// independently with probability η of its beam.
fn thin_probabilities(probs: &[f64], eta_a: f64, eta_b: f64, trunc: &Truncation) -> Vec<f64> {
    let n_max = trunc.n_max();
    let pmf_a = binomial_table(n_max, eta_a);
    let pmf_b = binomial_table(n_max, eta_b);
    let mut out = vec![0.0f64; probs.len()];
    for (idx, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let occ = trunc.occupation(idx);
        for (k_ah, &w_ah) in pmf_a[occ.n_ah as usize].iter().enumerate() {
            if w_ah == 0.0 {
                continue;
            }
            for (k_av, &w_av) in pmf_a[occ.n_av as usize].iter().enumerate() {
                if w_av == 0.0 {
                    continue;
                }
                for (k_bh, &w_bh) in pmf_b[occ.n_bh as usize].iter().enumerate() {
                    if w_bh == 0.0 {
                        continue;
                    }
                    for (k_bv, &w_bv) in pmf_b[occ.n_bv as usize].iter().enumerate() {
                        if w_bv == 0.0 {
                            continue;
                        }
                        let target = OccupationState::new(
                            k_ah as u32,
                            k_av as u32,
                            k_bh as u32,
                            k_bv as u32,
                        );
                        let t = trunc.index_of(&target).expect("thinning lowers counts");
                        out[t] += p * w_ah * w_av * w_bh * w_bv;
                    }
                }
            }
        }
    }
    out
}

/// `table[n][k]` = P(k survivors | n photons, transmission eta).
fn binomial_table(n_max: u32, eta: f64) -> Vec<Vec<f64>> {
    (0..=n_max)
        .map(|n| {
            (0..=n)
                .map(|k| {
                    super::binomial(n, k) * eta.powi(k as i32) * (1.0 - eta).powi((n - k) as i32)
                })
                .collect()
        })
        .collect()
}

fn columns_of(op: &SparseOperator) -> Vec<Vec<(usize, Complex64)>> {
    let mut cols = vec![Vec::new(); op.dim()];
    for (r, c, v) in op.iter() {
        cols[c].push((r, v));
    }
    cols
}

fn hermiticity_deviation(m: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
