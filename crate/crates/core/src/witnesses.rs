//! The ten separability conditions and their exact evaluation.
//!
//! Every condition is an inequality that all separable states satisfy, built
//! from first and second moments of the Stokes observables. `*_STD` variants
//! use the standard operators `Θᵢ`, `*_NORM` the normalized `Ŝᵢ`; writing
//! `Σᵢ` for sums over the three polarization bases and `⟨·⟩` for the state
//! average, with per-beam totals `N̂` (photon number), `Π̂` (non-vacuum
//! projector) and `Ĝ = Π̂(1/N̂)Π̂`:
//!
//! * `SIMON_STD` (≥): `Σᵢ⟨(Θᵢᴬ+Θᵢᴮ)²⟩ ≥ 2⟨N̂ᴬ+N̂ᴮ⟩`
//! * `SIMON_NORM` (≥): `Σᵢ⟨(Ŝᵢᴬ+Ŝᵢᴮ)²⟩ ≥ 2⟨Ĝᴬ+Ĝᴮ⟩`
//! * `GEN_STD` (≥): SIMON_STD with `+⟨N̂ᴬ−N̂ᴮ⟩²` on the bound
//! * `GEN_NORM` (≥): SIMON_NORM with `+⟨Π̂ᴬ−Π̂ᴮ⟩²` on the bound
//! * `CAUCHY_STD` (≤): `Σᵢ|⟨ΘᵢᴬΘᵢᴮ⟩| ≤ ⟨N̂ᴬN̂ᴮ⟩`
//! * `CAUCHY_NORM` (≤): `Σᵢ|⟨ŜᵢᴬŜᵢᴮ⟩| ≤ ⟨Π̂ᴬΠ̂ᴮ⟩`
//! * `VAR_STD` (≥): `Σᵢ⟨(Θᵢᴬ+Θᵢᴮ)²⟩ − Σᵢ⟨Θᵢᴬ+Θᵢᴮ⟩² ≥ 2⟨N̂ᴬ+N̂ᴮ⟩`
//! * `VAR_NORM` (≥): the same with `Ŝ` and `2⟨Ĝᴬ+Ĝᴮ⟩`
//! * `VAR_IMPROVED_STD` (≥): VAR_STD with the extra bound term
//!   `(√(⟨N̂ᴬ²⟩−Σᵢ⟨Θᵢᴬ⟩²) − √(⟨N̂ᴮ²⟩−Σᵢ⟨Θᵢᴮ⟩²))²`
//! * `VAR_IMPROVED_NORM` (≥): VAR_NORM with
//!   `(√(⟨Π̂ᴬ⟩−Σᵢ⟨Ŝᵢᴬ⟩²) − √(⟨Π̂ᴮ⟩−Σᵢ⟨Ŝᵢᴮ⟩²))²`
//!
//! The improved bounds dominate the plain variance bounds pointwise (the
//! extra terms are perfect squares), so their detection sets contain the
//! plain ones'. A report's `margin` is the amount by which a state violates
//! the bound (bound − LHS for ≥-type, LHS − bound for ≤-type); positive
//! margin beyond [`VIOLATION_TOL`] certifies entanglement, while margin ≤ 0
//! proves nothing (these are witnesses, not a separability decision
//! procedure).
//!
//! Evaluation is moment-based: [`WitnessEngine::collect_moments`] computes
//! every needed expectation as a beam-A ⊗ beam-B form (never materializing
//! full-space operators), and all ten conditions are pure functions of the
//! resulting [`StokesMoments`]. The same functions accept moments estimated
//! from finite-shot samples.

use crate::fock::{QuantumState, SparseOperator, Truncation};
use crate::stokes::{BeamStokes, StokesSet};
use crate::{Beam, Error, Result};

/// Margin above which a violation is reported as entanglement. Sits well
/// above double-precision accumulation noise at the truncations in scope and
/// far below the O(1) physical margins of interest.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Square-root arguments this far below zero are treated as roundoff and
/// clamped; anything lower trips a numerical guard under
/// [`SqrtPolicy::Strict`] (the arguments are mathematically nonnegative, so
/// a real excursion signals an operator bug, not a state property).
pub const SQRT_CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WitnessId {
    SimonStd,
    SimonNorm,
    GenStd,
    GenNorm,
    CauchyStd,
    CauchyNorm,
    VarStd,
    VarNorm,
    VarImprovedStd,
    VarImprovedNorm,
}

impl WitnessId {
    pub const ALL: [WitnessId; 10] = [
        WitnessId::SimonStd,
        WitnessId::SimonNorm,
        WitnessId::GenStd,
        WitnessId::GenNorm,
        WitnessId::CauchyStd,
        WitnessId::CauchyNorm,
        WitnessId::VarStd,
        WitnessId::VarNorm,
        WitnessId::VarImprovedStd,
        WitnessId::VarImprovedNorm,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            WitnessId::SimonStd => "SIMON_STD",
            WitnessId::SimonNorm => "SIMON_NORM",
            WitnessId::GenStd => "GEN_STD",
            WitnessId::GenNorm => "GEN_NORM",
            WitnessId::CauchyStd => "CAUCHY_STD",
            WitnessId::CauchyNorm => "CAUCHY_NORM",
            WitnessId::VarStd => "VAR_STD",
            WitnessId::VarNorm => "VAR_NORM",
            WitnessId::VarImprovedStd => "VAR_IMPROVED_STD",
            WitnessId::VarImprovedNorm => "VAR_IMPROVED_NORM",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        WitnessId::ALL.into_iter().find(|id| id.name() == name)
    }

    /// `true` for conditions of the form LHS ≥ bound; `false` for the
    /// Cauchy–Schwarz pair (LHS ≤ bound).
    pub const fn is_lower_bounded(self) -> bool {
        !matches!(self, WitnessId::CauchyStd | WitnessId::CauchyNorm)
    }

    /// The condition this one tightens, if any: the improved variance
    /// bounds dominate their base variants.
    pub const fn improves_on(self) -> Option<WitnessId> {
        match self {
            WitnessId::VarImprovedStd => Some(WitnessId::VarStd),
            WitnessId::VarImprovedNorm => Some(WitnessId::VarNorm),
            _ => None,
        }
    }
}

impl std::fmt::Display for WitnessId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WitnessReport {
    pub id: WitnessId,
    pub lhs: f64,
    pub rhs: f64,
    /// Violation amount: `rhs − lhs` for ≥-type, `lhs − rhs` for ≤-type.
    pub margin: f64,
    /// `margin > VIOLATION_TOL`.
    pub entangled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StokesFamily {
    Standard,
    Normalized,
}

/// How to treat square-root arguments that dip below zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtPolicy {
    /// Clamp within [`SQRT_CLAMP_TOL`] of zero, error beyond — for exact
    /// evaluation, where a large excursion means a bug.
    Strict,
    /// Clamp any negative to zero — for finite-shot estimates, where
    /// sampling noise legitimately pushes the plug-in arguments negative.
    Clamp,
}

/// Every state moment the ten conditions consume. Indices follow
/// [`crate::stokes::StokesIndex::axis`]. All values are real parts of expectations of
/// hermitian observables; moments are linear in the state, so convex
/// mixtures can be evaluated via [`StokesMoments::blend`].
#[derive(Debug, Clone, Copy, Default)]
pub struct StokesMoments {
    pub theta_a: [f64; 3],
    pub theta_b: [f64; 3],
    pub theta2_a: [f64; 3],
    pub theta2_b: [f64; 3],
    pub theta_cross: [f64; 3],
    pub s_a: [f64; 3],
    pub s_b: [f64; 3],
    pub s2_a: [f64; 3],
    pub s2_b: [f64; 3],
    pub s_cross: [f64; 3],
    pub n_a: f64,
    pub n_b: f64,
    pub n2_a: f64,
    pub n2_b: f64,
    pub nn: f64,
    pub pi_a: f64,
    pub pi_b: f64,
    pub pipi: f64,
    pub g_a: f64,
    pub g_b: f64,
}

impl StokesMoments {
    /// Weighted sum of component moments — the moment image of a convex
    /// state mixture. Accumulation order matches the order used when
    /// evaluating a blended state directly, so the two routes agree bit for
    /// bit.
    pub fn blend(parts: &[(f64, StokesMoments)]) -> StokesMoments {
        let mut out = StokesMoments::default();
        for (w, m) in parts {
            for i in 0..3 {
                out.theta_a[i] += w * m.theta_a[i];
                out.theta_b[i] += w * m.theta_b[i];
                out.theta2_a[i] += w * m.theta2_a[i];
                out.theta2_b[i] += w * m.theta2_b[i];
                out.theta_cross[i] += w * m.theta_cross[i];
                out.s_a[i] += w * m.s_a[i];
                out.s_b[i] += w * m.s_b[i];
                out.s2_a[i] += w * m.s2_a[i];
                out.s2_b[i] += w * m.s2_b[i];
                out.s_cross[i] += w * m.s_cross[i];
            }
            out.n_a += w * m.n_a;
            out.n_b += w * m.n_b;
            out.n2_a += w * m.n2_a;
            out.n2_b += w * m.n2_b;
            out.nn += w * m.nn;
            out.pi_a += w * m.pi_a;
            out.pi_b += w * m.pi_b;
            out.pipi += w * m.pipi;
            out.g_a += w * m.g_a;
            out.g_b += w * m.g_b;
        }
        out
    }
}

/// Shared observable cache for witness evaluation at one truncation.
#[derive(Debug, Clone)]
pub struct WitnessEngine {
    trunc: Truncation,
    ops: BeamStokes,
}

impl WitnessEngine {
    pub fn new(trunc: Truncation) -> Self {
        Self { trunc, ops: BeamStokes::build(&trunc) }
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn ops(&self) -> &BeamStokes {
        &self.ops
    }

    /// All moments of `state` needed by the ten conditions, computed exactly
    /// via beam-factored expectations.
    pub fn collect_moments(&self, state: &QuantumState) -> Result<StokesMoments> {
        if state.truncation() != self.trunc {
            return Err(Error::TruncationMismatch {
                expected: self.trunc.n_max() as usize,
                found: state.truncation().n_max() as usize,
            });
        }
        let o = &self.ops;
        let id = &o.identity;
        let e = |a: &SparseOperator, b: &SparseOperator| -> Result<f64> {
            state.expectation_kron(a, b).map(|z| z.re)
        };
        let mut m = StokesMoments::default();
        for i in 0..3 {
            m.theta_a[i] = e(&o.standard[i], id)?;
            m.theta_b[i] = e(id, &o.standard[i])?;
            m.theta2_a[i] = e(&o.standard_sq[i], id)?;
            m.theta2_b[i] = e(id, &o.standard_sq[i])?;
            m.theta_cross[i] = e(&o.standard[i], &o.standard[i])?;
            m.s_a[i] = e(&o.normalized[i], id)?;
            m.s_b[i] = e(id, &o.normalized[i])?;
            m.s2_a[i] = e(&o.normalized_sq[i], id)?;
            m.s2_b[i] = e(id, &o.normalized_sq[i])?;
            m.s_cross[i] = e(&o.normalized[i], &o.normalized[i])?;
        }
        m.n_a = e(&o.number, id)?;
        m.n_b = e(id, &o.number)?;
        m.n2_a = e(&o.number_sq, id)?;
        m.n2_b = e(id, &o.number_sq)?;
        m.nn = e(&o.number, &o.number)?;
        m.pi_a = e(&o.vacuum_projector, id)?;
        m.pi_b = e(id, &o.vacuum_projector)?;
        m.pipi = e(&o.vacuum_projector, &o.vacuum_projector)?;
        m.g_a = e(&o.pi_inv_n_pi, id)?;
        m.g_b = e(id, &o.pi_inv_n_pi)?;
        Ok(m)
    }

    pub fn eval_witness(&self, id: WitnessId, state: &QuantumState) -> Result<WitnessReport> {
        let m = self.collect_moments(state)?;
        eval_witness_from_moments(id, &m, SqrtPolicy::Strict)
    }

    /// All ten reports in [`WitnessId::ALL`] order.
    pub fn eval_all(&self, state: &QuantumState) -> Result<Vec<WitnessReport>> {
        let m = self.collect_moments(state)?;
        eval_all_from_moments(&m, SqrtPolicy::Strict)
    }

    /// The variance-condition LHS computed along two independent routes:
    /// directly as `Σᵢ Var(Ôᵢᴬ + Ôᵢᴮ)` with full-space composed operators,
    /// and as the local-variances-plus-covariance decomposition from beam
    /// moments. The two must agree to tight tolerance; this is an internal
    /// consistency oracle, intended for small truncations (the direct route
    /// materializes full-space operator squares).
    pub fn lhs_crosscheck_variance(
        &self,
        state: &QuantumState,
        family: StokesFamily,
    ) -> Result<(f64, f64)> {
        let set_a = StokesSet::build(Beam::A, &self.trunc);
        let set_b = StokesSet::build(Beam::B, &self.trunc);
        let mut direct = 0.0;
        for i in 0..3 {
            let (oa, ob) = match family {
                StokesFamily::Standard => (&set_a.standard[i], &set_b.standard[i]),
                StokesFamily::Normalized => (&set_a.normalized[i], &set_b.normalized[i]),
            };
            let sum = oa.add(ob)?;
            let mean = state.expectation(&sum)?.re;
            let mean_sq = state.expectation(&sum.square())?.re;
            direct += mean_sq - mean * mean;
        }

        let m = self.collect_moments(state)?;
        let (f_a, f_b, l2_a, l2_b, cross) = match family {
            StokesFamily::Standard => {
                (&m.theta_a, &m.theta_b, &m.theta2_a, &m.theta2_b, &m.theta_cross)
            }
            StokesFamily::Normalized => (&m.s_a, &m.s_b, &m.s2_a, &m.s2_b, &m.s_cross),
        };
        let mut decomposed = 0.0;
        for i in 0..3 {
            decomposed += l2_a[i] - f_a[i] * f_a[i];
            decomposed += l2_b[i] - f_b[i] * f_b[i];
            decomposed += 2.0 * (cross[i] - f_a[i] * f_b[i]);
        }
        Ok((direct, decomposed))
    }
}

/// Evaluates one condition from precomputed moments. This is the single
/// arithmetic path shared by exact evaluation, blended sweeps, and
/// finite-shot estimation.
pub fn eval_witness_from_moments(
    id: WitnessId,
    m: &StokesMoments,
    policy: SqrtPolicy,
) -> Result<WitnessReport> {
    let sum_sq_pair_std: f64 =
        (0..3).map(|i| m.theta2_a[i] + m.theta2_b[i] + 2.0 * m.theta_cross[i]).sum();
    let sum_sq_pair_norm: f64 =
        (0..3).map(|i| m.s2_a[i] + m.s2_b[i] + 2.0 * m.s_cross[i]).sum();
    let sum_mean_pair_std: f64 =
        (0..3).map(|i| (m.theta_a[i] + m.theta_b[i]).powi(2)).sum();
    let sum_mean_pair_norm: f64 = (0..3).map(|i| (m.s_a[i] + m.s_b[i]).powi(2)).sum();
    let base_rhs_std = 2.0 * (m.n_a + m.n_b);
    let base_rhs_norm = 2.0 * (m.g_a + m.g_b);

    let (lhs, rhs) = match id {
        WitnessId::SimonStd => (sum_sq_pair_std, base_rhs_std),
        WitnessId::SimonNorm => (sum_sq_pair_norm, base_rhs_norm),
        WitnessId::GenStd => (sum_sq_pair_std, base_rhs_std + (m.n_a - m.n_b).powi(2)),
        WitnessId::GenNorm => (sum_sq_pair_norm, base_rhs_norm + (m.pi_a - m.pi_b).powi(2)),
        WitnessId::CauchyStd => ((0..3).map(|i| m.theta_cross[i].abs()).sum(), m.nn),
        WitnessId::CauchyNorm => ((0..3).map(|i| m.s_cross[i].abs()).sum(), m.pipi),
        WitnessId::VarStd => (sum_sq_pair_std - sum_mean_pair_std, base_rhs_std),
        WitnessId::VarNorm => (sum_sq_pair_norm - sum_mean_pair_norm, base_rhs_norm),
        WitnessId::VarImprovedStd => {
            let spread_a = m.n2_a - (0..3).map(|i| m.theta_a[i].powi(2)).sum::<f64>();
            let spread_b = m.n2_b - (0..3).map(|i| m.theta_b[i].powi(2)).sum::<f64>();
            let extra = (guarded_sqrt(spread_a, policy, id)?
                - guarded_sqrt(spread_b, policy, id)?)
            .powi(2);
            (sum_sq_pair_std - sum_mean_pair_std, base_rhs_std + extra)
        }
        WitnessId::VarImprovedNorm => {
            let spread_a = m.pi_a - (0..3).map(|i| m.s_a[i].powi(2)).sum::<f64>();
            let spread_b = m.pi_b - (0..3).map(|i| m.s_b[i].powi(2)).sum::<f64>();
            let extra = (guarded_sqrt(spread_a, policy, id)?
                - guarded_sqrt(spread_b, policy, id)?)
            .powi(2);
            (sum_sq_pair_norm - sum_mean_pair_norm, base_rhs_norm + extra)
        }
    };

    let margin = if id.is_lower_bounded() { rhs - lhs } else { lhs - rhs };
    Ok(WitnessReport { id, lhs, rhs, margin, entangled: margin > VIOLATION_TOL })
}

/// All ten reports from one moment set, in [`WitnessId::ALL`] order.
pub fn eval_all_from_moments(
    m: &StokesMoments,
    policy: SqrtPolicy,
) -> Result<Vec<WitnessReport>> {
    WitnessId::ALL.iter().map(|&id| eval_witness_from_moments(id, m, policy)).collect()
}

fn guarded_sqrt(arg: f64, policy: SqrtPolicy, id: WitnessId) -> Result<f64> {
    if arg < -SQRT_CLAMP_TOL && policy == SqrtPolicy::Strict {
        return Err(Error::NumericalGuard {
            context: format!("{id} bound term √({arg:e})"),
            value: arg,
        });
    }
    Ok(arg.max(0.0).sqrt())
}
