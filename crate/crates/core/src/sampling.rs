//! Finite-shot simulation of photon-counting measurements and plug-in
//! witness estimation.
//!
//! A "shot" measures all four mode occupations simultaneously after rotating
//! both beams into one of the three polarization bases. Per-axis moments come
//! from the matching basis' shots; beam totals (`N̂`, `Π̂`, `Ĝ`) are
//! rotation-invariant, so those moments pool the shots of all three bases.
//! Witness estimates are the exact formulas applied to plug-in moments, with
//! uncertainties from a nonparametric bootstrap over shots (resampled within
//! each basis, so per-basis sample sizes are preserved).

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::WeightedAliasIndex;

use crate::fock::{mode_rotation, QuantumState};
use crate::stokes::{basis_unitary, StokesIndex};
use crate::witnesses::{eval_all_from_moments, SqrtPolicy, StokesMoments, WitnessId};
use crate::{Error, Result};

/// Below this many shots in any basis, second-moment estimates are too
/// unstable to report and estimation refuses to run.
pub const MIN_SHOTS_PER_BASIS: usize = 30;

/// Default bootstrap resample count for standard errors.
pub const DEFAULT_RESAMPLES: usize = 200;

/// Decouples the bootstrap RNG from the shot RNG when both derive from the
/// same user seed.
const BOOTSTRAP_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// One measurement outcome: photon counts in the chosen basis' eigenmode
/// (`*_i`) and its orthogonal mode (`*_iperp`) on each beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleRecord {
    pub basis: StokesIndex,
    pub n_a_i: u32,
    pub n_a_iperp: u32,
    pub n_b_i: u32,
    pub n_b_iperp: u32,
}

/// Shot records grouped by measured basis, indexed by [`StokesIndex::axis`].
#[derive(Debug, Clone, Default)]
pub struct SamplesByBasis {
    pub records: [Vec<SampleRecord>; 3],
}

impl SamplesByBasis {
    pub fn for_basis(&self, basis: StokesIndex) -> &[SampleRecord] {
        &self.records[basis.axis()]
    }

    /// Shot count per basis, or an error if the bases are unevenly sampled
    /// (estimation assumes a balanced design).
    pub fn balanced_shots(&self) -> Result<usize> {
        let n = self.records[0].len();
        if self.records.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(
                "uneven shot counts across bases; estimation requires a balanced design".into(),
            ));
        }
        Ok(n)
    }
}

/// Witness estimate from finite shots: point values from plug-in moments,
/// `stderr` the bootstrap standard error of the margin, `shots` per basis.
#[derive(Debug, Clone, Copy)]
pub struct EstimateReport {
    pub id: WitnessId,
    pub lhs_hat: f64,
    pub rhs_hat: f64,
    pub margin_hat: f64,
    pub stderr: f64,
    pub shots: usize,
}

/// Draws `shots` measurement outcomes of `state` in the given basis.
/// Reproducible: the RNG is seeded from `seed` on a per-basis stream, so the
/// three bases of one experiment share a seed without sharing randomness.
pub fn sample_counts(
    state: &QuantumState,
    basis: StokesIndex,
    shots: usize,
    seed: u64,
) -> Result<Vec<SampleRecord>> {
    let trunc = state.truncation();
    let rotation = mode_rotation(&basis_unitary(basis), &trunc);
    let probs = state.measurement_probabilities(&rotation)?;
    // roundoff can leave O(1e-16) negatives on mixed-state diagonals
    let weights: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    let dist = WeightedAliasIndex::new(weights)
        .map_err(|e| Error::InvalidParameter(format!("outcome distribution: {e}")))?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(basis.axis() as u64);

    let mut records = Vec::with_capacity(shots);
    for _ in 0..shots {
        let occ = trunc.occupation(dist.sample(&mut rng));
        records.push(SampleRecord {
            basis,
            n_a_i: occ.n_ah,
            n_a_iperp: occ.n_av,
            n_b_i: occ.n_bh,
            n_b_iperp: occ.n_bv,
        });
    }
    Ok(records)
}

/// Samples `shots_per_basis` outcomes in each of the three bases.
pub fn sample_all_bases(
    state: &QuantumState,
    shots_per_basis: usize,
    seed: u64,
) -> Result<SamplesByBasis> {
    let mut out = SamplesByBasis::default();
    for basis in StokesIndex::ALL {
        out.records[basis.axis()] = sample_counts(state, basis, shots_per_basis, seed)?;
    }
    Ok(out)
}

/// Per-shot derived quantities for one beam.
#[derive(Clone, Copy)]
struct BeamFeatures {
    n: f64,
    theta: f64,
    s: f64,
    pi: f64,
    g: f64,
}

fn beam_features(n_i: u32, n_iperp: u32) -> BeamFeatures {
    let n = (n_i + n_iperp) as f64;
    let theta = n_i as f64 - n_iperp as f64;
    if n > 0.0 {
        BeamFeatures { n, theta, s: theta / n, pi: 1.0, g: 1.0 / n }
    } else {
        // vacuum shot: normalized quantities are projected out, contribute 0
        BeamFeatures { n, theta, s: 0.0, pi: 0.0, g: 0.0 }
    }
}

/// Plug-in moments from samples; `resample`, when given, holds
/// with-replacement index draws per basis (the bootstrap path).
fn plugin_moments(samples: &SamplesByBasis, resample: Option<&[Vec<usize>; 3]>) -> StokesMoments {
    let mut m = StokesMoments::default();
    let mut pooled = 0usize;
    let mut sums = [0.0f64; 10]; // n_a n_b n2_a n2_b nn pi_a pi_b pipi g_a g_b

    for basis in StokesIndex::ALL {
        let i = basis.axis();
        let records = &samples.records[i];
        let mut axis = [0.0f64; 10]; // ta tb ta2 tb2 tatb sa sb sa2 sb2 sasb
        let count = resample.map_or(records.len(), |r| r[i].len());
        let record_at = |k: usize| match resample {
            Some(r) => records[r[i][k]],
            None => records[k],
        };
        for k in 0..count {
            let rec = record_at(k);
            let a = beam_features(rec.n_a_i, rec.n_a_iperp);
            let b = beam_features(rec.n_b_i, rec.n_b_iperp);
            axis[0] += a.theta;
            axis[1] += b.theta;
            axis[2] += a.theta * a.theta;
            axis[3] += b.theta * b.theta;
            axis[4] += a.theta * b.theta;
            axis[5] += a.s;
            axis[6] += b.s;
            axis[7] += a.s * a.s;
            axis[8] += b.s * b.s;
            axis[9] += a.s * b.s;
            sums[0] += a.n;
            sums[1] += b.n;
            sums[2] += a.n * a.n;
            sums[3] += b.n * b.n;
            sums[4] += a.n * b.n;
            sums[5] += a.pi;
            sums[6] += b.pi;
            sums[7] += a.pi * b.pi;
            sums[8] += a.g;
            sums[9] += b.g;
        }
        pooled += count;
        let denom = count as f64;
        m.theta_a[i] = axis[0] / denom;
        m.theta_b[i] = axis[1] / denom;
        m.theta2_a[i] = axis[2] / denom;
        m.theta2_b[i] = axis[3] / denom;
        m.theta_cross[i] = axis[4] / denom;
        m.s_a[i] = axis[5] / denom;
        m.s_b[i] = axis[6] / denom;
        m.s2_a[i] = axis[7] / denom;
        m.s2_b[i] = axis[8] / denom;
        m.s_cross[i] = axis[9] / denom;
    }

    let denom = pooled as f64;
    m.n_a = sums[0] / denom;
    m.n_b = sums[1] / denom;
    m.n2_a = sums[2] / denom;
    m.n2_b = sums[3] / denom;
    m.nn = sums[4] / denom;
    m.pi_a = sums[5] / denom;
    m.pi_b = sums[6] / denom;
    m.pipi = sums[7] / denom;
    m.g_a = sums[8] / denom;
    m.g_b = sums[9] / denom;
    m
}

/// Estimates all ten witnesses from samples. Point estimates plug empirical
/// moments into the exact formulas (square roots clamped, since sampling
/// noise can push their arguments slightly negative); `stderr` comes from
/// `resamples` bootstrap replicates seeded deterministically from `seed`.
pub fn estimate_all(
    samples: &SamplesByBasis,
    resamples: usize,
    seed: u64,
) -> Result<Vec<EstimateReport>> {
    let shots = samples.balanced_shots()?;
    if shots < MIN_SHOTS_PER_BASIS {
        return Err(Error::InsufficientShots { got: shots, min: MIN_SHOTS_PER_BASIS });
    }
    if resamples < 2 {
        return Err(Error::InvalidParameter(
            "bootstrap needs at least 2 resamples".into(),
        ));
    }

    let point = eval_all_from_moments(&plugin_moments(samples, None), SqrtPolicy::Clamp)?;

    let mut margins: Vec<Vec<f64>> = vec![Vec::with_capacity(resamples); WitnessId::ALL.len()];
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ BOOTSTRAP_SALT);
    let mut indices: [Vec<usize>; 3] = Default::default();
    for _ in 0..resamples {
        for slot in &mut indices {
            slot.clear();
            slot.extend((0..shots).map(|_| rng.gen_range(0..shots)));
        }
        let m = plugin_moments(samples, Some(&indices));
        for (w, r) in eval_all_from_moments(&m, SqrtPolicy::Clamp)?.iter().enumerate() {
            margins[w].push(r.margin);
        }
    }

    Ok(point
        .iter()
        .enumerate()
        .map(|(w, r)| EstimateReport {
            id: r.id,
            lhs_hat: r.lhs,
            rhs_hat: r.rhs,
            margin_hat: r.margin,
            stderr: sample_std(&margins[w]),
            shots,
        })
        .collect())
}

/// Single-witness variant of [`estimate_all`]; numbers are identical to the
/// corresponding row of the full estimation (same bootstrap draws).
pub fn estimate_witness(
    id: WitnessId,
    samples: &SamplesByBasis,
    resamples: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let all = estimate_all(samples, resamples, seed)?;
    Ok(all.into_iter().find(|r| r.id == id).expect("estimate_all covers every witness"))
}

fn sample_std(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{OccupationState, Truncation};
    use crate::states::{bsv, mix_white_noise, singlet_sector, vacuum};
    use crate::witnesses::WitnessEngine;
    use num_complex::Complex64;

    #[test]
    fn vacuum_shots_are_all_zero_and_estimates_degenerate() {
        let trunc = Truncation::new(1);
        let samples = sample_all_bases(&vacuum(trunc), 40, 7).unwrap();
        for basis in StokesIndex::ALL {
            for r in samples.for_basis(basis) {
                assert_eq!((r.n_a_i, r.n_a_iperp, r.n_b_i, r.n_b_iperp), (0, 0, 0, 0));
            }
        }
        for est in estimate_all(&samples, 20, 1).unwrap() {
            assert_eq!(est.margin_hat, 0.0, "{}", est.id);
            assert_eq!(est.stderr, 0.0, "{}", est.id);
            assert_eq!(est.shots, 40);
        }
    }

    #[test]
    fn singlet_rectilinear_outcomes_are_anticorrelated() {
        let trunc = Truncation::new(1);
        let st = singlet_sector(1, trunc).unwrap();
        let records = sample_counts(&st, StokesIndex::Rectilinear, 2000, 11).unwrap();
        let mut hv = 0usize;
        for r in &records {
            let counts = (r.n_a_i, r.n_a_iperp, r.n_b_i, r.n_b_iperp);
            assert!(
                counts == (1, 0, 0, 1) || counts == (0, 1, 1, 0),
                "unexpected outcome {counts:?}"
            );
            if counts == (1, 0, 0, 1) {
                hv += 1;
            }
        }
        let freq = hv as f64 / records.len() as f64;
        assert!((freq - 0.5).abs() < 0.05, "freq {freq}");
    }

    #[test]
    fn single_photon_h_is_deterministic_in_its_own_basis() {
        let trunc = Truncation::new(1);
        let st = QuantumState::basis_state(OccupationState::new(1, 0, 0, 0), trunc).unwrap();
        for r in sample_counts(&st, StokesIndex::Rectilinear, 200, 3).unwrap() {
            assert_eq!((r.n_a_i, r.n_a_iperp, r.n_b_i, r.n_b_iperp), (1, 0, 0, 0));
        }
    }

    #[test]
    fn circular_eigenstate_is_deterministic_in_circular_basis() {
        // (|1_H⟩ + i|1_V⟩)/√2 on beam A has circular Stokes value +1, so
        // every circular-basis shot must put its photon in the "+" mode.
        let trunc = Truncation::new(1);
        let dim = trunc.total_dim();
        let mut psi = vec![Complex64::new(0.0, 0.0); dim];
        let h = trunc.index_of(&OccupationState::new(1, 0, 0, 0)).unwrap();
        let v = trunc.index_of(&OccupationState::new(0, 1, 0, 0)).unwrap();
        psi[h] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[v] = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let st = QuantumState::from_pure(psi, trunc).unwrap();
        for r in sample_counts(&st, StokesIndex::Circular, 200, 5).unwrap() {
            assert_eq!((r.n_a_i, r.n_a_iperp), (1, 0));
        }
    }

    #[test]
    fn empirical_moments_converge_to_exact() {
        let trunc = Truncation::new(6);
        let st = mix_white_noise(bsv(0.5, trunc).unwrap(), 0.8).unwrap();
        let samples = sample_all_bases(&st, 20_000, 42).unwrap();
        let m_hat = plugin_moments(&samples, None);
        let exact = WitnessEngine::new(trunc).collect_moments(&st).unwrap();
        // tolerances ≈ 4σ of the corresponding sample means at these shot
        // counts; second moments of photon counts are the widest
        for (hat, ex, tol, label) in [
            (m_hat.theta_a[2], exact.theta_a[2], 0.05, "theta3_a"),
            (m_hat.theta2_a[0], exact.theta2_a[0], 0.25, "theta1sq_a"),
            (m_hat.theta_cross[1], exact.theta_cross[1], 0.25, "cross2"),
            (m_hat.n_a, exact.n_a, 0.05, "n_a"),
            (m_hat.nn, exact.nn, 0.25, "nn"),
            (m_hat.pi_a, exact.pi_a, 0.02, "pi_a"),
            (m_hat.g_b, exact.g_b, 0.02, "g_b"),
            (m_hat.s_cross[0], exact.s_cross[0], 0.02, "scross1"),
        ] {
            assert!((hat - ex).abs() < tol, "{label}: {hat} vs {ex}");
        }
    }

    #[test]
    fn outcome_frequencies_track_probabilities() {
        let trunc = Truncation::new(1);
        let st = mix_white_noise(singlet_sector(1, trunc).unwrap(), 0.5).unwrap();
        let rotation = mode_rotation(&basis_unitary(StokesIndex::Diagonal), &trunc);
        let probs = st.measurement_probabilities(&rotation).unwrap();
        let records = sample_counts(&st, StokesIndex::Diagonal, 50_000, 9).unwrap();
        let mut freq = vec![0.0; probs.len()];
        for r in &records {
            let occ = OccupationState::new(r.n_a_i, r.n_a_iperp, r.n_b_i, r.n_b_iperp);
            freq[trunc.index_of(&occ).unwrap()] += 1.0 / records.len() as f64;
        }
        let tv: f64 =
            0.5 * probs.iter().zip(&freq).map(|(p, f)| (p - f).abs()).sum::<f64>();
        assert!(tv < 0.02, "total variation {tv}");
    }

    #[test]
    fn sampling_is_reproducible_and_streams_differ() {
        let trunc = Truncation::new(2);
        let st = bsv(0.4, trunc).unwrap();
        let a = sample_counts(&st, StokesIndex::Diagonal, 100, 21).unwrap();
        let b = sample_counts(&st, StokesIndex::Diagonal, 100, 21).unwrap();
        assert_eq!(a, b);
        let c = sample_counts(&st, StokesIndex::Circular, 100, 21).unwrap();
        assert!(a.iter().zip(&c).any(|(x, y)| {
            (x.n_a_i, x.n_a_iperp, x.n_b_i, x.n_b_iperp)
                != (y.n_a_i, y.n_a_iperp, y.n_b_i, y.n_b_iperp)
        }));
    }

    #[test]
    fn estimation_rejects_starved_bases() {
        let trunc = Truncation::new(1);
        let samples = sample_all_bases(&vacuum(trunc), 10, 1).unwrap();
        assert!(matches!(
            estimate_all(&samples, 50, 1),
            Err(Error::InsufficientShots { got: 10, min: MIN_SHOTS_PER_BASIS })
        ));
    }

    #[test]
    fn singlet_estimates_are_exact_with_zero_stderr() {
        // every shot of the single-pair singlet gives the same per-axis
        // summaries, so plug-in estimates reproduce the exact values exactly
        let trunc = Truncation::new(1);
        let st = singlet_sector(1, trunc).unwrap();
        let samples = sample_all_bases(&st, 500, 13).unwrap();
        let ests = estimate_all(&samples, 50, 13).unwrap();
        let exact = WitnessEngine::new(trunc).eval_all(&st).unwrap();
        for (est, ex) in ests.iter().zip(&exact) {
            assert_eq!(est.id, ex.id);
            assert!(
                (est.margin_hat - ex.margin).abs() < 1e-12,
                "{}: {} vs {}",
                est.id,
                est.margin_hat,
                ex.margin
            );
            assert!(est.stderr < 1e-12);
        }
    }

    #[test]
    fn bootstrap_stderr_tracks_sampling_spread() {
        let trunc = Truncation::new(4);
        let st = mix_white_noise(bsv(0.4, trunc).unwrap(), 0.7).unwrap();
        let engine = WitnessEngine::new(trunc);
        let exact: Vec<f64> =
            engine.eval_all(&st).unwrap().iter().map(|r| r.margin).collect();
        let mut hits = vec![0usize; WitnessId::ALL.len()];
        let seeds = 12;
        for seed in 0..seeds {
            let samples = sample_all_bases(&st, 1500, seed).unwrap();
            for (w, est) in estimate_all(&samples, 80, seed).unwrap().iter().enumerate() {
                if (est.margin_hat - exact[w]).abs() <= 3.0 * est.stderr {
                    hits[w] += 1;
                }
            }
        }
        for (w, &h) in hits.iter().enumerate() {
            assert!(
                h >= seeds as usize - 2,
                "{}: only {h}/{seeds} inside ±3σ",
                WitnessId::ALL[w]
            );
        }
    }
}
