//! Structural invariants checked on randomized inputs: product states never
//! violate any condition and their moments factorize, Stokes vectors are
//! length-bounded by beam totals, margins are invariant under joint
//! polarization rotation, and the sparse operator algebra is consistent.

use num_complex::Complex64;
use proptest::prelude::*;
use stokeslab::states::rotate_polarization;
use stokeslab::stokes::{basis_unitary, StokesIndex};
use stokeslab::witnesses::VIOLATION_TOL;
use stokeslab::{QuantumState, SparseOperator, Truncation, WitnessEngine, WitnessId};

const NMAX: u32 = 2;

fn normalized_complex_vec(dim: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim).prop_filter_map(
        "vector too close to zero",
        |v| {
            let norm_sq: f64 = v.iter().map(|(re, im)| re * re + im * im).sum();
            if norm_sq < 1e-3 {
                return None;
            }
            let s = norm_sq.sqrt().recip();
            Some(v.into_iter().map(|(re, im)| Complex64::new(re * s, im * s)).collect())
        },
    )
}

fn beam_pair() -> impl Strategy<Value = (Vec<Complex64>, Vec<Complex64>)> {
    let d = Truncation::new(NMAX).beam_dim();
    (normalized_complex_vec(d), normalized_complex_vec(d))
}

fn product_state(a: &[Complex64], b: &[Complex64]) -> QuantumState {
    let trunc = Truncation::new(NMAX);
    let mut psi = vec![Complex64::new(0.0, 0.0); trunc.total_dim()];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            psi[i * b.len() + j] = ai * bj;
        }
    }
    QuantumState::from_pure(psi, trunc).unwrap()
}

fn unitary_2x2(theta: f64, phi: f64, alpha: f64) -> [[Complex64; 2]; 2] {
    let (c, s) = (theta.cos(), theta.sin());
    let phase = Complex64::from_polar(1.0, alpha);
    [
        [phase * c, phase * (-s) * Complex64::from_polar(1.0, -phi)],
        [phase * s * Complex64::from_polar(1.0, phi), phase * c],
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn product_states_are_never_flagged_and_moments_factorize((a, b) in beam_pair()) {
        let engine = WitnessEngine::new(Truncation::new(NMAX));
        let st = product_state(&a, &b);
        let m = engine.collect_moments(&st).unwrap();

        for i in 0..3 {
            prop_assert!((m.theta_cross[i] - m.theta_a[i] * m.theta_b[i]).abs() < 1e-10);
            prop_assert!((m.s_cross[i] - m.s_a[i] * m.s_b[i]).abs() < 1e-10);
        }
        prop_assert!((m.nn - m.n_a * m.n_b).abs() < 1e-10);
        prop_assert!((m.pipi - m.pi_a * m.pi_b).abs() < 1e-10);

        for r in engine.eval_all(&st).unwrap() {
            prop_assert!(
                r.margin <= VIOLATION_TOL,
                "{} flagged a product state: margin {}", r.id, r.margin
            );
        }
    }

    #[test]
    fn stokes_vector_length_is_bounded_by_beam_totals(
        psi in normalized_complex_vec(Truncation::new(NMAX).total_dim())
    ) {
        let trunc = Truncation::new(NMAX);
        let engine = WitnessEngine::new(trunc);
        let st = QuantumState::from_pure(psi, trunc).unwrap();
        let m = engine.collect_moments(&st).unwrap();

        let len_std: f64 = m.theta_a.iter().map(|x| x * x).sum();
        prop_assert!(len_std <= m.n_a * m.n_a + 1e-10);
        let len_norm: f64 = m.s_a.iter().map(|x| x * x).sum();
        prop_assert!(len_norm <= m.pi_a * m.pi_a + 1e-10);

        // second-moment sums must reproduce the operator identities
        let sq_std: f64 = m.theta2_a.iter().sum();
        prop_assert!((sq_std - (m.n2_a + 2.0 * m.n_a)).abs() < 1e-10);
        let sq_norm: f64 = m.s2_a.iter().sum();
        prop_assert!((sq_norm - (m.pi_a + 2.0 * m.g_a)).abs() < 1e-10);
    }

    #[test]
    fn margins_are_invariant_under_joint_polarization_rotation(
        psi in normalized_complex_vec(Truncation::new(NMAX).total_dim()),
        theta in 0.0f64..std::f64::consts::PI,
        phi in 0.0f64..std::f64::consts::TAU,
        alpha in 0.0f64..std::f64::consts::TAU,
    ) {
        let trunc = Truncation::new(NMAX);
        let engine = WitnessEngine::new(trunc);
        let st = QuantumState::from_pure(psi, trunc).unwrap();

        // A joint rotation mixes the three Stokes axes by an SO(3) matrix, so
        // the trace-like sums behind the eight (non-Cauchy) conditions are
        // untouched; the Cauchy pair reads the diagonal of the axis-by-axis
        // cross-correlation matrix and is genuinely basis-dependent, except
        // under rotations that merely permute/flip axes.
        let rotated = rotate_polarization(&st, &unitary_2x2(theta, phi, alpha)).unwrap();
        let before = engine.eval_all(&st).unwrap();
        let after = engine.eval_all(&rotated).unwrap();
        for (x, y) in before.iter().zip(&after) {
            if matches!(x.id, WitnessId::CauchyStd | WitnessId::CauchyNorm) {
                continue;
            }
            prop_assert!(
                (x.margin - y.margin).abs() < 1e-9,
                "{}: {} vs {}", x.id, x.margin, y.margin
            );
        }

        // the diagonal-basis unitary swaps axes 1 and 3 and flips axis 2, so
        // there every margin, Cauchy included, must be preserved
        let swapped =
            rotate_polarization(&st, &basis_unitary(StokesIndex::Diagonal)).unwrap();
        let after_swap = engine.eval_all(&swapped).unwrap();
        for (x, y) in before.iter().zip(&after_swap) {
            prop_assert!(
                (x.margin - y.margin).abs() < 1e-9,
                "{} under axis swap: {} vs {}", x.id, x.margin, y.margin
            );
        }
    }
}

fn sparse_from(dim: usize, raw: &[(usize, usize, f64, f64)]) -> SparseOperator {
    SparseOperator::from_triplets(
        dim,
        raw.iter().map(|&(r, c, re, im)| (r % dim, c % dim, Complex64::new(re, im))),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn operator_algebra_is_consistent(
        ta in proptest::collection::vec((0usize..6, 0usize..6, -1.0f64..1.0, -1.0f64..1.0), 1..12),
        tb in proptest::collection::vec((0usize..6, 0usize..6, -1.0f64..1.0, -1.0f64..1.0), 1..12),
        tc in proptest::collection::vec((0usize..6, 0usize..6, -1.0f64..1.0, -1.0f64..1.0), 1..12),
    ) {
        let (a, b, c) = (sparse_from(6, &ta), sparse_from(6, &tb), sparse_from(6, &tc));

        prop_assert!(a.adjoint().adjoint().max_abs_diff(&a) < 1e-12);

        let ab_c = a.compose(&b).unwrap().compose(&c).unwrap();
        let a_bc = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(ab_c.max_abs_diff(&a_bc) < 1e-12);

        let adj_of_product = a.compose(&b).unwrap().adjoint();
        let product_of_adj = b.adjoint().compose(&a.adjoint()).unwrap();
        prop_assert!(adj_of_product.max_abs_diff(&product_of_adj) < 1e-12);

        // mixed-product rule for tensor products
        let lhs = a.kron(&b).compose(&c.kron(&a)).unwrap();
        let rhs = a.compose(&c).unwrap().kron(&b.compose(&a).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }
}
