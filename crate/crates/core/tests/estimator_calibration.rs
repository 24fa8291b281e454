//! Seed-sweep calibration of the finite-shot estimators: across 20
//! independent experiments the exact margin must land inside the ±3·stderr
//! band of the estimate in at least 18 of them, for every witness.

use stokeslab::sampling::{estimate_all, sample_all_bases};
use stokeslab::states::{bsv, mix_white_noise};
use stokeslab::witnesses::WitnessId;
use stokeslab::{Truncation, WitnessEngine};

#[test]
fn three_sigma_band_covers_exact_margins_across_seeds() {
    let trunc = Truncation::new(6);
    let state = mix_white_noise(bsv(0.5, trunc).unwrap(), 0.8).unwrap();
    let exact: Vec<f64> = WitnessEngine::new(trunc)
        .eval_all(&state)
        .unwrap()
        .iter()
        .map(|r| r.margin)
        .collect();

    const SEEDS: u64 = 20;
    let mut hits = [0usize; 10];
    for seed in 0..SEEDS {
        let samples = sample_all_bases(&state, 2000, seed).unwrap();
        let estimates = estimate_all(&samples, 100, seed).unwrap();
        for (w, est) in estimates.iter().enumerate() {
            if (est.margin_hat - exact[w]).abs() <= 3.0 * est.stderr {
                hits[w] += 1;
            }
        }
    }

    for (w, &h) in hits.iter().enumerate() {
        assert!(
            h >= 18,
            "{}: exact margin inside ±3σ in only {h}/{SEEDS} experiments",
            WitnessId::ALL[w]
        );
    }
}
