//! Numerical laboratory for entanglement detection in four-mode quantum optics.
//!
//! Two spatial beams (A, B), each carrying a horizontal and a vertical
//! polarization mode, are truncated at a fixed total photon number per beam.
//! On that space the crate builds standard and normalized Stokes operators,
//! evaluates a family of separability conditions exactly on pure and mixed
//! states, and estimates the same conditions from finite-shot Born-rule
//! sampling.
//!
//! Module map:
//! - [`fock`]: basis enumeration, sparse operators, quantum states.
//! - [`stokes`]: Stokes operator sets and their operator identities.
//! - [`states`]: physical state constructors, noise and loss channels,
//!   and the text grammar for describing states.
//! - [`witnesses`]: separability conditions and their exact evaluation.
//! - [`sampling`]: photon-count sampling and finite-shot estimators.
//!
//! # Example
//!
//! Evaluate every separability condition on a noisy squeezed-vacuum state:
//!
//! ```
//! use stokeslab::states::{bsv, bsv_min_nmax, mix_white_noise};
//! use stokeslab::{Truncation, WitnessEngine};
//!
//! fn main() -> stokeslab::Result<()> {
//!     let trunc = Truncation::new(bsv_min_nmax(0.8, 1e-6));
//!     let state = mix_white_noise(bsv(0.8, trunc)?, 0.9)?;
//!     let engine = WitnessEngine::new(trunc);
//!     for r in engine.eval_all(&state)? {
//!         println!("{} margin {:+.6} entangled {}", r.id.name(), r.margin, r.entangled);
//!     }
//!     Ok(())
//! }
//! ```

pub mod fock;
pub mod sampling;
pub mod states;
pub mod stokes;
pub mod witnesses;

mod error;

pub use error::{Error, Result};
pub use fock::{
    Beam, ModeId, OccupationState, Polarization, QuantumState, SparseOperator, Truncation,
};
pub use states::{parse_state_spec, StateSpec};
pub use witnesses::{WitnessEngine, WitnessId, WitnessReport};
