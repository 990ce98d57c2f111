//! Filter-function engine for pulse sequences under correlated classical
//! Gaussian noise.
//!
//! The library computes, for piecewise-constant control Hamiltonians with
//! attached noise channels:
//!
//! - interaction-picture noise operators and their Fourier transforms
//!   (the control matrix),
//! - generalized, fidelity, and gate-pair correlation filter functions,
//! - decay amplitudes, first-order averaged quantum processes (Pauli
//!   transfer matrices), average gate fidelities, and the gate-pair
//!   correlation infidelity matrix,
//! - a Monte-Carlo trajectory oracle that brute-force averages noisy
//!   propagators for cross-validation.
//!
//! All operator expansions use the orthonormal Pauli basis `{I,X,Y,Z}^⊗n/√d`
//! with `tr(σ_k σ_l) = δ_kl`; see [`basis`] for the normalization note.

pub mod basis;
pub mod circuits;
pub mod control_matrix;
pub mod error;
pub mod filter_functions;
pub mod io;
pub mod montecarlo;
pub mod process;
pub mod propagation;
pub mod pulse;
pub mod spectrum;

pub use basis::{expand, OperatorBasis, PauliString};
pub use control_matrix::{ControlMatrix, GateControlMatrix};
pub use error::Error;
pub use filter_functions::{CorrelationFF, FidelityFF};
pub use process::{CorrelationInfidelityMatrix, DecayAmplitudes, ProcessMap};
pub use pulse::{InstantaneousGate, NoiseChannel, PulseSequence, Segment};
pub use spectrum::{FrequencyGrid, SpectralDensity};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix type used for operators and propagators.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector type.
pub type CVector = nalgebra::DVector<C64>;
/// Dense real matrix type (transfer matrices, decay amplitudes).
pub type RMatrix = nalgebra::DMatrix<f64>;
