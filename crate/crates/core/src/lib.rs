//! Trapped ion-laser interaction in a truncated Fock ⊗ spin basis.
//!
//! The crate builds the ion-laser Hamiltonians (full dipole, post-RWA,
//! low-intensity Laguerre form, linearized, Jaynes–Cummings and dispersive),
//! propagates them exactly through Hermitian eigendecomposition, evaluates the
//! closed-form regime solutions, and compares the resulting excited-state
//! populations `P_e(t)`.
//!
//! Basis ordering is spin-major: index `spin · (n_max + 1) + n`, with spin
//! index 0 for `|e⟩` and 1 for `|g⟩`.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod models;
pub mod propagation;
pub mod scenario;

pub use error::{Error, Result};
pub use fock::{FockDim, OperatorMatrix, Spin};
pub use models::{CouplingConstants, Detuning, DispersiveForm, ModelParams};
pub use propagation::{ModelTag, StateVector, TimeGrid, TimeSeries};
