//! Simulation of disorder-induced (Anderson) localisation in spin chains
//! engineered for perfect state transfer.
//!
//! The crate works in the single-excitation subspace, where an `N`-site chain
//! is an `N x N` real symmetric tridiagonal Hamiltonian. Units: ħ = 1, energies
//! in units of the maximum coupling `J_max`, times in `ħ/J_max`.
//!
//! - [`chain`]: coupling profiles, Hamiltonians and the mirror operator.
//! - [`eigen`]: implicit-shift QL eigensolver.
//! - [`dynamics`]: spectral time evolution, fidelities, stepped-integration
//!   cross-check.
//! - [`disorder`]: reproducible disorder realizations and ensemble runner.
//! - [`analysis`]: steady-state, eigenstate and transfer diagnostics.
//!
//! Ensembles run on rayon when the default `parallel` feature is enabled and
//! sequentially otherwise; results are bit-identical either way.

pub mod analysis;
pub mod chain;
pub mod disorder;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod state;

pub use chain::{build_hamiltonian, ChainSpec, CouplingLaw, Hamiltonian};
pub use disorder::{DisorderRealization, EnsembleSpec, Workers};
pub use eigen::{diagonalize, EigenSystem};
pub use error::{Error, Result};
pub use state::StateVector;

/// Library version, recorded in run manifests.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
