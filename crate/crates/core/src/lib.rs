//! Adaptive adiabatic state preparation on the complete graph.
//!
//! The interpolated Hamiltonian is `H(s) = (1 - s) L + s W`, where `L = V I - J`
//! is the combinatorial Laplacian of the complete graph on `V` vertices and `W`
//! is a diagonal cost function with a unique zero at the marked vertex.
//!
//! Modules, bottom-up:
//!
//! * [`model`]: cost functions, the Hamiltonian family and `O(V)` matvecs.
//! * [`spectrum`]: secular-equation eigensolver plus a dense reference solver.
//! * [`cheeger`]: ground-state weighted cut ratios and gap sandwiches.
//! * [`adiabatic`]: schedules, Weyl step sizing and the Schrödinger integrator.
//! * [`cg_oracle`]: the sampled complete-graph gap oracle.
//! * [`baa`]: the adaptive schedule builder and sublevel-set diagnostics.
//! * [`optimize`]: the spectral-ratio guessing outer loop.

pub mod adiabatic;
pub mod baa;
pub mod cg_oracle;
pub mod cheeger;
mod error;
mod expm;
pub mod model;
pub mod optimize;
pub mod spectrum;

pub use error::{Error, Result};
pub use model::{CostFunction, HamiltonianFamily, RunParams};
