//! Coupled-Gaussian variational solver for the dimensionless dipolar
//! Gross-Pitaevskii equation in a triple-well trap.
//!
//! The condensate wave function is represented as a superposition of three
//! Gaussian wave packets in the frozen-z gauge,
//!
//! ```text
//! Psi(r) = sum_k exp(-((r - q^k)^T A^k (r - q^k) - i p^k.(r - q^k) + gamma^k)),
//! ```
//!
//! and propagated with the McLachlan time-dependent variational principle:
//! the packet parameters obey `K zdot = h`, where `K` collects the real
//! parts of the parameter-derivative overlaps and `h` projects the action of
//! the full mean-field Hamiltonian onto the tangent space. All matrix
//! elements are closed-form Gaussian integrals except the dipolar term,
//! which reduces to a one-dimensional integral over heat-kernel-broadened
//! Gaussians evaluated by adaptive quadrature.

mod elements;
mod eom;
mod error;
mod gauss;
mod packet;
mod quad;
mod rk;
mod state;

pub use elements::{
    hamiltonian_elements, observables_variational, HamiltonianElements, PairMatrix,
    VariationalObservables,
};
pub use eom::{eom_rhs, rhs_observables, EomRhs, Mode, TdvpSystem};
pub use error::VariationalError;
pub use packet::GaussianPacket;
pub use rk::{
    propagate, relax, IntegrationStats, StepControl, VarRelaxOptions, VarRelaxOutcome,
    VarRelaxReport,
};
pub use state::{pair_overlap, VariationalState, NPACKETS, NPARAMS, PACKET_PARAMS};
