//! Dimensionless parameterization of a dipolar condensate in a Gaussian
//! triple-well trap, plus pointwise evaluation of the potential terms shared
//! by the spectral-grid and variational solvers.
//!
//! Units: lengths in the well spacing `l`, energies in `hbar^2/(m l^2)`,
//! times in `m l^2/hbar`. The mean-field equation then reads
//!
//! ```text
//! i dPsi/dt = ( -1/2 Laplacian + V_tw + V_dd + V_sc ) Psi
//! V_tw = -v0 sum_i exp(-2(x - q_i)^2/wx^2 - 2y^2/wy^2 - 2z^2/wz^2)
//! V_dd = 3 Na_dd intgrl (1 - 3 cos^2 v)/|r - r'|^3 |Psi(r')|^2 d^3r'
//! V_sc = 4 pi Na |Psi|^2
//! ```
//!
//! with `|Psi|` normalized to one. The formulas are generic over the scalar
//! type; the concrete aliases below pin the `f64` instantiation used by the
//! solver crates.

mod error;
mod params;
mod potentials;
mod scalar;
mod units;

pub use error::CoreError;
pub use params::{Mode, PhysicalParams, Polarization, RampSchedule, TrapParams};
pub use potentials::{contact_potential, dipole_kernel_k, eval_trap_potential};
pub use scalar::Real;
pub use units::{convert_units, UnitSystem, ATOMIC_MASS_KG, HBAR};

/// Concrete `f64` parameter set used by the solvers.
pub type Params = PhysicalParams<f64>;
/// Concrete `f64` trap geometry.
pub type Trap = TrapParams<f64>;
/// Concrete `f64` unit system.
pub type Units = UnitSystem<f64>;
