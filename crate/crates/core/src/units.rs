//! Conversion between laboratory (SI) quantities and the dimensionless units
//! of the solver: lengths in units of the well spacing `l`, energies in
//! `hbar^2/(m l^2)`, times in `m l^2/hbar`.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::params::PhysicalParams;
use crate::scalar::Real;

/// Reduced Planck constant in J*s (CODATA 2018, exact by SI definition).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit in kg (CODATA 2018).
pub const ATOMIC_MASS_KG: f64 = 1.660_539_066_60e-27;

/// The two dimensional scales that define the unit system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: Deserialize<'de>"))]
pub struct UnitSystem<F: Real = f64> {
    /// Inter-well spacing `l` in meters.
    pub l_meters: F,
    /// Particle mass in kilograms.
    pub mass_kg: F,
}

impl<F: Real> UnitSystem<F> {
    pub fn new(l_meters: F, mass_kg: F) -> Result<Self, CoreError> {
        let s = Self { l_meters, mass_kg };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.l_meters > F::zero()) || !self.l_meters.is_finite() {
            return Err(CoreError::invalid_units("well spacing must be positive"));
        }
        if !(self.mass_kg > F::zero()) || !self.mass_kg.is_finite() {
            return Err(CoreError::invalid_units("particle mass must be positive"));
        }
        Ok(())
    }

    /// Energy unit `hbar^2/(m l^2)` in joules. Recomputed on demand.
    pub fn energy_unit_joules(&self) -> F {
        let hbar = F::lit(HBAR);
        hbar * hbar / (self.mass_kg * self.l_meters * self.l_meters)
    }

    /// Time unit `m l^2/hbar` in seconds. Recomputed on demand.
    pub fn time_unit_seconds(&self) -> F {
        self.mass_kg * self.l_meters * self.l_meters / F::lit(HBAR)
    }
}

/// Converts laboratory scattering lengths to the dimensionless interaction
/// strengths `na = N a / l`, `nadd = N a_dd / l` and reports the time unit in
/// seconds. The returned [`PhysicalParams`] carries the default trap and
/// polarization.
///
/// `a_meters` may be negative (attractive s-wave interaction); the dipolar
/// length must be non-negative.
pub fn convert_units<F: Real>(
    n_atoms: u64,
    a_meters: F,
    add_meters: F,
    units: &UnitSystem<F>,
) -> Result<(PhysicalParams<F>, F), CoreError> {
    units.validate()?;
    if !a_meters.is_finite() {
        return Err(CoreError::invalid_param("scattering length must be finite"));
    }
    if !(add_meters >= F::zero()) || !add_meters.is_finite() {
        return Err(CoreError::invalid_param(
            "dipolar length must be finite and >= 0",
        ));
    }
    let n = F::from_u64(n_atoms)
        .ok_or_else(|| CoreError::invalid_param("atom number not representable"))?;
    let params = PhysicalParams::new(n * a_meters / units.l_meters, n * add_meters / units.l_meters);
    Ok((params, units.time_unit_seconds()))
}
