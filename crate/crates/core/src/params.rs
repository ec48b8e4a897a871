//! Dimensionless parameter sets shared by both solver back-ends.
//!
//! All lengths are measured in units of the inter-well spacing `l`, energies
//! in `hbar^2 / (m l^2)` and times in `m l^2 / hbar`, so the only physical
//! knobs left in the mean-field equation are the scaled interaction strengths
//! `Na` and `Na_dd`, the trap geometry and the dipole polarization axis.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::scalar::Real;

/// Dipole polarization axis.
///
/// `Z` is the repulsive side-by-side configuration (dipoles perpendicular to
/// the well-chain axis), `X` the attractive head-to-tail one (dipoles along
/// the chain).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    #[default]
    Z,
    X,
}

/// Geometry of the triple-well trap: a sum of Gaussian wells along x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: Deserialize<'de>"
))]
pub struct TrapParams<F: Real = f64> {
    /// Well depth `V_0` (> 0).
    pub v0: F,
    /// Gaussian width along x.
    pub wx: F,
    /// Gaussian width along y.
    pub wy: F,
    /// Gaussian width along z.
    pub wz: F,
    /// Well centers `q_x^i` on the x axis.
    pub centers: Vec<F>,
}

impl<F: Real> Default for TrapParams<F> {
    fn default() -> Self {
        Self {
            v0: F::lit(80.0),
            wx: F::lit(0.5),
            wy: F::lit(4.0),
            wz: F::lit(0.5),
            centers: vec![F::lit(-1.0), F::zero(), F::lit(1.0)],
        }
    }
}

impl<F: Real> TrapParams<F> {
    /// Checks positivity of the depth and widths and that at least one well
    /// is present.
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.v0 > F::zero()) {
            return Err(CoreError::invalid_param("trap.v0 must be > 0"));
        }
        for (name, w) in [("wx", self.wx), ("wy", self.wy), ("wz", self.wz)] {
            if !(w > F::zero()) || !w.is_finite() {
                return Err(CoreError::invalid_param(format!(
                    "trap.{name} must be positive and finite"
                )));
            }
        }
        if self.centers.is_empty() {
            return Err(CoreError::invalid_param("trap.centers must not be empty"));
        }
        if self.centers.iter().any(|c| !c.is_finite()) {
            return Err(CoreError::invalid_param("trap.centers must be finite"));
        }
        Ok(())
    }
}

/// The dimensionless knobs of the mean-field equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: Deserialize<'de>"
))]
pub struct PhysicalParams<F: Real = f64> {
    /// Scaled s-wave strength `Na` (may be negative).
    pub na: F,
    /// Scaled dipolar strength `Na_dd` (>= 0).
    pub nadd: F,
    pub trap: TrapParams<F>,
    pub polarization: Polarization,
}

impl<F: Real> Default for PhysicalParams<F> {
    fn default() -> Self {
        Self {
            na: F::zero(),
            nadd: F::zero(),
            trap: TrapParams::default(),
            polarization: Polarization::Z,
        }
    }
}

impl<F: Real> PhysicalParams<F> {
    /// Convenience constructor with the default trap and z polarization.
    pub fn new(na: F, nadd: F) -> Self {
        Self {
            na,
            nadd,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if !self.na.is_finite() {
            return Err(CoreError::invalid_param("na must be finite"));
        }
        if !(self.nadd >= F::zero()) || !self.nadd.is_finite() {
            return Err(CoreError::invalid_param("nadd must be finite and >= 0"));
        }
        self.trap.validate()
    }
}

/// Direction of the time evolution generated by the mean-field Hamiltonian:
/// real time (`exp(-iHt)`, unitary) or imaginary time (`exp(-Ht)`, gradient
/// flow with renormalization after each accepted step).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    RealTime,
    ImaginaryTime,
}

/// Linear scattering-length ramp: `na(t)` interpolates from `na_start` at
/// `t = 0` to `na_end` at `t = t_ramp` and stays constant afterwards;
/// `nadd` is held fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule<F: Real = f64> {
    pub na_start: F,
    pub na_end: F,
    pub t_ramp: F,
    pub nadd: F,
}

impl<F: Real> RampSchedule<F> {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.t_ramp > F::zero()) {
            return Err(CoreError::invalid_param("ramp t_ramp must be > 0"));
        }
        for v in [self.na_start, self.na_end, self.nadd] {
            if !v.is_finite() {
                return Err(CoreError::invalid_param("ramp values must be finite"));
            }
        }
        if !(self.nadd >= F::zero()) {
            return Err(CoreError::invalid_param("ramp nadd must be >= 0"));
        }
        Ok(())
    }

    /// Scattering-length value at time `t` (clamped to the ramp endpoints).
    pub fn na(&self, t: F) -> F {
        if t <= F::zero() {
            self.na_start
        } else if t >= self.t_ramp {
            self.na_end
        } else {
            self.na_start + (self.na_end - self.na_start) * (t / self.t_ramp)
        }
    }
}
