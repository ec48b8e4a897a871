//! Wave-function samples on the grid and the initial-state constructors.

use num_complex::Complex64;
use tgpe_core::Trap;
use tgpe_variational::VariationalState;

use crate::error::{GridError, Result};
use crate::spec::GridSpec;

/// Complex wave function sampled on a [`GridSpec`] with its cached norm
/// `intgrl |psi|^2 dV`.
#[derive(Clone, Debug)]
pub struct GridState {
    pub psi: Vec<Complex64>,
    pub spec: GridSpec,
    /// Cached squared norm; maintained by [`GridState::normalize`] and the
    /// propagation routines.
    pub norm: f64,
}

/// Initial-state recipes for [`init_state`].
#[derive(Clone, Debug)]
pub enum InitKind {
    /// One broad Gaussian covering all wells (widths `(2, w_y/2, w_z/2)`).
    SingleGaussian,
    /// One Gaussian of width `(w_x/2, w_y/2, w_z/2)` centered on each well.
    ThreeGaussian,
    /// Sample a coupled-Gaussian variational state on the grid.
    FromVariational(VariationalState),
    /// Load a binary field dump; dimensions and box must match `spec`.
    FromFile(std::path::PathBuf),
}

impl GridState {
    /// Allocate an all-zero (invalid) state; used internally by builders.
    fn zeros(spec: GridSpec) -> Self {
        Self {
            psi: vec![Complex64::default(); spec.len()],
            spec,
            norm: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.psi.len() != self.spec.len() {
            return Err(GridError::InvalidState(format!(
                "field has {} samples, spec wants {}",
                self.psi.len(),
                self.spec.len()
            )));
        }
        if !self.psi.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(GridError::InvalidState("non-finite samples".into()));
        }
        Ok(())
    }

    /// `intgrl |psi|^2 dV` by the midpoint rule (exact for the grid measure).
    pub fn norm_squared(&self) -> f64 {
        let dv = self.spec.dv();
        self.psi.iter().map(|v| v.norm_sqr()).sum::<f64>() * dv
    }

    /// Rescale to unit norm and refresh the cache.
    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_squared();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(GridError::InvalidState(format!(
                "cannot normalize state with |psi|^2 = {n2}"
            )));
        }
        let s = 1.0 / n2.sqrt();
        for v in &mut self.psi {
            *v *= s;
        }
        self.norm = 1.0;
        Ok(())
    }

    pub fn peak_density(&self) -> f64 {
        self.psi.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max)
    }
}

/// Build a normalized initial state.
///
/// The trap fixes the Gaussian recipe geometry (well centers and widths);
/// `FromFile` requires the dump's grid and box to match `spec` exactly
/// (the file does not carry `dt`, which is taken from `spec`).
pub fn init_state(spec: &GridSpec, kind: InitKind, trap: &Trap) -> Result<GridState> {
    spec.validate()?;
    trap.validate()?;
    let mut state = GridState::zeros(*spec);
    let x = spec.axis(0);
    let y = spec.axis(1);
    let z = spec.axis(2);

    match kind {
        InitKind::SingleGaussian => {
            // Broad along x to cover all wells; transverse widths follow the
            // well geometry.
            let (wx, wy, wz) = (2.0, trap.wy / 2.0, trap.wz / 2.0);
            fill_gaussians(&mut state, &[0.0], (wx, wy, wz), &x, &y, &z, spec);
        }
        InitKind::ThreeGaussian => {
            let (wx, wy, wz) = (trap.wx / 2.0, trap.wy / 2.0, trap.wz / 2.0);
            fill_gaussians(&mut state, &trap.centers, (wx, wy, wz), &x, &y, &z, spec);
        }
        InitKind::FromVariational(vs) => {
            for (ix, &xv) in x.iter().enumerate() {
                for (iy, &yv) in y.iter().enumerate() {
                    for (iz, &zv) in z.iter().enumerate() {
                        state.psi[spec.idx(ix, iy, iz)] =
                            vs.eval_wavefunction([xv, yv, zv]);
                    }
                }
            }
        }
        InitKind::FromFile(path) => {
            let (loaded, _meta) = crate::io::read_state(&path)?;
            let s = &loaded.spec;
            let same_geom = s.dims() == spec.dims()
                && s.half_extents() == spec.half_extents();
            if !same_geom {
                return Err(GridError::Format(format!(
                    "dump geometry {:?}/{:?} does not match the requested spec {:?}/{:?}",
                    s.dims(),
                    s.half_extents(),
                    spec.dims(),
                    spec.half_extents()
                )));
            }
            state.psi = loaded.psi;
        }
    }

    state.normalize()?;
    state.validate()?;
    Ok(state)
}

#[allow(clippy::too_many_arguments)]
fn fill_gaussians(
    state: &mut GridState,
    centers: &[f64],
    (wx, wy, wz): (f64, f64, f64),
    x: &[f64],
    y: &[f64],
    z: &[f64],
    spec: &GridSpec,
) {
    for (ix, &xv) in x.iter().enumerate() {
        for (iy, &yv) in y.iter().enumerate() {
            for (iz, &zv) in z.iter().enumerate() {
                let mut v = 0.0;
                for &c in centers {
                    let dx = (xv - c) / wx;
                    let dy = yv / wy;
                    let dz = zv / wz;
                    v += (-dx * dx - dy * dy - dz * dz).exp();
                }
                state.psi[spec.idx(ix, iy, iz)] = Complex64::new(v, 0.0);
            }
        }
    }
}
