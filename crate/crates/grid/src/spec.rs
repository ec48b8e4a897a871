//! Grid geometry: point counts, box half-extents, and step size.

use crate::error::{GridError, Result};

/// Rectangular 3-D grid covering `[-L_i, L_i)` per axis with `n_i` points
/// (each a power of two) and a fixed time step `dt` shared by real- and
/// imaginary-time propagation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Box half-extent along x (grid spans `[-lx, lx)`).
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
    /// Step size in time units (applied as `-i*dt*H` or `-dt*H`).
    pub dt: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nx: 128,
            ny: 96,
            nz: 64,
            lx: 4.0,
            ly: 6.0,
            lz: 3.0,
            dt: 1e-3,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (n, name) in [(self.nx, "nx"), (self.ny, "ny"), (self.nz, "nz")] {
            // FFT-friendly sizes: even, >= 8, with only 2/3/5 prime factors
            // (the canonical 128x96x64 default includes 96 = 2^5 * 3).
            let mut m = n;
            for p in [2usize, 3, 5] {
                while m % p == 0 {
                    m /= p;
                }
            }
            if n < 8 || n % 2 != 0 || m != 1 {
                return Err(GridError::InvalidSpec(format!(
                    "{name} = {n} must be even, >= 8, and factor into 2/3/5"
                )));
            }
        }
        for (l, name) in [(self.lx, "lx"), (self.ly, "ly"), (self.lz, "lz")] {
            if !(l > 0.0) || !l.is_finite() {
                return Err(GridError::InvalidSpec(format!(
                    "{name} = {l} must be positive and finite"
                )));
            }
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(GridError::InvalidSpec(format!(
                "dt = {} must be positive and finite",
                self.dt
            )));
        }
        if self.dt > self.dt_bound() {
            return Err(GridError::InvalidSpec(format!(
                "dt = {} exceeds the stability guard h_min^2/pi = {:.3e}",
                self.dt,
                self.dt_bound()
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn half_extents(&self) -> [f64; 3] {
        [self.lx, self.ly, self.lz]
    }

    /// Spacing along axis `d`.
    pub fn h(&self, d: usize) -> f64 {
        2.0 * self.half_extents()[d] / self.dims()[d] as f64
    }

    pub fn h_min(&self) -> f64 {
        self.h(0).min(self.h(1)).min(self.h(2))
    }

    /// Documented stability guard for the splitting step: `dt <= h_min^2/pi`.
    pub fn dt_bound(&self) -> f64 {
        let h = self.h_min();
        h * h / std::f64::consts::PI
    }

    /// Volume element.
    pub fn dv(&self) -> f64 {
        self.h(0) * self.h(1) * self.h(2)
    }

    /// Sample coordinates along axis `d`: `-L + j*h`.
    pub fn axis(&self, d: usize) -> Vec<f64> {
        let (n, l, h) = (self.dims()[d], self.half_extents()[d], self.h(d));
        (0..n).map(|j| -l + j as f64 * h).collect()
    }

    /// FFT-ordered angular wavenumbers along axis `d`:
    /// `k_j = (pi/L) * m` with `m = j` for `j < n/2` and `m = j - n` after.
    pub fn wavenumbers(&self, d: usize) -> Vec<f64> {
        let (n, l) = (self.dims()[d], self.half_extents()[d]);
        let dk = std::f64::consts::PI / l;
        (0..n)
            .map(|j| {
                let m = if j < n / 2 {
                    j as isize
                } else {
                    j as isize - n as isize
                };
                dk * m as f64
            })
            .collect()
    }

    /// Linear index with z fastest: `(ix*ny + iy)*nz + iz`.
    #[inline]
    pub fn idx(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.ny + iy) * self.nz + iz
    }
}
