//! Three-dimensional FFT built from per-axis one-dimensional plans, with a
//! transform counter (the splitting contract fixes the number of 3-D
//! transforms per step).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::spec::GridSpec;

pub struct FftEngine {
    dims: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
    scratch: Vec<Complex64>,
    line: Vec<Complex64>,
    count: u64,
}

impl FftEngine {
    pub fn new(spec: &GridSpec) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let dims = spec.dims();
        let fwd = [
            planner.plan_fft_forward(dims[0]),
            planner.plan_fft_forward(dims[1]),
            planner.plan_fft_forward(dims[2]),
        ];
        let inv = [
            planner.plan_fft_inverse(dims[0]),
            planner.plan_fft_inverse(dims[1]),
            planner.plan_fft_inverse(dims[2]),
        ];
        let scratch_len = fwd
            .iter()
            .chain(inv.iter())
            .map(|p| p.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        let line_len = dims.iter().copied().max().unwrap();
        Self {
            dims,
            fwd,
            inv,
            scratch: vec![Complex64::default(); scratch_len],
            line: vec![Complex64::default(); line_len],
            count: 0,
        }
    }

    /// Number of full 3-D transforms executed so far (forward + inverse).
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Unnormalized forward 3-D transform.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// Inverse 3-D transform scaled by `1/(nx*ny*nz)` so that
    /// `inverse(forward(x)) == x`.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.transform(data, true);
        let scale = 1.0 / (self.dims[0] * self.dims[1] * self.dims[2]) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&mut self, data: &mut [Complex64], inverse: bool) {
        let [nx, ny, nz] = self.dims;
        assert_eq!(data.len(), nx * ny * nz, "field size mismatch");
        let plans = if inverse { &self.inv } else { &self.fwd };

        // z: lines are contiguous; rustfft processes the whole buffer as
        // consecutive chunks of length nz.
        plans[2].process_with_scratch(data, &mut self.scratch);

        // y: stride nz within each x slab.
        for ix in 0..nx {
            for iz in 0..nz {
                let base = ix * ny * nz + iz;
                for iy in 0..ny {
                    self.line[iy] = data[base + iy * nz];
                }
                plans[1].process_with_scratch(&mut self.line[..ny], &mut self.scratch);
                for iy in 0..ny {
                    data[base + iy * nz] = self.line[iy];
                }
            }
        }

        // x: stride ny*nz.
        let sx = ny * nz;
        for iy in 0..ny {
            for iz in 0..nz {
                let base = iy * nz + iz;
                for ix in 0..nx {
                    self.line[ix] = data[base + ix * sx];
                }
                plans[0].process_with_scratch(&mut self.line[..nx], &mut self.scratch);
                for ix in 0..nx {
                    data[base + ix * sx] = self.line[ix];
                }
            }
        }

        self.count += 1;
    }
}
