//! Pointwise evaluation of the three potential terms of the mean-field
//! equation: the Gaussian triple-well trap, the k-space dipolar kernel and
//! the contact term.

use crate::params::{Polarization, TrapParams};
use crate::scalar::Real;

/// Evaluates the triple-well trap potential
/// `-v0 * sum_i exp(-2(x - q_i)^2/wx^2 - 2y^2/wy^2 - 2z^2/wz^2)`.
///
/// The per-well terms are accumulated in value-sorted order so that mirrored
/// positions under a symmetric center list produce bit-identical results
/// (floating-point addition is not associative; sorting makes the sum a
/// function of the term multiset only).
pub fn eval_trap_potential<F: Real>(r: [F; 3], trap: &TrapParams<F>) -> F {
    let two = F::lit(2.0);
    let [x, y, z] = r;
    let transverse = -two * (y / trap.wy).powi(2) - two * (z / trap.wz).powi(2);

    // Few wells in practice; a small stack buffer avoids per-call allocation.
    const STACK: usize = 8;
    let mut buf = [F::zero(); STACK];
    let mut heap;
    let terms: &mut [F] = if trap.centers.len() <= STACK {
        &mut buf[..trap.centers.len()]
    } else {
        heap = vec![F::zero(); trap.centers.len()];
        &mut heap
    };
    for (t, &c) in terms.iter_mut().zip(&trap.centers) {
        let dx = (x - c) / trap.wx;
        *t = (transverse - two * dx * dx).exp();
    }
    terms.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite trap terms"));
    let mut sum = F::zero();
    for &t in terms.iter() {
        sum = sum + t;
    }
    -trap.v0 * sum
}

/// Fourier-space kernel of the dipole-dipole interaction `(1 - 3cos^2 v)/r^3`
/// for dipoles aligned with the given axis:
/// `(4*pi/3) * (3*k_axis^2/|k|^2 - 1)`, with the `k = 0` value set to `0` by
/// convention (it fixes the mean dipolar potential; the directional limit is
/// averaged out).
///
/// The result is bounded in `[-4*pi/3, 8*pi/3]` and homogeneous of degree 0
/// in `k`.
pub fn dipole_kernel_k<F: Real>(k: [F; 3], polarization: Polarization) -> F {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == F::zero() {
        return F::zero();
    }
    let ka = match polarization {
        Polarization::Z => k[2],
        Polarization::X => k[0],
    };
    let three = F::lit(3.0);
    let four_pi_over_3 = F::lit(4.0) * F::PI() / three;
    four_pi_over_3 * (three * ka * ka / k2 - F::one())
}

/// Contact (s-wave) interaction potential `4*pi*na*density`.
pub fn contact_potential<F: Real>(density: F, na: F) -> F {
    F::lit(4.0) * F::PI() * na * density
}
