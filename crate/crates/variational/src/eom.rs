//! Variational equations of motion (McLachlan principle with real
//! parameters): `K zdot = h` with `K_{ab} = Re <v_a|v_b>`.

use nalgebra::{DMatrix, DVector};

use crate::elements::{assemble, observables_from_elements, HamiltonianElements};
use crate::error::VariationalError;
use crate::state::{VariationalState, NPARAMS};
use tgpe_core::Params;

/// Propagation mode of the variational flow. Real time takes
/// `h_a = Im <v_a|H Psi>` (unitary dynamics); imaginary time takes
/// `h_a = -Re <v_a|(H - mu) Psi>` (norm-preserving gradient descent of the
/// energy functional).
pub use tgpe_core::Mode;

/// Assembled normal equations of the variational principle.
#[derive(Clone, Debug)]
pub struct TdvpSystem {
    /// Real symmetric positive semi-definite tangent overlap matrix.
    pub k: DMatrix<f64>,
    /// Right-hand side for the requested mode.
    pub h: DVector<f64>,
    /// Smallest retained singular value of `K` in the pseudo-inverse solve.
    pub conditioning: f64,
}

/// Result of one right-hand-side evaluation.
#[derive(Clone, Debug)]
pub struct EomRhs {
    pub system: TdvpSystem,
    /// Parameter velocities `zdot = K^+ h` (pseudo-inverse solve).
    pub zdot: [f64; NPARAMS],
    /// Chemical potential of the instantaneous state.
    pub mu: f64,
    /// Mean-field energy of the instantaneous state.
    pub e_mf: f64,
    pub elements: HamiltonianElements,
}

/// Relative eigenvalue floor of the pseudo-inverse of `K`.
const PINV_FLOOR: f64 = 1e-10;
/// Largest tolerated fraction of `h` lying in the discarded null space.
const NULL_RESIDUAL: f64 = 1e-6;

/// Assemble `K`, `h` and solve for the parameter velocities.
///
/// The solve uses a spectral pseudo-inverse with a relative floor of 1e-10;
/// if the right-hand side has a significant component in the discarded
/// subspace the flow is ill-defined (near-coalescing packets) and an
/// [`VariationalError::IllConditioned`] error is raised.
pub fn eom_rhs(
    state: &VariationalState,
    params: &Params,
    mode: Mode,
) -> Result<EomRhs, VariationalError> {
    let asm = assemble(state, params, true)?;
    let k = asm.k.expect("assembled with TDVP terms");
    let el = asm.elements;

    let norm = el.norm_squared();
    let (t, vtw, vsc, vdd) = el.expectations();
    let mu = (t + vtw + vsc + vdd) / norm;
    let e_mf = t + vtw + 0.5 * (vsc + vdd);

    let mut h = DVector::<f64>::zeros(NPARAMS);
    match mode {
        Mode::RealTime => {
            for a in 0..NPARAMS {
                h[a] = asm.hv[a].im;
            }
        }
        Mode::ImaginaryTime => {
            for a in 0..NPARAMS {
                h[a] = -(asm.hv[a].re - mu * asm.sv[a].re);
            }
        }
    }

    let (zdot, conditioning) = solve_pinv(&k, &h)?;

    Ok(EomRhs {
        system: TdvpSystem { k, h, conditioning },
        zdot,
        mu,
        e_mf,
        elements: el,
    })
}

fn solve_pinv(k: &DMatrix<f64>, h: &DVector<f64>) -> Result<([f64; NPARAMS], f64), VariationalError> {
    let hnorm = h.norm();
    if !hnorm.is_finite() {
        return Err(VariationalError::IllConditioned);
    }

    // Fast path: for a numerically positive-definite K the floored
    // pseudo-inverse coincides with the plain inverse, and a Cholesky solve
    // with one refinement pass is backward-stable and, crucially, a smooth
    // function of (K, h). An iterative eigendecomposition is avoided here on
    // purpose: on clustered spectra it can return inaccurate eigenvectors,
    // which makes the reconstructed solution jump under tiny perturbations
    // of K and wrecks downstream step control.
    if let Some(chol) = k.clone().cholesky() {
        let mut z = chol.solve(h);
        let r = h - k * &z;
        z += chol.solve(&r);
        let resid = (h - k * &z).norm();
        // Smallest/largest eigenvalue estimates by a few (inverse) power
        // iterations, used for the conditioning report and to detect modes
        // at the pseudo-inverse floor that demand the exact spectral path.
        let lmin = est_extreme(|v| chol.solve(v), k.nrows()).recip();
        let lmax = est_extreme(|v| k * v, k.nrows());
        if resid <= 1e-10 * hnorm.max(f64::MIN_POSITIVE)
            && lmax.is_finite()
            && lmin > 10.0 * PINV_FLOOR * lmax
        {
            let mut out = [0.0; NPARAMS];
            out.copy_from_slice(z.as_slice());
            return Ok((out, lmin));
        }
    }

    // Robust path: spectral pseudo-inverse with the singular-value floor,
    // using cyclic Jacobi (unconditionally convergent, eigenvectors
    // orthogonal to rounding by construction).
    let (vals, vecs) = jacobi_eigen(k);
    let lmax = vals.iter().fold(0.0f64, |m, &l| m.max(l));
    if !lmax.is_finite() || lmax <= 0.0 {
        return Err(VariationalError::IllConditioned);
    }
    let floor = PINV_FLOOR * lmax;

    // zdot = sum_{l_i > floor} (q_i . h / l_i) q_i.
    let mut zdot = DVector::<f64>::zeros(NPARAMS);
    let mut kept = DVector::<f64>::zeros(NPARAMS); // projection of h on kept modes
    let mut lmin_kept = lmax;
    for (i, &l) in vals.iter().enumerate() {
        if l > floor {
            let q = vecs.column(i);
            let c = q.dot(h);
            zdot.axpy(c / l, &q, 1.0);
            kept.axpy(c, &q, 1.0);
            lmin_kept = lmin_kept.min(l);
        }
    }
    let residual = (h - kept).norm();
    if hnorm > 0.0 && residual > NULL_RESIDUAL * hnorm {
        return Err(VariationalError::IllConditioned);
    }

    let mut out = [0.0; NPARAMS];
    out.copy_from_slice(zdot.as_slice());
    Ok((out, lmin_kept))
}

/// Largest eigenvalue of the map `apply` (symmetric positive definite) by a
/// few power iterations from a fixed deterministic start vector. Only used
/// for conditioning estimates, so a percent-level result is plenty.
fn est_extreme<F>(apply: F, n: usize) -> f64
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut v = DVector::<f64>::from_fn(n, |i, _| {
        (if i % 2 == 0 { 1.0f64 } else { -0.7 }) / (i + 1) as f64
    });
    v /= v.norm();
    let mut lam = 0.0;
    for _ in 0..6 {
        let w = apply(&v);
        lam = v.dot(&w);
        let n2 = w.norm();
        if !(n2 > 0.0) || !n2.is_finite() {
            return f64::NAN;
        }
        v = w / n2;
    }
    lam.abs()
}

/// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method
/// (Golub & Van Loan, Alg. 8.4.3): returns eigenvalues and the orthogonal
/// matrix of eigenvectors (columns). Convergence is unconditional and the
/// accumulated rotations keep the basis orthogonal to rounding level, which
/// the spectral pseudo-inverse relies on.
fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let frob2: f64 = m.iter().map(|x| x * x).sum();
    // Drive the off-diagonal mass to the rounding floor: eigenvalues enter a
    // pseudo-inverse with a 1e-10 relative floor, so they must be resolved
    // far below that. Quadratic convergence makes the final sweeps cheap.
    let tol2 = (1e-28 * frob2).max(f64::MIN_POSITIVE);

    for _sweep in 0..50 {
        let mut off2 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off2 += 2.0 * m[(p, q)] * m[(p, q)];
            }
        }
        if off2 <= tol2 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Rotation angle that annihilates m[p][q].
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = c * mip - s * miq;
                    m[(i, q)] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = c * mpj - s * mqj;
                    m[(q, j)] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
    }
    let vals: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    (vals, v)
}

/// Observables computed alongside an RHS evaluation without reassembling.
pub fn rhs_observables(
    state: &VariationalState,
    rhs: &EomRhs,
) -> Result<crate::elements::VariationalObservables, VariationalError> {
    observables_from_elements(state, &rhs.elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic symmetric test matrix with a deliberately clustered
    /// spectrum: A = B^T B + c * I has all the B^T B eigenvalue collisions
    /// shifted together.
    fn test_matrix(n: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed;
        let mut rnd = move || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let b = DMatrix::<f64>::from_fn(n, n, |_, _| rnd());
        let mut a = b.transpose() * &b;
        for i in 0..n {
            a[(i, i)] += 1e-4;
        }
        a
    }

    #[test]
    fn jacobi_eigen_is_orthogonal_and_reconstructs() {
        for seed in [1u64, 42, 9001] {
            let a = test_matrix(17, seed);
            let n = a.nrows();
            let (vals, vecs) = jacobi_eigen(&a);

            let vtv = vecs.transpose() * &vecs;
            let mut worst_orth = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst_orth = worst_orth.max((vtv[(i, j)] - want).abs());
                }
            }
            assert!(worst_orth <= 1e-13, "basis not orthogonal: {worst_orth:.3e}");

            let d = DMatrix::from_diagonal(&DVector::from_vec(vals));
            let rec = &vecs * d * vecs.transpose();
            let scale = a.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((rec[(i, j)] - a[(i, j)]).abs());
                }
            }
            assert!(
                worst <= 1e-12 * scale.max(1.0),
                "reconstruction error {worst:.3e}"
            );
        }
    }
}
