//! Closed-form integral and moment engine for products of frozen-z Gaussian
//! packets.
//!
//! Every integral the variational method needs reduces to
//! `intgrl poly(r) * exp(-r^T C r + b.r + c0) d^3r` with a complex symmetric
//! `C` whose real part is positive definite. In the frozen-z gauge `C` is
//! block diagonal (a 2x2 xy block plus a scalar zz entry) and `b_z = 0`, so
//! the z moments factorize from the xy moments. The Gaussian integral is
//! evaluated by sequential one-dimensional reduction, which keeps every
//! complex square root on its principal branch by construction (each 1-D
//! coefficient has positive real part).

use num_complex::Complex64;

use crate::packet::GaussianPacket;

pub(crate) const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `exp(-r^T C r + b.r + c0)` with the frozen-z block structure.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CGauss {
    pub cxx: Complex64,
    pub cyy: Complex64,
    pub czz: Complex64,
    pub cxy: Complex64,
    pub bx: Complex64,
    pub by: Complex64,
    pub c0: Complex64,
}

impl CGauss {
    /// Combined Gaussian of a bra-ket packet pair: `conj(g_a) * g_b`.
    pub fn from_pair(a: &GaussianPacket, b: &GaussianPacket) -> Self {
        let (axx, ayy, azz, axy) = (a.a_xx.conj(), a.a_yy.conj(), a.a_zz.conj(), a.a_xy.conj());
        let (bxx, byy, bzz, bxy) = (b.a_xx, b.a_yy, b.a_zz, b.a_xy);
        let i = Complex64::i();

        // Linear coefficients: 2 A_a* q_a + 2 A_b q_b + i (p_b - p_a).
        let bx = 2.0 * (axx * a.q[0] + axy * a.q[1]) + 2.0 * (bxx * b.q[0] + bxy * b.q[1])
            + i * (b.p[0] - a.p[0]);
        let by = 2.0 * (axy * a.q[0] + ayy * a.q[1]) + 2.0 * (bxy * b.q[0] + byy * b.q[1])
            + i * (b.p[1] - a.p[1]);

        let quad_a = axx * (a.q[0] * a.q[0]) + ayy * (a.q[1] * a.q[1]) + 2.0 * axy * (a.q[0] * a.q[1]);
        let quad_b = bxx * (b.q[0] * b.q[0]) + byy * (b.q[1] * b.q[1]) + 2.0 * bxy * (b.q[0] * b.q[1]);
        let c0 = -quad_a - quad_b + i * (a.p[0] * a.q[0] + a.p[1] * a.q[1])
            - i * (b.p[0] * b.q[0] + b.p[1] * b.q[1])
            - a.gamma.conj()
            - b.gamma;

        Self {
            cxx: axx + bxx,
            cyy: ayy + byy,
            czz: azz + bzz,
            cxy: axy + bxy,
            bx,
            by,
            c0,
        }
    }

    /// Pointwise product of two Gaussians (exponents add).
    pub fn product(&self, other: &Self) -> Self {
        Self {
            cxx: self.cxx + other.cxx,
            cyy: self.cyy + other.cyy,
            czz: self.czz + other.czz,
            cxy: self.cxy + other.cxy,
            bx: self.bx + other.bx,
            by: self.by + other.by,
            c0: self.c0 + other.c0,
        }
    }

    /// Whether the real part of C is positive definite (integrability).
    pub fn is_integrable(&self) -> bool {
        self.cxx.re > 0.0
            && self.czz.re > 0.0
            && self.cxx.re * self.cyy.re - self.cxy.re * self.cxy.re > 0.0
    }

    /// `intgrl exp(-r^T C r + b.r + c0) d^3r`.
    ///
    /// Equivalent to sequential 1-D reduction (y, then x with the Schur
    /// complement `cs = d2/cyy`), with the two xy square roots fused into
    /// `sqrt(d2)`: both `cyy` and `cs` lie strictly in the right half-plane,
    /// so their argument sum never wraps and the principal branches agree.
    pub fn integral(&self) -> Complex64 {
        let pi = std::f64::consts::PI;
        let d2 = self.cxx * self.cyy - self.cxy * self.cxy;
        // Sum all exponent pieces before the single exp: the completed
        // square and c0 can separately overflow for far-separated packets
        // even when their sum is moderate.
        let quad = self.cyy * self.bx * self.bx - 2.0 * self.cxy * self.bx * self.by
            + self.cxx * self.by * self.by;
        let expo = self.c0 + 0.25 * quad / d2;
        pi * pi.sqrt() / (self.czz.sqrt() * d2.sqrt()) * expo.exp()
    }

    /// Complex mean and covariance of the xy block plus the z variance, the
    /// inputs of the moment recursion.
    fn stats(&self) -> (Complex64, Complex64, Complex64, Complex64, Complex64, Complex64) {
        let d2 = self.cxx * self.cyy - self.cxy * self.cxy;
        let half = 0.5 / d2;
        let mx = (self.cyy * self.bx - self.cxy * self.by) * half;
        let my = (self.cxx * self.by - self.cxy * self.bx) * half;
        let sxx = self.cyy * half;
        let syy = self.cxx * half;
        let sxy = -self.cxy * half;
        let szz = 1.0 / (2.0 * self.czz);
        (mx, my, sxx, sxy, syy, szz)
    }
}

/// Raw monomial moments `E[x^i y^j z^k]` (normalized by the integral) of a
/// complex Gaussian weight, up to total degree 4 per block. The z block
/// factorizes because `b_z = 0` and there is no xz/yz coupling.
#[derive(Clone, Copy, Debug)]
pub(crate) struct MomentTable {
    /// Integral of the bare Gaussian.
    pub i0: Complex64,
    /// xy moments m[i][j] = E[x^i y^j], i + j <= 4.
    xy: [[Complex64; 5]; 5],
    /// z moments E[z^k], k <= 4 (odd ones vanish).
    z: [Complex64; 5],
}

impl MomentTable {
    pub fn build(g: &CGauss) -> Self {
        let i0 = g.integral();
        let (mx, my, sxx, sxy, syy, szz) = g.stats();

        // Gaussian raw-moment recursion (valid for complex mean/covariance
        // by analytic continuation):
        // m[i][j] = mx m[i-1][j] + (i-1) sxx m[i-2][j] + j sxy m[i-1][j-1].
        let mut xy = [[C_ZERO; 5]; 5];
        xy[0][0] = C_ONE;
        for j in 1..5usize {
            let a = my * xy[0][j - 1];
            let b = if j >= 2 {
                (j - 1) as f64 * syy * xy[0][j - 2]
            } else {
                C_ZERO
            };
            xy[0][j] = a + b;
        }
        for i in 1..5usize {
            for j in 0..5usize {
                if i + j > 4 {
                    continue;
                }
                let mut m = mx * xy[i - 1][j];
                if i >= 2 {
                    m += (i - 1) as f64 * sxx * xy[i - 2][j];
                }
                if j >= 1 {
                    m += j as f64 * sxy * xy[i - 1][j - 1];
                }
                xy[i][j] = m;
            }
        }

        let z = [C_ONE, C_ZERO, szz, C_ZERO, 3.0 * szz * szz];
        Self { i0, xy, z }
    }

    #[inline]
    pub fn raw(&self, i: u8, j: u8, k: u8) -> Complex64 {
        self.xy[i as usize][j as usize] * self.z[k as usize]
    }
}

/// Sparse polynomial in absolute coordinates, at most [`Poly::CAP`] monomials.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Poly {
    pub n: usize,
    pub coef: [Complex64; Poly::CAP],
    pub mono: [(u8, u8, u8); Poly::CAP],
}

impl Poly {
    pub const CAP: usize = 8;

    pub fn new() -> Self {
        Self {
            n: 0,
            coef: [C_ZERO; Self::CAP],
            mono: [(0, 0, 0); Self::CAP],
        }
    }

    pub fn push(&mut self, c: Complex64, m: (u8, u8, u8)) {
        if c == C_ZERO {
            return;
        }
        // Merge with an existing monomial if present; capacity is tight.
        for t in 0..self.n {
            if self.mono[t] == m {
                self.coef[t] += c;
                return;
            }
        }
        assert!(self.n < Self::CAP, "polynomial capacity exceeded");
        self.coef[self.n] = c;
        self.mono[self.n] = m;
        self.n += 1;
    }

    /// `self += c * other` termwise.
    pub fn add_scaled(&mut self, other: &Poly, c: Complex64) {
        for t in 0..other.n {
            self.push(c * other.coef[t], other.mono[t]);
        }
    }

    pub const fn one() -> Self {
        let mut coef = [C_ZERO; Self::CAP];
        coef[0] = C_ONE;
        Self {
            n: 1,
            coef,
            mono: [(0, 0, 0); Self::CAP],
        }
    }

    /// E[poly] under the table's Gaussian weight (not multiplied by i0).
    pub fn expect(&self, t: &MomentTable) -> Complex64 {
        let mut acc = C_ZERO;
        for a in 0..self.n {
            let (i, j, k) = self.mono[a];
            acc += self.coef[a] * t.raw(i, j, k);
        }
        acc
    }

    /// E[conj(bra) * ket]; monomial coefficients of the bra polynomial are
    /// conjugated (the monomials themselves are real).
    pub fn expect_pair(bra: &Poly, ket: &Poly, t: &MomentTable) -> Complex64 {
        let mut acc = C_ZERO;
        for a in 0..bra.n {
            let ca = bra.coef[a].conj();
            let (ia, ja, ka) = bra.mono[a];
            for b in 0..ket.n {
                let (ib, jb, kb) = ket.mono[b];
                acc += ca * ket.coef[b] * t.raw(ia + ib, ja + jb, ka + kb);
            }
        }
        acc
    }
}

/// A Gaussian density convolved with the heat kernel `exp(-s k^2)` (the
/// Schwinger-parameter representation of `1/k^2`), as a Gaussian with a
/// multiplicative prefactor.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Broadened {
    pub gauss: CGauss,
    pub pref: Complex64,
}

impl Broadened {
    pub fn new(rho: &CGauss, s: f64) -> Self {
        // z block: b_z = 0, so only the width changes.
        let dz = 1.0 + 4.0 * s * rho.czz;
        let czz = rho.czz / dz;

        // xy block: C_s = C M^-1, b_s = M^-1 b, M = I + 4 s C, and the
        // completed-square constant shifts by s * b^T M^-1 b.
        let m11 = 1.0 + 4.0 * s * rho.cxx;
        let m22 = 1.0 + 4.0 * s * rho.cyy;
        let m12 = 4.0 * s * rho.cxy;
        let det_m = m11 * m22 - m12 * m12;
        // M^-1 entries.
        let w11 = m22 / det_m;
        let w22 = m11 / det_m;
        let w12 = -m12 / det_m;
        let bx = w11 * rho.bx + w12 * rho.by;
        let by = w12 * rho.bx + w22 * rho.by;
        let cxx = rho.cxx * w11 + rho.cxy * w12;
        let cyy = rho.cxy * w12 + rho.cyy * w22;
        let cxy = rho.cxx * w12 + rho.cxy * w22;
        let c0 = rho.c0 + s * (rho.bx * bx + rho.by * by);

        // Prefactor 1/sqrt(det M): arguments stay in the right half plane
        // for every s >= 0, so the principal branch is continuous from 1.
        let pref = 1.0 / (det_m.sqrt() * dz.sqrt());

        Self {
            gauss: CGauss {
                cxx,
                cyy,
                czz,
                cxy,
                bx,
                by,
                c0,
            },
            pref,
        }
    }

    /// Polynomial factor of the second derivative along the polarization
    /// axis: `d^2/du^2 rho_s = poly(r) * rho_s`.
    pub fn second_derivative_poly(&self, axis: usize) -> Poly {
        let g = &self.gauss;
        let mut p = Poly::new();
        match axis {
            2 => {
                // b_z = 0: (4 czz^2 z^2 - 2 czz).
                p.push(4.0 * g.czz * g.czz, (0, 0, 2));
                p.push(-2.0 * g.czz, (0, 0, 0));
            }
            0 => {
                // grad_x = -2(cxx x + cxy y) + bx; poly = grad_x^2 - 2 cxx.
                let (a, b, c) = (-2.0 * g.cxx, -2.0 * g.cxy, g.bx);
                p.push(a * a, (2, 0, 0));
                p.push(b * b, (0, 2, 0));
                p.push(2.0 * a * b, (1, 1, 0));
                p.push(2.0 * a * c, (1, 0, 0));
                p.push(2.0 * b * c, (0, 1, 0));
                p.push(c * c - 2.0 * g.cxx, (0, 0, 0));
            }
            _ => unreachable!("polarization axis is x or z"),
        }
        p
    }
}
