//! A single Gaussian wave packet in the frozen-z gauge.

use num_complex::Complex64;

use crate::error::VariationalError;

/// Gaussian wave packet
/// `g(r) = exp(-((r-q)^T A (r-q) - i p.(r-q) + gamma))`
/// with complex symmetric width matrix `A`, real center `q`, real momentum
/// `p` and complex amplitude/phase parameter `gamma`.
///
/// The frozen-z gauge sets `A_xz = A_yz = 0` and `q_z = p_z = 0` at all
/// times, so only the four independent width entries `A_xx, A_yy, A_zz,
/// A_xy` and the in-plane center/momentum components are stored. `A_zz`
/// still evolves (breathing along z is allowed); translation and rotation
/// out of the plane are not.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianPacket {
    pub a_xx: Complex64,
    pub a_yy: Complex64,
    pub a_zz: Complex64,
    pub a_xy: Complex64,
    /// Center (x, y); q_z = 0.
    pub q: [f64; 2],
    /// Momentum (p_x, p_y); p_z = 0.
    pub p: [f64; 2],
    pub gamma: Complex64,
}

impl GaussianPacket {
    /// Real, centered packet with diagonal widths; a convenient seed shape.
    pub fn real_diagonal(axx: f64, ayy: f64, azz: f64, q: [f64; 2], gamma_re: f64) -> Self {
        Self {
            a_xx: Complex64::new(axx, 0.0),
            a_yy: Complex64::new(ayy, 0.0),
            a_zz: Complex64::new(azz, 0.0),
            a_xy: Complex64::new(0.0, 0.0),
            q,
            p: [0.0, 0.0],
            gamma: Complex64::new(gamma_re, 0.0),
        }
    }

    /// Checks normalizability: Re A must be positive definite.
    pub fn validate(&self) -> Result<(), VariationalError> {
        let entries = [self.a_xx, self.a_yy, self.a_zz, self.a_xy];
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
            || self.q.iter().chain(&self.p).any(|v| !v.is_finite())
            || !self.gamma.re.is_finite()
            || !self.gamma.im.is_finite()
        {
            return Err(VariationalError::InvalidPacket(
                "non-finite parameter".into(),
            ));
        }
        let rxx = self.a_xx.re;
        let ryy = self.a_yy.re;
        let rzz = self.a_zz.re;
        let rxy = self.a_xy.re;
        if rxx <= 0.0 || rzz <= 0.0 || rxx * ryy - rxy * rxy <= 0.0 {
            return Err(VariationalError::InvalidPacket(
                "Re A not positive definite".into(),
            ));
        }
        Ok(())
    }

    /// Wave-function amplitude at a point.
    pub fn eval(&self, r: [f64; 3]) -> Complex64 {
        let ux = r[0] - self.q[0];
        let uy = r[1] - self.q[1];
        let z = r[2];
        let quad = self.a_xx * (ux * ux)
            + self.a_yy * (uy * uy)
            + self.a_zz * (z * z)
            + self.a_xy * (2.0 * ux * uy);
        let lin = Complex64::new(0.0, self.p[0] * ux + self.p[1] * uy);
        (-quad + lin - self.gamma).exp()
    }

    /// Packet mirrored through the y-z plane (x -> -x): flips the center and
    /// momentum x-components and the sign of A_xy.
    pub fn mirror_x(&self) -> Self {
        Self {
            a_xy: -self.a_xy,
            q: [-self.q[0], self.q[1]],
            p: [-self.p[0], self.p[1]],
            ..*self
        }
    }
}
