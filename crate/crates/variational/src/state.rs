//! The coupled three-packet variational state and its canonical real
//! parameterization.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::VariationalError;
use crate::gauss::CGauss;
use crate::packet::GaussianPacket;

/// Number of Gaussian packets in the ansatz.
pub const NPACKETS: usize = 3;
/// Real parameters per packet.
pub const PACKET_PARAMS: usize = 14;
/// Total real parameters of a state.
pub const NPARAMS: usize = NPACKETS * PACKET_PARAMS;

/// Superposition of three frozen-z Gaussian packets,
/// `Psi(r) = sum_k g_k(r)` (amplitudes live in the complex phases).
#[derive(Clone, Debug, PartialEq)]
pub struct VariationalState {
    pub packets: [GaussianPacket; NPACKETS],
}

/// Closed-form overlap `<g_a|g_b>` of two packets.
///
/// Conjugate-symmetric under argument swap. Fails if the combined Gaussian
/// is non-normalizable (real part of the pair width matrix not positive
/// definite).
pub fn pair_overlap(
    a: &GaussianPacket,
    b: &GaussianPacket,
) -> Result<Complex64, VariationalError> {
    let pair = CGauss::from_pair(a, b);
    if !pair.is_integrable() {
        return Err(VariationalError::NonNormalizablePair { i: 0, j: 0 });
    }
    Ok(pair.integral())
}

impl VariationalState {
    pub fn new(packets: [GaussianPacket; NPACKETS]) -> Self {
        Self { packets }
    }

    /// Three identical real diagonal packets centered on the wells, with a
    /// small default width matrix. Not yet normalized.
    pub fn symmetric_seed(axx: f64, ayy: f64, azz: f64) -> Self {
        let mk = |qx: f64| GaussianPacket::real_diagonal(axx, ayy, azz, [qx, 0.0], 0.0);
        Self::new([mk(-1.0), mk(0.0), mk(1.0)])
    }

    pub fn validate(&self) -> Result<(), VariationalError> {
        for p in &self.packets {
            p.validate()?;
        }
        Ok(())
    }

    /// Canonical flattening: packets in order, each contributing
    /// `[Re Axx, Im Axx, Re Ayy, Im Ayy, Re Azz, Im Azz, Re Axy, Im Axy,
    ///   qx, qy, px, py, Re gamma, Im gamma]`.
    pub fn flatten(&self) -> [f64; NPARAMS] {
        let mut out = [0.0; NPARAMS];
        for (k, p) in self.packets.iter().enumerate() {
            let o = k * PACKET_PARAMS;
            out[o] = p.a_xx.re;
            out[o + 1] = p.a_xx.im;
            out[o + 2] = p.a_yy.re;
            out[o + 3] = p.a_yy.im;
            out[o + 4] = p.a_zz.re;
            out[o + 5] = p.a_zz.im;
            out[o + 6] = p.a_xy.re;
            out[o + 7] = p.a_xy.im;
            out[o + 8] = p.q[0];
            out[o + 9] = p.q[1];
            out[o + 10] = p.p[0];
            out[o + 11] = p.p[1];
            out[o + 12] = p.gamma.re;
            out[o + 13] = p.gamma.im;
        }
        out
    }

    /// Inverse of [`flatten`](Self::flatten); exact (bitwise) round trip.
    pub fn unflatten(v: &[f64; NPARAMS]) -> Self {
        let mut packets = [GaussianPacket::real_diagonal(1.0, 1.0, 1.0, [0.0, 0.0], 0.0); NPACKETS];
        for (k, p) in packets.iter_mut().enumerate() {
            let o = k * PACKET_PARAMS;
            p.a_xx = Complex64::new(v[o], v[o + 1]);
            p.a_yy = Complex64::new(v[o + 2], v[o + 3]);
            p.a_zz = Complex64::new(v[o + 4], v[o + 5]);
            p.a_xy = Complex64::new(v[o + 6], v[o + 7]);
            p.q = [v[o + 8], v[o + 9]];
            p.p = [v[o + 10], v[o + 11]];
            p.gamma = Complex64::new(v[o + 12], v[o + 13]);
        }
        Self { packets }
    }

    /// `<Psi|Psi>` from pair overlaps.
    pub fn norm_squared(&self) -> Result<f64, VariationalError> {
        let mut n = Complex64::new(0.0, 0.0);
        for (i, a) in self.packets.iter().enumerate() {
            for (j, b) in self.packets.iter().enumerate() {
                n += pair_overlap(a, b).map_err(|_| VariationalError::NonNormalizablePair { i, j })?;
            }
        }
        Ok(n.re)
    }

    /// Rescale to unit norm by shifting every packet's `Re gamma` by
    /// `ln(norm)/2` (a pure amplitude change).
    pub fn normalize(&mut self) -> Result<(), VariationalError> {
        let n2 = self.norm_squared()?;
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(VariationalError::InvalidPacket(format!(
                "cannot normalize state with squared norm {n2}"
            )));
        }
        let shift = 0.5 * n2.ln();
        for p in &mut self.packets {
            p.gamma.re += shift;
        }
        Ok(())
    }

    /// Pointwise wavefunction value.
    pub fn eval_wavefunction(&self, r: [f64; 3]) -> Complex64 {
        self.packets.iter().map(|p| p.eval(r)).sum()
    }

    /// Mirror image under x -> -x (well 1 and 3 swap roles).
    pub fn mirror_x(&self) -> Self {
        Self::new([
            self.packets[2].mirror_x(),
            self.packets[1].mirror_x(),
            self.packets[0].mirror_x(),
        ])
    }

    /// Root-mean-square parameter distance to the x-mirrored image; zero for
    /// symmetric states.
    pub fn asymmetry(&self) -> f64 {
        let a = self.flatten();
        let b = self.mirror_x().flatten();
        let mut s = 0.0;
        for i in 0..NPARAMS {
            let d = a[i] - b[i];
            s += d * d;
        }
        (s / NPARAMS as f64).sqrt()
    }

    /// Plain-text serialization: one `key = value` line per parameter with
    /// 17 significant digits, grouped per packet. Round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("format = gaussian-packets-v1\n");
        let _ = writeln!(s, "packets = {NPACKETS}");
        for (k, p) in self.packets.iter().enumerate() {
            let _ = writeln!(s, "[packet {k}]");
            for (name, v) in [
                ("a_xx_re", p.a_xx.re),
                ("a_xx_im", p.a_xx.im),
                ("a_yy_re", p.a_yy.re),
                ("a_yy_im", p.a_yy.im),
                ("a_zz_re", p.a_zz.re),
                ("a_zz_im", p.a_zz.im),
                ("a_xy_re", p.a_xy.re),
                ("a_xy_im", p.a_xy.im),
                ("q_x", p.q[0]),
                ("q_y", p.q[1]),
                ("p_x", p.p[0]),
                ("p_y", p.p[1]),
                ("gamma_re", p.gamma.re),
                ("gamma_im", p.gamma.im),
            ] {
                let _ = writeln!(s, "{name} = {v:.16e}");
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, VariationalError> {
        let bad = |msg: String| VariationalError::Format(msg);
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());

        let expect_kv = |line: Option<(usize, &str)>, key: &str| -> Result<String, VariationalError> {
            let (n, l) = line.ok_or_else(|| bad(format!("unexpected end of input, expected `{key}`")))?;
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected `{key} = ...`", n + 1)))?;
            if k.trim() != key {
                return Err(bad(format!("line {}: expected key `{key}`, found `{}`", n + 1, k.trim())));
            }
            Ok(v.trim().to_string())
        };

        let fmt = expect_kv(lines.next(), "format")?;
        if fmt != "gaussian-packets-v1" {
            return Err(bad(format!("unsupported format `{fmt}`")));
        }
        let np: usize = expect_kv(lines.next(), "packets")?
            .parse()
            .map_err(|e| bad(format!("invalid packet count: {e}")))?;
        if np != NPACKETS {
            return Err(bad(format!("expected {NPACKETS} packets, found {np}")));
        }

        let keys = [
            "a_xx_re", "a_xx_im", "a_yy_re", "a_yy_im", "a_zz_re", "a_zz_im", "a_xy_re",
            "a_xy_im", "q_x", "q_y", "p_x", "p_y", "gamma_re", "gamma_im",
        ];
        let mut flat = [0.0; NPARAMS];
        for k in 0..NPACKETS {
            let (n, header) = lines
                .next()
                .ok_or_else(|| bad(format!("missing `[packet {k}]` header")))?;
            if header.trim() != format!("[packet {k}]") {
                return Err(bad(format!("line {}: expected `[packet {k}]`", n + 1)));
            }
            for (f, key) in keys.iter().enumerate() {
                let raw = expect_kv(lines.next(), key)?;
                flat[k * PACKET_PARAMS + f] = raw
                    .parse::<f64>()
                    .map_err(|e| bad(format!("packet {k} field {key}: {e}")))?;
            }
        }
        if let Some((n, l)) = lines.next() {
            return Err(bad(format!("line {}: trailing content `{}`", n + 1, l.trim())));
        }
        Ok(Self::unflatten(&flat))
    }

    /// Write the text form atomically (temp file plus rename).
    pub fn save(&self, path: &Path) -> Result<(), VariationalError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_text())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, VariationalError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}
