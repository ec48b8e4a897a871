//! Hamiltonian matrix elements between packet pairs and the quantities the
//! variational equations of motion are assembled from.
//!
//! Kinetic, trap and contact elements are closed-form Gaussian integrals.
//! The dipolar elements use the Schwinger representation `1/k^2 =
//! intgrl_0^inf exp(-s k^2) ds` of the anisotropic kernel, which turns the
//! convolution into a one-dimensional integral of heat-kernel-broadened
//! Gaussians; the substitution `s = (u/(1-u))^2` maps it onto the unit
//! interval with an analytic integrand that is evaluated by adaptive
//! Gauss-Kronrod quadrature to relative tolerance 1e-9.

use nalgebra::DMatrix;
use num_complex::Complex64;
use tgpe_core::{Params, Polarization, Trap};

use crate::error::VariationalError;
use crate::gauss::{Broadened, CGauss, MomentTable, Poly, C_ZERO};
use crate::packet::GaussianPacket;
use crate::quad::adaptive_gk;
use crate::state::{VariationalState, NPACKETS, NPARAMS, PACKET_PARAMS};

pub type PairMatrix = [[Complex64; NPACKETS]; NPACKETS];

/// All Hamiltonian matrix elements between packet pairs.
///
/// Every matrix is conjugate-symmetric. The contact and dipolar matrices are
/// the elements of the full (unhalved) mean-field potentials evaluated at
/// the state's own density: `v_sc[a][b] = <g_a| 4 pi na |Psi|^2 |g_b>` and
/// `v_dd[a][b] = <g_a| V_dd[|Psi|^2] |g_b>`.
#[derive(Clone, Debug)]
pub struct HamiltonianElements {
    pub s: PairMatrix,
    pub t: PairMatrix,
    pub v_trap: PairMatrix,
    pub v_sc: PairMatrix,
    pub v_dd: PairMatrix,
}

impl HamiltonianElements {
    fn sum(m: &PairMatrix) -> f64 {
        let mut acc = C_ZERO;
        for row in m {
            for v in row {
                acc += v;
            }
        }
        acc.re
    }

    /// `<Psi|Psi>`.
    pub fn norm_squared(&self) -> f64 {
        Self::sum(&self.s)
    }

    /// Expectation values (kinetic, trap, contact, dipolar) of the state the
    /// elements were assembled from.
    pub fn expectations(&self) -> (f64, f64, f64, f64) {
        (
            Self::sum(&self.t),
            Self::sum(&self.v_trap),
            Self::sum(&self.v_sc),
            Self::sum(&self.v_dd),
        )
    }
}

/// Relative tolerance of the dipolar quadrature.
const DD_RTOL: f64 = 1e-10;
const DD_MAX_INTERVALS: usize = 256;

/// Derivative polynomials `v_alpha = P_alpha g` for one packet, in the
/// canonical parameter order of [`VariationalState::flatten`].
fn derivative_polys(p: &GaussianPacket) -> [Poly; PACKET_PARAMS] {
    let i = Complex64::i();
    let one = Complex64::new(1.0, 0.0);
    let (qx, qy) = (p.q[0], p.q[1]);

    let mut ux2 = Poly::new();
    ux2.push(one, (2, 0, 0));
    ux2.push((-2.0 * qx).into(), (1, 0, 0));
    ux2.push((qx * qx).into(), (0, 0, 0));

    let mut uy2 = Poly::new();
    uy2.push(one, (0, 2, 0));
    uy2.push((-2.0 * qy).into(), (0, 1, 0));
    uy2.push((qy * qy).into(), (0, 0, 0));

    let mut z2 = Poly::new();
    z2.push(one, (0, 0, 2));

    let mut uxuy = Poly::new();
    uxuy.push(one, (1, 1, 0));
    uxuy.push((-qy).into(), (1, 0, 0));
    uxuy.push((-qx).into(), (0, 1, 0));
    uxuy.push((qx * qy).into(), (0, 0, 0));

    let mut ux = Poly::new();
    ux.push(one, (1, 0, 0));
    ux.push((-qx).into(), (0, 0, 0));

    let mut uy = Poly::new();
    uy.push(one, (0, 1, 0));
    uy.push((-qy).into(), (0, 0, 0));

    let mut id = Poly::new();
    id.push(one, (0, 0, 0));

    let scale = |base: &Poly, c: Complex64| {
        let mut p = Poly::new();
        p.add_scaled(base, c);
        p
    };

    // d/dq_x: 2 A_xx u_x + 2 A_xy u_y - i p_x, and the y analogue.
    let mut dqx = scale(&ux, 2.0 * p.a_xx);
    dqx.add_scaled(&uy, 2.0 * p.a_xy);
    dqx.add_scaled(&id, -i * p.p[0]);
    let mut dqy = scale(&ux, 2.0 * p.a_xy);
    dqy.add_scaled(&uy, 2.0 * p.a_yy);
    dqy.add_scaled(&id, -i * p.p[1]);

    [
        scale(&ux2, -one),
        scale(&ux2, -i),
        scale(&uy2, -one),
        scale(&uy2, -i),
        scale(&z2, -one),
        scale(&z2, -i),
        scale(&uxuy, (-2.0).into()),
        scale(&uxuy, -2.0 * i),
        dqx,
        dqy,
        scale(&ux, i),
        scale(&uy, i),
        scale(&id, -one),
        scale(&id, -i),
    ]
}

/// Polynomial factor of `-1/2 Laplacian g = tpoly * g` for a ket packet.
fn kinetic_poly(p: &GaussianPacket) -> Poly {
    let i = Complex64::i();
    // Gradient components are linear: w_d = alpha_d x + beta_d y + const_d
    // (w_z = -2 a_zz z), with Laplacian g = (sum w_d^2 - 2 tr A) g.
    let rows = [
        (
            -2.0 * p.a_xx,
            -2.0 * p.a_xy,
            2.0 * (p.a_xx * p.q[0] + p.a_xy * p.q[1]) + i * p.p[0],
        ),
        (
            -2.0 * p.a_xy,
            -2.0 * p.a_yy,
            2.0 * (p.a_xy * p.q[0] + p.a_yy * p.q[1]) + i * p.p[1],
        ),
    ];
    let mut t = Poly::new();
    for (a, b, c) in rows {
        t.push(-0.5 * a * a, (2, 0, 0));
        t.push(-0.5 * b * b, (0, 2, 0));
        t.push(-a * b, (1, 1, 0));
        t.push(-a * c, (1, 0, 0));
        t.push(-b * c, (0, 1, 0));
        t.push(-0.5 * c * c, (0, 0, 0));
    }
    // z row: w_z = -2 a_zz z.
    t.push(-2.0 * p.a_zz * p.a_zz, (0, 0, 2));
    // +tr A from -1/2 (.. - 2 tr A).
    t.push(p.a_xx + p.a_yy + p.a_zz, (0, 0, 0));
    t
}

/// Gaussian factor of one trap well centered at `c` on the x axis.
fn well_gauss(c: f64, trap: &Trap) -> CGauss {
    let cxx = 2.0 / (trap.wx * trap.wx);
    CGauss {
        cxx: cxx.into(),
        cyy: (2.0 / (trap.wy * trap.wy)).into(),
        czz: (2.0 / (trap.wz * trap.wz)).into(),
        cxy: C_ZERO,
        bx: (2.0 * cxx * c).into(),
        by: C_ZERO,
        c0: (-cxx * c * c).into(),
    }
}

/// Everything the equations of motion need from one sweep over the packet
/// pairs: the Hamiltonian elements plus, optionally, the tangent-space
/// overlaps (`K`) and the projections `<v_alpha|H Psi>`, `<v_alpha|Psi>`.
pub(crate) struct Assembly {
    pub elements: HamiltonianElements,
    pub k: Option<DMatrix<f64>>,
    /// `<v_alpha|H Psi>` (full nonlinear Hamiltonian).
    pub hv: [Complex64; NPARAMS],
    /// `<v_alpha|Psi>`.
    pub sv: [Complex64; NPARAMS],
}

pub(crate) fn assemble(
    state: &VariationalState,
    params: &Params,
    with_tdvp: bool,
) -> Result<Assembly, VariationalError> {
    state.validate()?;
    let g = &state.packets;
    let trap = &params.trap;
    let axis = match params.polarization {
        Polarization::Z => 2usize,
        Polarization::X => 0usize,
    };

    // Pair Gaussians and their moment tables.
    let mut pairs = [[CGauss::from_pair(&g[0], &g[0]); NPACKETS]; NPACKETS];
    for a in 0..NPACKETS {
        for b in 0..NPACKETS {
            let pg = CGauss::from_pair(&g[a], &g[b]);
            if !pg.is_integrable() {
                return Err(VariationalError::NonNormalizablePair { i: a, j: b });
            }
            pairs[a][b] = pg;
        }
    }
    let tables: Vec<MomentTable> = (0..NPACKETS * NPACKETS)
        .map(|ab| MomentTable::build(&pairs[ab / NPACKETS][ab % NPACKETS]))
        .collect();
    let tab = |a: usize, b: usize| &tables[a * NPACKETS + b];

    let wells: Vec<CGauss> = trap.centers.iter().map(|&c| well_gauss(c, trap)).collect();
    let dpolys: [[Poly; PACKET_PARAMS]; NPACKETS] =
        [derivative_polys(&g[0]), derivative_polys(&g[1]), derivative_polys(&g[2])];
    let tpolys: [Poly; NPACKETS] = [kinetic_poly(&g[0]), kinetic_poly(&g[1]), kinetic_poly(&g[2])];
    let one = Poly::one();

    let zero_mat: PairMatrix = [[C_ZERO; NPACKETS]; NPACKETS];
    let (mut s_m, mut t_m, mut vtw_m, mut vsc_m, mut vdd_m) =
        (zero_mat, zero_mat, zero_mat, zero_mat, zero_mat);
    let mut hv = [C_ZERO; NPARAMS];
    let mut sv = [C_ZERO; NPARAMS];

    let four_pi_na = 4.0 * std::f64::consts::PI * params.na;
    // Contact-like delta part of the dipolar kernel: 3 nadd * (-4 pi / 3).
    let dd_delta = -4.0 * std::f64::consts::PI * params.nadd;

    for a in 0..NPACKETS {
        for b in 0..NPACKETS {
            let t_ab = tab(a, b);
            let i0 = t_ab.i0;
            s_m[a][b] = i0;
            t_m[a][b] = i0 * tpolys[b].expect(t_ab);

            let mut vtw = C_ZERO;
            for w in &wells {
                let pt = MomentTable::build(&pairs[a][b].product(w));
                vtw -= trap.v0 * pt.i0;
                if with_tdvp {
                    for (f, pf) in dpolys[a].iter().enumerate() {
                        hv[a * PACKET_PARAMS + f] -=
                            trap.v0 * pt.i0 * Poly::expect_pair(pf, &one, &pt);
                    }
                }
            }
            vtw_m[a][b] = vtw;

            let mut vsc = C_ZERO;
            let mut vdd_local = C_ZERO;
            for c in 0..NPACKETS {
                for d in 0..NPACKETS {
                    let pt = MomentTable::build(&pairs[a][b].product(&pairs[c][d]));
                    vsc += four_pi_na * pt.i0;
                    vdd_local += dd_delta * pt.i0;
                    if with_tdvp {
                        for (f, pf) in dpolys[a].iter().enumerate() {
                            let e = pt.i0 * Poly::expect_pair(pf, &one, &pt);
                            hv[a * PACKET_PARAMS + f] += (four_pi_na + dd_delta) * e;
                        }
                    }
                }
            }
            vsc_m[a][b] = vsc;
            vdd_m[a][b] = vdd_local;

            if with_tdvp {
                for (f, pf) in dpolys[a].iter().enumerate() {
                    let idx = a * PACKET_PARAMS + f;
                    sv[idx] += i0 * Poly::expect_pair(pf, &one, t_ab);
                    hv[idx] += i0 * Poly::expect_pair(pf, &tpolys[b], t_ab);
                }
            }
        }
    }

    // Long-range part of the dipolar term: a single adaptive quadrature over
    // the Schwinger parameter shared by all packet pairs. Components per
    // ordered pair (a,b): the bare element and, with TDVP, the fourteen
    // projections onto that pair's bra-derivative polynomials.
    if params.nadd != 0.0 {
        let nc = 1 + if with_tdvp { PACKET_PARAMS } else { 0 };
        let dim = NPACKETS * NPACKETS * nc;
        // Every bra-derivative polynomial lives in this fixed monomial basis,
        // so inside the quadrature the fourteen projections reduce to short
        // dot products against one shared moment vector per pair.
        const PROJ_BASIS: [(u8, u8, u8); 7] = [
            (0, 0, 0),
            (1, 0, 0),
            (0, 1, 0),
            (0, 0, 2),
            (2, 0, 0),
            (0, 2, 0),
            (1, 1, 0),
        ];
        let bra_proj: [Vec<Vec<(usize, Complex64)>>; NPACKETS] = std::array::from_fn(|a| {
            dpolys[a]
                .iter()
                .map(|p| {
                    (0..p.n)
                        .map(|t| {
                            let m = PROJ_BASIS
                                .iter()
                                .position(|&b| b == p.mono[t])
                                .expect("bra polynomial outside projection basis");
                            (m, p.coef[t].conj())
                        })
                        .collect()
                })
                .collect()
        });
        // One term of the sum: bra-ket pair (a,b) against the broadened
        // density built from pair (c,d). `conj_twin` adds the symmetry
        // partner (b,a) against (d,c), whose value is the exact conjugate,
        // so only pairings with (c < d) or (c == d, a <= b) are evaluated.
        let term = |a: usize,
                    b: usize,
                    scale: Complex64,
                    dpol: &Poly,
                    ct: &MomentTable,
                    conj_twin: bool,
                    out: &mut [Complex64]| {
            let base = (a * NPACKETS + b) * nc;
            let twin = (b * NPACKETS + a) * nc;
            if with_tdvp {
                // Moments of each basis monomial against the kernel
                // polynomial; entry 0 is the bare element.
                let mut pvec = [C_ZERO; PROJ_BASIS.len()];
                for (m, &(mi, mj, mk)) in PROJ_BASIS.iter().enumerate() {
                    let mut acc = C_ZERO;
                    for t in 0..dpol.n {
                        let (di, dj, dk) = dpol.mono[t];
                        acc += dpol.coef[t] * ct.raw(mi + di, mj + dj, mk + dk);
                    }
                    pvec[m] = acc;
                }
                out[base] += scale * pvec[0];
                for f in 0..PACKET_PARAMS {
                    let mut acc = C_ZERO;
                    for &(m, cc) in &bra_proj[a][f] {
                        acc += cc * pvec[m];
                    }
                    out[base + 1 + f] += scale * acc;
                }
                if conj_twin {
                    out[twin] += (scale * pvec[0]).conj();
                    for f in 0..PACKET_PARAMS {
                        let mut acc = C_ZERO;
                        for &(m, cc) in &bra_proj[b][f] {
                            acc += cc.conj() * pvec[m];
                        }
                        out[twin + 1 + f] += (scale * acc).conj();
                    }
                }
            } else {
                let v = scale * dpol.expect(ct);
                out[base] += v;
                if conj_twin {
                    out[twin] += v.conj();
                }
            }
        };
        let integrand = |u: f64, out: &mut [Complex64]| {
            let w = u / (1.0 - u);
            let s = w * w;
            let jac = 2.0 * u / ((1.0 - u) * (1.0 - u) * (1.0 - u));
            for c in 0..NPACKETS {
                for d in c..NPACKETS {
                    let br = Broadened::new(&pairs[c][d], s);
                    let dpol = br.second_derivative_poly(axis);
                    let wgt = br.pref * jac;
                    for a in 0..NPACKETS {
                        let b0 = if c == d { a } else { 0 };
                        for b in b0..NPACKETS {
                            let comb = pairs[a][b].product(&br.gauss);
                            let ct = MomentTable::build(&comb);
                            let scale = wgt * ct.i0;
                            // (a,a) against (c,c) is its own symmetry partner.
                            let twin = !(c == d && a == b);
                            term(a, b, scale, &dpol, &ct, twin, out);
                        }
                    }
                }
            }
        };
        let j = adaptive_gk(integrand, dim, 0.0, 1.0, DD_RTOL, DD_MAX_INTERVALS).map_err(
            |(comp, err)| {
                let pair = comp / nc;
                VariationalError::QuadratureFailure {
                    i: pair / NPACKETS,
                    j: pair % NPACKETS,
                    err,
                }
            },
        )?;
        // 3 nadd * (-4 pi) * integral.
        let pref = -12.0 * std::f64::consts::PI * params.nadd;
        for a in 0..NPACKETS {
            for b in 0..NPACKETS {
                let base = (a * NPACKETS + b) * nc;
                vdd_m[a][b] += pref * j[base];
                if with_tdvp {
                    for f in 0..PACKET_PARAMS {
                        hv[a * PACKET_PARAMS + f] += pref * j[base + 1 + f];
                    }
                }
            }
        }
    }

    // Tangent overlap matrix K_{alpha beta} = Re <v_alpha|v_beta>.
    let k = if with_tdvp {
        let mut k = DMatrix::<f64>::zeros(NPARAMS, NPARAMS);
        for a in 0..NPACKETS {
            for b in 0..NPACKETS {
                let t_ab = tab(a, b);
                for f in 0..PACKET_PARAMS {
                    for h in 0..PACKET_PARAMS {
                        let v = t_ab.i0
                            * Poly::expect_pair(&dpolys[a][f], &dpolys[b][h], t_ab);
                        k[(a * PACKET_PARAMS + f, b * PACKET_PARAMS + h)] = v.re;
                    }
                }
            }
        }
        Some(k)
    } else {
        None
    };

    Ok(Assembly {
        elements: HamiltonianElements {
            s: s_m,
            t: t_m,
            v_trap: vtw_m,
            v_sc: vsc_m,
            v_dd: vdd_m,
        },
        k,
        hv,
        sv,
    })
}

/// All Hamiltonian matrix elements between packet pairs.
pub fn hamiltonian_elements(
    state: &VariationalState,
    params: &Params,
) -> Result<HamiltonianElements, VariationalError> {
    Ok(assemble(state, params, false)?.elements)
}

/// Scalar observables of a variational state.
#[derive(Clone, Copy, Debug)]
pub struct VariationalObservables {
    pub norm_squared: f64,
    /// Mean-field energy (interaction terms counted with 1/2).
    pub e_mf: f64,
    /// Chemical potential (interaction terms counted in full).
    pub mu: f64,
    pub kinetic: f64,
    pub trap: f64,
    pub contact: f64,
    pub dipolar: f64,
    /// Norm fractions in x < -1/2, |x| <= 1/2, x > 1/2.
    pub populations: [f64; 3],
    /// Individual packet norms `I^k = <g_k|g_k>`.
    pub packet_norms: [f64; 3],
}

pub fn observables_variational(
    state: &VariationalState,
    params: &Params,
) -> Result<VariationalObservables, VariationalError> {
    let el = hamiltonian_elements(state, params)?;
    observables_from_elements(state, &el)
}

pub(crate) fn observables_from_elements(
    state: &VariationalState,
    el: &HamiltonianElements,
) -> Result<VariationalObservables, VariationalError> {
    let norm = el.norm_squared();
    let (t, vtw, vsc, vdd) = el.expectations();
    let populations = populations(state, norm)?;
    Ok(VariationalObservables {
        norm_squared: norm,
        e_mf: t + vtw + 0.5 * vsc + 0.5 * vdd,
        mu: t + vtw + vsc + vdd,
        kinetic: t,
        trap: vtw,
        contact: vsc,
        dipolar: vdd,
        populations,
        packet_norms: [el.s[0][0].re, el.s[1][1].re, el.s[2][2].re],
    })
}

/// Norm fractions left / center / right of the well boundaries x = +-1/2,
/// from the closed-form x marginal of `|Psi|^2` integrated numerically.
fn populations(state: &VariationalState, norm: f64) -> Result<[f64; 3], VariationalError> {
    struct Term {
        /// Log of the y/z-reduced amplitude; kept in exponent form so that
        /// far-separated pairs cannot produce inf * 0 at evaluation time.
        ln_amp: Complex64,
        a: Complex64,
        b: Complex64,
    }
    let pi = std::f64::consts::PI;
    let mut terms = Vec::with_capacity(NPACKETS * NPACKETS);
    let mut xmax: f64 = 2.0;
    for (i, ga) in state.packets.iter().enumerate() {
        for (j, gb) in state.packets.iter().enumerate() {
            let g = CGauss::from_pair(ga, gb);
            if !g.is_integrable() {
                return Err(VariationalError::NonNormalizablePair { i, j });
            }
            // Integrate out z and y; the remaining x Gaussian is
            // exp(ln_amp - a x^2 + b x). The sqrt arguments lie in the right
            // half plane, so the principal logarithms are branch-safe.
            let a = g.cxx - g.cxy * g.cxy / g.cyy;
            let b = g.bx - g.by * g.cxy / g.cyy;
            let ln_amp = 0.5 * ((pi / g.czz).ln() + (pi / g.cyy).ln())
                + g.c0
                + g.by * g.by / (4.0 * g.cyy);
            let center = b.re / (2.0 * a.re);
            xmax = xmax.max(center.abs() + 16.0 / (2.0 * a.re).sqrt());
            terms.push(Term { ln_amp, a, b });
        }
    }

    let marginal = |x: f64, out: &mut [Complex64]| {
        let mut m = C_ZERO;
        for t in &terms {
            m += (t.ln_amp - t.a * (x * x) + t.b * x).exp();
        }
        out[0] = m;
    };

    let mut pops = [0.0; 3];
    for (r, (lo, hi)) in [(-xmax, -0.5), (-0.5, 0.5), (0.5, xmax)].iter().enumerate() {
        let v = adaptive_gk(marginal, 1, *lo, *hi, 1e-9, 128)
            .map_err(|(_, err)| VariationalError::QuadratureFailure { i: 0, j: 0, err })?;
        pops[r] = v[0].re / norm;
    }
    Ok(pops)
}
