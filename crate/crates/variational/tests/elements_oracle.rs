//! Oracle tests for the Hamiltonian matrix elements.
//!
//! Overlap, kinetic, trap and contact elements are checked against dense
//! real-space midpoint sums (super-exponentially convergent for Gaussian
//! integrands). The dipolar elements are checked against an independent
//! spherical k-space quadrature that combines the verified pointwise kernel
//! with analytic Gaussian Fourier transforms computed by a different
//! algorithm (determinant-based, not sequential reduction).

use nalgebra::Matrix2;
use num_complex::Complex64;
use tgpe_variational::{
    hamiltonian_elements, GaussianPacket, PairMatrix, VariationalState,
};
use tgpe_core::{dipole_kernel_k, eval_trap_potential, Params, Polarization};

const NP: usize = 3;

// ---------------------------------------------------------------------------
// Deterministic pseudo-random state generation (splitmix64).

struct Rng(u64);

impl Rng {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [lo, hi).
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}

fn random_state(rng: &mut Rng) -> VariationalState {
    let mut packets = Vec::with_capacity(NP);
    for k in 0..NP {
        let axx = rng.uniform(0.5, 2.5);
        let ayy = rng.uniform(0.5, 2.5);
        let azz = rng.uniform(0.5, 2.5);
        // Keep Re A positive definite with margin.
        let axy = rng.uniform(-0.3, 0.3) * (axx * ayy).sqrt() * 0.5;
        let mut p = GaussianPacket::real_diagonal(
            axx,
            ayy,
            azz,
            [k as f64 - 1.0 + rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)],
            rng.uniform(-0.3, 0.3),
        );
        p.a_xy = Complex64::new(axy, rng.uniform(-0.2, 0.2));
        p.a_xx += Complex64::new(0.0, rng.uniform(-0.4, 0.4));
        p.a_yy += Complex64::new(0.0, rng.uniform(-0.4, 0.4));
        p.a_zz += Complex64::new(0.0, rng.uniform(-0.4, 0.4));
        p.p = [rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)];
        p.gamma += Complex64::new(0.0, rng.uniform(-3.0, 3.0));
        packets.push(p);
    }
    VariationalState::new([packets[0], packets[1], packets[2]])
}

// ---------------------------------------------------------------------------
// Real-space midpoint oracle for S, T, Vtrap, Vsc.

struct GridOracle {
    s: PairMatrix,
    t: PairMatrix,
    v_trap: PairMatrix,
    v_sc: PairMatrix,
}

/// Gradient of one packet at a point, from the explicit formula
/// `grad g = (-2 A (r - q) + i p) g`.
fn grad(p: &GaussianPacket, r: [f64; 3], g: Complex64) -> [Complex64; 3] {
    let ux = r[0] - p.q[0];
    let uy = r[1] - p.q[1];
    let z = r[2];
    let i = Complex64::i();
    [
        (-2.0 * (p.a_xx * ux + p.a_xy * uy) + i * p.p[0]) * g,
        (-2.0 * (p.a_xy * ux + p.a_yy * uy) + i * p.p[1]) * g,
        -2.0 * p.a_zz * z * g,
    ]
}

fn grid_oracle(state: &VariationalState, params: &Params, n: usize) -> GridOracle {
    // Box large enough for every packet: center extent + 7 sigma. Tighter
    // boxes keep the midpoint step small enough to resolve the narrow trap
    // wells without inflating the node count.
    let mut l = [0.0f64; 3];
    for p in &state.packets {
        let widths = [p.a_xx.re, p.a_yy.re, p.a_zz.re];
        let centers = [p.q[0].abs(), p.q[1].abs(), 0.0];
        for d in 0..3 {
            l[d] = l[d].max(centers[d] + 7.0 / (2.0 * widths[d]).sqrt());
        }
    }
    let h = [2.0 * l[0] / n as f64, 2.0 * l[1] / n as f64, 2.0 * l[2] / n as f64];
    let dv = h[0] * h[1] * h[2];

    let zero: PairMatrix = [[Complex64::new(0.0, 0.0); NP]; NP];
    let (mut s, mut t, mut vtw, mut vsc) = (zero, zero, zero, zero);
    let four_pi_na = 4.0 * std::f64::consts::PI * params.na;

    for ix in 0..n {
        let x = -l[0] + (ix as f64 + 0.5) * h[0];
        for iy in 0..n {
            let y = -l[1] + (iy as f64 + 0.5) * h[1];
            for iz in 0..n {
                let z = -l[2] + (iz as f64 + 0.5) * h[2];
                let r = [x, y, z];
                let g: Vec<Complex64> = state.packets.iter().map(|p| p.eval(r)).collect();
                let dg: Vec<[Complex64; 3]> = state
                    .packets
                    .iter()
                    .zip(&g)
                    .map(|(p, &gv)| grad(p, r, gv))
                    .collect();
                let vt = eval_trap_potential(r, &params.trap);
                let psi: Complex64 = g.iter().sum();
                let dens = psi.norm_sqr();
                for a in 0..NP {
                    for b in 0..NP {
                        let pair = g[a].conj() * g[b];
                        s[a][b] += pair * dv;
                        vtw[a][b] += vt * pair * dv;
                        vsc[a][b] += four_pi_na * dens * pair * dv;
                        let mut kin = Complex64::new(0.0, 0.0);
                        for d in 0..3 {
                            kin += dg[a][d].conj() * dg[b][d];
                        }
                        t[a][b] += 0.5 * kin * dv;
                    }
                }
            }
        }
    }
    GridOracle {
        s,
        t,
        v_trap: vtw,
        v_sc: vsc,
    }
}

// ---------------------------------------------------------------------------
// Spherical k-space oracle for the dipolar elements.

/// Analytic Fourier transform of `conj(g_a) g_b` at wavevector `k`,
/// determinant-based (independent of the sequential-reduction engine).
struct PairFt {
    c2: Matrix2<Complex64>,
    c2inv: Matrix2<Complex64>,
    sqrt_det_factor: Complex64, // pi / sqrt(det C2)
    czz: Complex64,
    b2: [Complex64; 2],
    c0: Complex64,
}

impl PairFt {
    fn new(a: &GaussianPacket, b: &GaussianPacket) -> Self {
        let i = Complex64::i();
        let (axx, ayy, azz, axy) = (a.a_xx.conj(), a.a_yy.conj(), a.a_zz.conj(), a.a_xy.conj());
        let c2 = Matrix2::new(axx + b.a_xx, axy + b.a_xy, axy + b.a_xy, ayy + b.a_yy);
        let czz = azz + b.a_zz;
        let bx = 2.0 * (axx * a.q[0] + axy * a.q[1])
            + 2.0 * (b.a_xx * b.q[0] + b.a_xy * b.q[1])
            + i * (b.p[0] - a.p[0]);
        let by = 2.0 * (axy * a.q[0] + ayy * a.q[1])
            + 2.0 * (b.a_xy * b.q[0] + b.a_yy * b.q[1])
            + i * (b.p[1] - a.p[1]);
        let qa = axx * a.q[0] * a.q[0] + ayy * a.q[1] * a.q[1] + 2.0 * axy * a.q[0] * a.q[1];
        let qb = b.a_xx * b.q[0] * b.q[0]
            + b.a_yy * b.q[1] * b.q[1]
            + 2.0 * b.a_xy * b.q[0] * b.q[1];
        let c0 = -qa - qb + i * (a.p[0] * a.q[0] + a.p[1] * a.q[1])
            - i * (b.p[0] * b.q[0] + b.p[1] * b.q[1])
            - a.gamma.conj()
            - b.gamma;
        let det = c2.m11 * c2.m22 - c2.m12 * c2.m21;
        let c2inv = Matrix2::new(c2.m22 / det, -c2.m12 / det, -c2.m21 / det, c2.m11 / det);
        Self {
            c2,
            c2inv,
            sqrt_det_factor: std::f64::consts::PI / det.sqrt(),
            czz,
            b2: [bx, by],
            c0,
        }
    }

    /// `intgrl conj(g_a) g_b exp(-i k.r) d^3r`.
    fn eval(&self, k: [f64; 3]) -> Complex64 {
        let i = Complex64::i();
        let pi = std::f64::consts::PI;
        let bx = self.b2[0] - i * k[0];
        let by = self.b2[1] - i * k[1];
        // 2-D part quadratic form 1/4 b^T C^-1 b; all exponent pieces are
        // summed before a single exp to avoid inf * 0 for remote packets.
        let quad = self.c2inv.m11 * bx * bx
            + (self.c2inv.m12 + self.c2inv.m21) * bx * by
            + self.c2inv.m22 * by * by;
        let expo = 0.25 * quad - 0.25 * k[2] * k[2] / self.czz + self.c0;
        self.sqrt_det_factor * (pi / self.czz).sqrt() * expo.exp()
    }

    /// Largest inverse-width scale, used to bound the k integration domain.
    fn kscale(&self) -> f64 {
        self.c2.m11.re.max(self.c2.m22.re).max(self.czz.re)
    }
}

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, 0.0f64);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * t * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            let dp = n as f64 * (t * p0 - p1) / (t * t - 1.0);
            let dt = p0 / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, 0.0f64);
        for j in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * j + 1) as f64 * t * p1 - j as f64 * p2) / (j + 1) as f64;
        }
        let dp = n as f64 * (t * p0 - p1) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// Dipolar elements by spherical k-space quadrature:
/// `Vdd_ab = 3 nadd (2 pi)^-3 intgrl W(k) FT_ab(-k) sum_cd FT_cd(k) d^3k`.
fn kspace_vdd(state: &VariationalState, params: &Params) -> PairMatrix {
    let fts: Vec<PairFt> = (0..NP * NP)
        .map(|ab| PairFt::new(&state.packets[ab / NP], &state.packets[ab % NP]))
        .collect();
    let kmax = 14.0 * fts.iter().map(PairFt::kscale).fold(0.0f64, f64::max).sqrt();

    let (xr, wr) = gauss_legendre(64);
    let (xc, wc) = gauss_legendre(40);
    let nphi = 48;
    let dphi = 2.0 * std::f64::consts::PI / nphi as f64;

    let mut vdd: PairMatrix = [[Complex64::new(0.0, 0.0); NP]; NP];
    for (ri, &xi) in xr.iter().enumerate() {
        let k = 0.5 * kmax * (xi + 1.0);
        let wk = 0.5 * kmax * wr[ri] * k * k;
        for (ci, &cos_t) in xc.iter().enumerate() {
            let sin_t = (1.0 - cos_t * cos_t).sqrt();
            let wkc = wk * wc[ci];
            for f in 0..nphi {
                let phi = (f as f64 + 0.5) * dphi;
                let kv = [k * sin_t * phi.cos(), k * sin_t * phi.sin(), k * cos_t];
                let kernel = dipole_kernel_k(kv, params.polarization);
                let weight = wkc * dphi * kernel;
                if weight == 0.0 {
                    continue;
                }
                let mut ft_tot = Complex64::new(0.0, 0.0);
                for ft in &fts {
                    ft_tot += ft.eval(kv);
                }
                let kneg = [-kv[0], -kv[1], -kv[2]];
                for a in 0..NP {
                    for b in 0..NP {
                        vdd[a][b] += weight * fts[a * NP + b].eval(kneg) * ft_tot;
                    }
                }
            }
        }
    }
    let pref = 3.0 * params.nadd / (2.0 * std::f64::consts::PI).powi(3);
    for row in &mut vdd {
        for v in row {
            *v *= pref;
        }
    }
    vdd
}

/// Contact elements by the same k-space route with kernel 1 (Parseval
/// self-check of the oracle plumbing).
fn kspace_contact(state: &VariationalState, params: &Params) -> PairMatrix {
    let fts: Vec<PairFt> = (0..NP * NP)
        .map(|ab| PairFt::new(&state.packets[ab / NP], &state.packets[ab % NP]))
        .collect();
    let kmax = 14.0 * fts.iter().map(PairFt::kscale).fold(0.0f64, f64::max).sqrt();
    let (xr, wr) = gauss_legendre(64);
    let (xc, wc) = gauss_legendre(40);
    let nphi = 48;
    let dphi = 2.0 * std::f64::consts::PI / nphi as f64;

    let mut out: PairMatrix = [[Complex64::new(0.0, 0.0); NP]; NP];
    for (ri, &xi) in xr.iter().enumerate() {
        let k = 0.5 * kmax * (xi + 1.0);
        let wk = 0.5 * kmax * wr[ri] * k * k;
        for (ci, &cos_t) in xc.iter().enumerate() {
            let sin_t = (1.0 - cos_t * cos_t).sqrt();
            let wkc = wk * wc[ci];
            for f in 0..nphi {
                let phi = (f as f64 + 0.5) * dphi;
                let kv = [k * sin_t * phi.cos(), k * sin_t * phi.sin(), k * cos_t];
                let weight = wkc * dphi;
                let mut ft_tot = Complex64::new(0.0, 0.0);
                for ft in &fts {
                    ft_tot += ft.eval(kv);
                }
                let kneg = [-kv[0], -kv[1], -kv[2]];
                for a in 0..NP {
                    for b in 0..NP {
                        out[a][b] += weight * fts[a * NP + b].eval(kneg) * ft_tot;
                    }
                }
            }
        }
    }
    let pref = 4.0 * std::f64::consts::PI * params.na / (2.0 * std::f64::consts::PI).powi(3);
    for row in &mut out {
        for v in row {
            *v *= pref;
        }
    }
    out
}

// ---------------------------------------------------------------------------

fn assert_matrix_close(got: &PairMatrix, want: &PairMatrix, rtol: f64, what: &str) {
    let scale = want
        .iter()
        .flatten()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max);
    for a in 0..NP {
        for b in 0..NP {
            let d = (got[a][b] - want[a][b]).norm();
            let tol = rtol * want[a][b].norm().max(1e-3 * scale);
            assert!(
                d <= tol,
                "{what}[{a}][{b}]: got {}, want {}, |diff| {d:.3e} > tol {tol:.3e}",
                got[a][b],
                want[a][b]
            );
        }
    }
}

fn params(na: f64, nadd: f64, pol: Polarization) -> Params {
    let mut p = Params::new(na, nadd);
    p.polarization = pol;
    p
}

#[test]
fn elements_match_grid_quadrature_for_randomized_states() {
    let mut rng = Rng(0x5eed_0001);
    for trial in 0..20 {
        let state = random_state(&mut rng);
        let pol = if trial % 3 == 0 {
            Polarization::X
        } else {
            Polarization::Z
        };
        let prm = params(0.05 + 0.01 * trial as f64, 0.0, pol);
        let el = hamiltonian_elements(&state, &prm).unwrap();
        let oracle = grid_oracle(&state, &prm, 108);
        assert_matrix_close(&el.s, &oracle.s, 1e-6, "S");
        assert_matrix_close(&el.t, &oracle.t, 1e-6, "T");
        assert_matrix_close(&el.v_trap, &oracle.v_trap, 1e-6, "Vtrap");
        assert_matrix_close(&el.v_sc, &oracle.v_sc, 1e-6, "Vsc");
    }
}

#[test]
fn dipolar_elements_match_kspace_quadrature() {
    let mut rng = Rng(0xdd17_abcd);
    for trial in 0..8 {
        let state = random_state(&mut rng);
        let pol = if trial % 2 == 0 {
            Polarization::Z
        } else {
            Polarization::X
        };
        let prm = params(0.0, 0.2, pol);
        let el = hamiltonian_elements(&state, &prm).unwrap();
        let oracle = kspace_vdd(&state, &prm);
        assert_matrix_close(&el.v_dd, &oracle, 2e-6, "Vdd");
    }
}

#[test]
fn kspace_oracle_plumbing_agrees_with_contact_elements() {
    // Self-check of the Parseval conventions in the k-space oracle: with a
    // unit kernel it must reproduce the closed-form contact elements.
    let mut rng = Rng(0x0c0de);
    let state = random_state(&mut rng);
    let prm = params(0.08, 0.0, Polarization::Z);
    let el = hamiltonian_elements(&state, &prm).unwrap();
    let oracle = kspace_contact(&state, &prm);
    assert_matrix_close(&el.v_sc, &oracle, 1e-8, "Vsc(k-space)");
}

#[test]
fn contact_elements_vanish_without_scattering_length() {
    let mut rng = Rng(42);
    let state = random_state(&mut rng);
    let prm = params(0.0, 0.1, Polarization::Z);
    let el = hamiltonian_elements(&state, &prm).unwrap();
    for row in &el.v_sc {
        for v in row {
            assert_eq!(*v, Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn all_element_matrices_are_conjugate_symmetric() {
    let mut rng = Rng(0x99);
    for _ in 0..5 {
        let state = random_state(&mut rng);
        let prm = params(0.1, 0.25, Polarization::Z);
        let el = hamiltonian_elements(&state, &prm).unwrap();
        for (name, m) in [
            ("S", &el.s),
            ("T", &el.t),
            ("Vtrap", &el.v_trap),
            ("Vsc", &el.v_sc),
            ("Vdd", &el.v_dd),
        ] {
            let scale = m.iter().flatten().map(|v| v.norm()).fold(0.0f64, f64::max);
            for a in 0..NP {
                for b in 0..NP {
                    assert!(
                        (m[a][b] - m[b][a].conj()).norm() <= 1e-12 * scale.max(1.0),
                        "{name} not conjugate-symmetric at ({a},{b})"
                    );
                }
            }
        }
    }
}

#[test]
fn dipolar_diagonal_sign_tracks_packet_anisotropy() {
    // Oblate packet (squeezed along z), dipoles along z: side-by-side
    // repulsion dominates, <Vdd> > 0. Prolate (elongated along z): < 0.
    let mk = |azz: f64| {
        let g = GaussianPacket::real_diagonal(1.0, 1.0, azz, [0.0, 0.0], 0.0);
        let far1 = GaussianPacket::real_diagonal(1.0, 1.0, 1.0, [40.0, 0.0], 20.0);
        let far2 = GaussianPacket::real_diagonal(1.0, 1.0, 1.0, [-40.0, 0.0], 20.0);
        VariationalState::new([g, far1, far2])
    };
    let prm = params(0.0, 0.2, Polarization::Z);

    let oblate = hamiltonian_elements(&mk(9.0), &prm).unwrap();
    assert!(
        oblate.v_dd[0][0].re > 0.0,
        "oblate packet should have repulsive dipolar energy, got {}",
        oblate.v_dd[0][0]
    );
    let prolate = hamiltonian_elements(&mk(1.0 / 9.0), &prm).unwrap();
    assert!(
        prolate.v_dd[0][0].re < 0.0,
        "prolate packet should have attractive dipolar energy, got {}",
        prolate.v_dd[0][0]
    );

    // Cross-check both signs against the independent k-space oracle.
    let ko = kspace_vdd(&mk(9.0), &prm);
    assert!(ko[0][0].re > 0.0);
    let kp = kspace_vdd(&mk(1.0 / 9.0), &prm);
    assert!(kp[0][0].re < 0.0);
}

#[test]
fn pair_overlap_matches_closed_form_separation_law() {
    use tgpe_variational::pair_overlap;
    // Normalized unit-width packets (A = identity) separated by d along x:
    // <g1|g2> = exp(-d^2/2) with no phase for zero momenta.
    let pi = std::f64::consts::PI;
    // <g|g> = (pi/2)^{3/2} exp(-2 gamma_re) = 1.
    let gamma_re = 0.5 * 1.5 * (pi / 2.0).ln();
    for d in [0.5, 1.0, 2.0] {
        let g1 = GaussianPacket::real_diagonal(1.0, 1.0, 1.0, [-d / 2.0, 0.0], gamma_re);
        let g2 = GaussianPacket::real_diagonal(1.0, 1.0, 1.0, [d / 2.0, 0.0], gamma_re);
        let self_overlap = pair_overlap(&g1, &g1).unwrap();
        assert!((self_overlap.re - 1.0).abs() < 1e-14);
        let ov = pair_overlap(&g1, &g2).unwrap();
        let want = (-d * d / 2.0_f64).exp();
        assert!(
            (ov - Complex64::new(want, 0.0)).norm() < 1e-13 * want,
            "d={d}: {ov} vs {want}"
        );
    }
    // Widely separated packets decay below any relevant scale.
    let g1 = GaussianPacket::real_diagonal(1.0, 1.0, 1.0, [-10.0, 0.0], gamma_re);
    let g2 = GaussianPacket::real_diagonal(1.0, 1.0, 1.0, [10.0, 0.0], gamma_re);
    assert!(pair_overlap(&g1, &g2).unwrap().norm() < 1e-40);
}

#[test]
fn wavefunction_parity_for_symmetric_states() {
    let state = {
        let mut s = VariationalState::symmetric_seed(1.2, 0.9, 1.5);
        s.packets[0].p = [0.2, 0.0];
        s.packets[2].p = [-0.2, 0.0];
        s
    };
    let mut rng = Rng(7);
    for _ in 0..10 {
        let r = [
            rng.uniform(-2.0, 2.0),
            rng.uniform(-1.0, 1.0),
            rng.uniform(-1.0, 1.0),
        ];
        let plus = state.eval_wavefunction(r).norm();
        let minus = state.eval_wavefunction([-r[0], r[1], r[2]]).norm();
        assert!((plus - minus).abs() <= 1e-12 * plus.max(1.0));
    }
}
