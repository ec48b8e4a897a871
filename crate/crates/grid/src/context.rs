//! Propagation context: cached trap field, dipolar kernel, and kinetic phase
//! factors, plus the split-operator step, relaxation, ramp evolution, and
//! observables.

use num_complex::Complex64;
use tgpe_core::{dipole_kernel_k, eval_trap_potential, Mode, Params, RampSchedule};

use crate::error::{GridError, Result};
use crate::fft::FftEngine;
use crate::spec::GridSpec;
use crate::state::GridState;

/// Energies, well populations, and density diagnostics of a grid state.
#[derive(Clone, Copy, Debug, Default)]
pub struct Observables {
    pub e_mf: f64,
    pub mu: f64,
    pub kinetic: f64,
    pub trap: f64,
    /// Full contact expectation `<V_sc>` (enters E_mf with weight 1/2).
    pub contact: f64,
    /// Full dipolar expectation `<V_dd>` (enters E_mf with weight 1/2).
    pub dipolar: f64,
    pub p_left: f64,
    pub p_c: f64,
    pub p_right: f64,
    pub peak_density: f64,
    pub norm: f64,
}

/// Outcome of an imaginary-time relaxation run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelaxOutcome {
    /// Energy rate `|dE|/(|E| dtau)` fell below `tol`.
    Converged,
    /// The energy rate stayed below `10*tol` for a full window of
    /// [`PLATEAU_WINDOW`] steps and later rose above it again (a metastable
    /// shelf that the flow eventually left).
    Plateau,
    /// Divergence criterion met with no preceding plateau.
    Collapsed,
    MaxSteps,
}

#[derive(Debug)]
pub struct RelaxReport {
    pub outcome: RelaxOutcome,
    pub steps: usize,
    /// `(tau, E_mf)` after every step, starting at `tau = 0`.
    pub energy_trace: Vec<(f64, f64)>,
    /// Final state; absent when the divergence criterion fired.
    pub final_state: Option<GridState>,
}

/// Observable samples from a real-time run.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub samples: Vec<(f64, Observables)>,
    pub collapsed: bool,
    pub t_final: f64,
}

/// Sliding-window length (steps) for plateau detection.
pub const PLATEAU_WINDOW: usize = 2000;
/// Plateau slope threshold as a multiple of the convergence tolerance.
pub const PLATEAU_SLOPE_FACTOR: f64 = 10.0;
/// Collapse when `E_mf < -COLLAPSE_ENERGY_FACTOR * V0`.
pub const COLLAPSE_ENERGY_FACTOR: f64 = 10.0;
/// Collapse when the peak density exceeds this multiple of its initial value.
pub const COLLAPSE_DENSITY_FACTOR: f64 = 1e3;
/// Consecutive below-tolerance steps required to declare convergence.
const CONVERGED_RUN: usize = 5;

pub struct GridContext {
    pub spec: GridSpec,
    engine: FftEngine,
    /// `V_TW` sampled on the grid.
    trap_field: Vec<f64>,
    /// Dipolar kernel sampled on the k-grid (polarization baked in).
    kernel: Vec<f64>,
    /// `k^2` on the k-grid.
    k_squared: Vec<f64>,
    /// Cached half-step kinetic factors `exp(-i dt k^2/4)` or
    /// `exp(-dt k^2/4)` for the current `(dt, mode)`.
    kin_half: Vec<Complex64>,
    kin_key: Option<(u64, Mode)>,
    /// Scratch: density / convolution buffer.
    rho: Vec<Complex64>,
}

impl GridContext {
    pub fn new(spec: &GridSpec, params: &Params) -> Result<Self> {
        spec.validate()?;
        params.validate()?;
        let x = spec.axis(0);
        let y = spec.axis(1);
        let z = spec.axis(2);
        let mut trap_field = vec![0.0; spec.len()];
        for (ix, &xv) in x.iter().enumerate() {
            for (iy, &yv) in y.iter().enumerate() {
                for (iz, &zv) in z.iter().enumerate() {
                    trap_field[spec.idx(ix, iy, iz)] =
                        eval_trap_potential([xv, yv, zv], &params.trap);
                }
            }
        }
        let kx = spec.wavenumbers(0);
        let ky = spec.wavenumbers(1);
        let kz = spec.wavenumbers(2);
        let mut kernel = vec![0.0; spec.len()];
        let mut k_squared = vec![0.0; spec.len()];
        for (ix, &kxv) in kx.iter().enumerate() {
            for (iy, &kyv) in ky.iter().enumerate() {
                for (iz, &kzv) in kz.iter().enumerate() {
                    let i = spec.idx(ix, iy, iz);
                    kernel[i] = dipole_kernel_k([kxv, kyv, kzv], params.polarization);
                    k_squared[i] = kxv * kxv + kyv * kyv + kzv * kzv;
                }
            }
        }
        Ok(Self {
            spec: *spec,
            engine: FftEngine::new(spec),
            trap_field,
            kernel,
            k_squared,
            kin_half: Vec::new(),
            kin_key: None,
            rho: vec![Complex64::default(); spec.len()],
        })
    }

    /// Number of 3-D FFTs executed so far.
    pub fn fft_count(&self) -> u64 {
        self.engine.count()
    }

    pub fn trap_field(&self) -> &[f64] {
        &self.trap_field
    }

    fn ensure_kinetic(&mut self, dt: f64, mode: Mode) {
        let key = (dt.to_bits(), mode);
        if self.kin_key == Some(key) {
            return;
        }
        self.kin_half.resize(self.spec.len(), Complex64::default());
        match mode {
            Mode::RealTime => {
                for (f, &k2) in self.kin_half.iter_mut().zip(&self.k_squared) {
                    *f = Complex64::cis(-dt * k2 / 4.0);
                }
            }
            Mode::ImaginaryTime => {
                for (f, &k2) in self.kin_half.iter_mut().zip(&self.k_squared) {
                    *f = Complex64::new((-dt * k2 / 4.0).exp(), 0.0);
                }
            }
        }
        self.kin_key = Some(key);
    }

    /// Dipolar mean-field potential `3*nadd * IFFT[kernel * FFT(|psi|^2)]`
    /// (2 FFTs); the sub-1e-12 imaginary residue of the back transform is
    /// discarded.
    pub fn dipole_potential(&mut self, state: &GridState, nadd: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.spec.len()];
        self.dipole_into(&state.psi, nadd, &mut out);
        out
    }

    fn dipole_into(&mut self, psi: &[Complex64], nadd: f64, out: &mut [f64]) {
        if nadd == 0.0 {
            out.fill(0.0);
            return;
        }
        for (r, v) in self.rho.iter_mut().zip(psi) {
            *r = Complex64::new(v.norm_sqr(), 0.0);
        }
        self.engine.forward(&mut self.rho);
        let pref = 3.0 * nadd;
        for (r, &k) in self.rho.iter_mut().zip(&self.kernel) {
            *r *= pref * k;
        }
        self.engine.inverse(&mut self.rho);
        for (o, r) in out.iter_mut().zip(&self.rho) {
            *o = r.re;
        }
    }

    /// One Strang step `T/2 . V . T/2` with `V = V_TW + V_sc + V_dd`
    /// recomputed from the current density. Exactly six 3-D FFTs: two for
    /// the density convolution and four for the wave function. In imaginary
    /// time the state is renormalized afterwards.
    pub fn step(&mut self, state: &mut GridState, params: &Params, mode: Mode) -> Result<()> {
        let dt = state.spec.dt;
        self.step_with_na(state, params, params.na, mode, dt)
    }

    /// [`GridContext::step`] with an explicit `na` override (ramps).
    fn step_with_na(
        &mut self,
        state: &mut GridState,
        params: &Params,
        na: f64,
        mode: Mode,
        dt: f64,
    ) -> Result<()> {
        debug_assert_eq!(state.psi.len(), self.spec.len());
        self.ensure_kinetic(dt, mode);

        // Half kinetic step in k-space.
        self.engine.forward(&mut state.psi);
        for (v, f) in state.psi.iter_mut().zip(&self.kin_half) {
            *v *= f;
        }
        self.engine.inverse(&mut state.psi);

        // Full potential step in real space with V_dd from the current
        // density (2 FFTs inside dipole_into). The dipolar field is read
        // from the shared rho buffer to avoid an extra allocation per step.
        for (r, v) in self.rho.iter_mut().zip(&state.psi) {
            *r = Complex64::new(v.norm_sqr(), 0.0);
        }
        let four_pi_na = 4.0 * std::f64::consts::PI * na;
        let contact: Vec<f64> = state.psi.iter().map(|v| four_pi_na * v.norm_sqr()).collect();
        if params.nadd != 0.0 {
            self.engine.forward(&mut self.rho);
            let pref = 3.0 * params.nadd;
            for (r, &k) in self.rho.iter_mut().zip(&self.kernel) {
                *r *= pref * k;
            }
            self.engine.inverse(&mut self.rho);
        } else {
            // Keep the six-FFT contract observable only when the dipolar
            // term participates; without it the two convolution transforms
            // are pure no-ops and are executed anyway for a uniform count.
            self.engine.forward(&mut self.rho);
            for r in self.rho.iter_mut() {
                *r = Complex64::default();
            }
            self.engine.inverse(&mut self.rho);
        }
        match mode {
            Mode::RealTime => {
                for i in 0..state.psi.len() {
                    let v = self.trap_field[i] + contact[i] + self.rho[i].re;
                    state.psi[i] *= Complex64::cis(-dt * v);
                }
            }
            Mode::ImaginaryTime => {
                for i in 0..state.psi.len() {
                    let v = self.trap_field[i] + contact[i] + self.rho[i].re;
                    state.psi[i] *= (-dt * v).exp();
                }
            }
        }

        // Second half kinetic step.
        self.engine.forward(&mut state.psi);
        for (v, f) in state.psi.iter_mut().zip(&self.kin_half) {
            *v *= f;
        }
        self.engine.inverse(&mut state.psi);

        let n2 = state.norm_squared();
        if !n2.is_finite() {
            return Err(GridError::Collapsed { t: f64::NAN });
        }
        if mode == Mode::ImaginaryTime {
            state.normalize()?;
        } else {
            state.norm = n2;
        }
        Ok(())
    }

    /// Energies, chemical potential, populations, and density diagnostics.
    /// Costs three FFTs (one for `<T>`, two for the dipolar term).
    pub fn observables(&mut self, state: &GridState, params: &Params) -> Observables {
        self.observables_with_na(state, params, params.na)
    }

    fn observables_with_na(
        &mut self,
        state: &GridState,
        params: &Params,
        na: f64,
    ) -> Observables {
        let spec = self.spec;
        let dv = spec.dv();
        let n = spec.len() as f64;

        // <T> via Parseval: 1/2 sum k^2 |psi_k|^2 dv / N.
        self.rho.copy_from_slice(&state.psi);
        self.engine.forward(&mut self.rho);
        let mut kinetic = 0.0;
        for (v, &k2) in self.rho.iter().zip(&self.k_squared) {
            kinetic += k2 * v.norm_sqr();
        }
        kinetic *= 0.5 * dv / n;

        let mut vdd_field = vec![0.0; spec.len()];
        self.dipole_into(&state.psi, params.nadd, &mut vdd_field);

        let four_pi_na = 4.0 * std::f64::consts::PI * na;
        let (mut trap, mut contact, mut dipolar) = (0.0, 0.0, 0.0);
        let (mut p_left, mut p_c, mut p_right) = (0.0, 0.0, 0.0);
        let mut peak = 0.0f64;
        let x = spec.axis(0);
        for ix in 0..spec.nx {
            let xv = x[ix];
            let mut row = 0.0;
            for iy in 0..spec.ny {
                for iz in 0..spec.nz {
                    let i = spec.idx(ix, iy, iz);
                    let d = state.psi[i].norm_sqr();
                    row += d;
                    trap += self.trap_field[i] * d;
                    contact += four_pi_na * d * d;
                    dipolar += vdd_field[i] * d;
                    peak = peak.max(d);
                }
            }
            let row_mass = row * dv;
            if xv < -0.5 {
                p_left += row_mass;
            } else if xv > 0.5 {
                p_right += row_mass;
            } else {
                p_c += row_mass;
            }
        }
        trap *= dv;
        contact *= dv;
        dipolar *= dv;

        Observables {
            e_mf: kinetic + trap + 0.5 * contact + 0.5 * dipolar,
            mu: kinetic + trap + contact + dipolar,
            kinetic,
            trap,
            contact,
            dipolar,
            p_left,
            p_c,
            p_right,
            peak_density: peak,
            norm: state.norm_squared(),
        }
    }

    /// Imaginary-time relaxation with convergence, plateau, and collapse
    /// diagnostics. Convergence: energy rate `|dE|/(max(|E|,1) dtau) < tol`
    /// for [`CONVERGED_RUN`] consecutive steps. Plateau: the rate stays below
    /// `10*tol` for [`PLATEAU_WINDOW`] steps and later rises above it.
    /// Collapse: `E < -10 V0`, peak density above `1e3` times its initial
    /// value, or non-finite samples.
    pub fn relax(
        &mut self,
        mut state: GridState,
        params: &Params,
        tol: f64,
        max_steps: usize,
    ) -> Result<RelaxReport> {
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(GridError::InvalidSpec(format!(
                "relax tolerance {tol} must be positive and finite"
            )));
        }
        let dt = state.spec.dt;
        let peak0 = state.peak_density();
        let mut energy_trace = Vec::with_capacity(max_steps.min(65536) + 1);
        let mut e_prev = self.observables(&state, params).e_mf;
        energy_trace.push((0.0, e_prev));

        let mut quiet_run = 0usize;
        let mut converged_run = 0usize;
        let mut plateau_seen = false;
        let mut outcome = RelaxOutcome::MaxSteps;
        let mut steps = 0usize;
        let mut diverged = false;

        for n in 1..=max_steps {
            if let Err(GridError::Collapsed { .. }) =
                self.step(&mut state, params, Mode::ImaginaryTime)
            {
                diverged = true;
                steps = n;
                break;
            }
            steps = n;
            let obs = self.observables(&state, params);
            let e = obs.e_mf;
            energy_trace.push((n as f64 * dt, e));

            if !e.is_finite()
                || e < -COLLAPSE_ENERGY_FACTOR * params.trap.v0
                || obs.peak_density > COLLAPSE_DENSITY_FACTOR * peak0
            {
                diverged = true;
                break;
            }

            let rate = (e - e_prev).abs() / (e.abs().max(1.0) * dt);
            e_prev = e;

            if rate < tol {
                converged_run += 1;
                if converged_run >= CONVERGED_RUN {
                    outcome = RelaxOutcome::Converged;
                    break;
                }
            } else {
                converged_run = 0;
            }

            if rate < PLATEAU_SLOPE_FACTOR * tol {
                quiet_run += 1;
            } else {
                if quiet_run >= PLATEAU_WINDOW {
                    plateau_seen = true;
                }
                quiet_run = 0;
            }
        }

        if diverged {
            outcome = if plateau_seen {
                RelaxOutcome::Plateau
            } else {
                RelaxOutcome::Collapsed
            };
        } else if outcome != RelaxOutcome::Converged && plateau_seen {
            outcome = RelaxOutcome::Plateau;
        }

        Ok(RelaxReport {
            outcome,
            steps,
            energy_trace,
            final_state: if diverged { None } else { Some(state) },
        })
    }

    /// Real-time propagation under a scattering-length ramp, sampling
    /// observables every `sample_every` steps. Collapse truncates the
    /// trajectory and flags it.
    pub fn evolve(
        &mut self,
        state: &mut GridState,
        params: &Params,
        schedule: &RampSchedule,
        t_end: f64,
        sample_every: usize,
    ) -> Result<Trajectory> {
        schedule.validate()?;
        if !(t_end > 0.0) {
            return Err(GridError::InvalidSpec(format!(
                "t_end = {t_end} must be positive"
            )));
        }
        let dt = state.spec.dt;
        let stride = sample_every.max(1);
        let nsteps = (t_end / dt).ceil() as usize;
        let peak0 = state.peak_density();
        let mut params_t = params.clone();
        params_t.nadd = schedule.nadd;

        let mut traj = Trajectory::default();
        let obs0 = self.observables_with_na(state, &params_t, schedule.na(0.0));
        traj.samples.push((0.0, obs0));

        for n in 0..nsteps {
            let t_mid = (n as f64 + 0.5) * dt;
            let na = schedule.na(t_mid);
            let r = self.step_with_na(state, &params_t, na, Mode::RealTime, dt);
            let t_now = (n + 1) as f64 * dt;
            if r.is_err() {
                traj.collapsed = true;
                traj.t_final = t_now;
                return Ok(traj);
            }
            if (n + 1) % stride == 0 || n + 1 == nsteps {
                let obs = self.observables_with_na(state, &params_t, schedule.na(t_now));
                if !obs.e_mf.is_finite() || obs.peak_density > COLLAPSE_DENSITY_FACTOR * peak0
                {
                    traj.collapsed = true;
                    traj.t_final = t_now;
                    return Ok(traj);
                }
                traj.samples.push((t_now, obs));
            }
            traj.t_final = t_now;
        }
        Ok(traj)
    }
}
