//! Measures the largest per-step energy rise of imaginary-time relaxation
//! as a function of dt (splitting-wiggle calibration).

use tgpe_core::Params;
use tgpe_grid::{init_state, GridContext, GridSpec, InitKind};

fn main() {
    let params = Params::new(0.02, 0.08);
    for &dt in &[0.02f64, 0.01, 0.005, 0.0025] {
        let spec = GridSpec {
            nx: 24,
            ny: 12,
            nz: 16,
            lx: 4.0,
            ly: 6.0,
            lz: 2.4,
            dt,
        };
        let mut ctx = GridContext::new(&spec, &params).unwrap();
        let st = init_state(&spec, InitKind::ThreeGaussian, &params.trap).unwrap();
        let report = ctx.relax(st, &params, 1e-6, 40000).unwrap();
        let trace = &report.energy_trace;
        let mut max_rise = 0.0f64;
        let mut at = 0.0;
        for w in trace.windows(2) {
            let rise = w[1].1 - w[0].1;
            if rise > max_rise {
                max_rise = rise;
                at = w[1].0;
            }
        }
        println!(
            "dt {dt:<7} outcome {:?} steps {:>6} e_final {:.9} max_rise {max_rise:.3e} at tau {at:.3} rise/dt^2 {:.3}",
            report.outcome,
            report.steps,
            trace.last().unwrap().1,
            max_rise / (dt * dt)
        );
    }
}
