use std::time::Instant;
use tgpe_core::Params;
use tgpe_variational::{eom_rhs, Mode, VariationalState};

fn main() {
    let mut state = VariationalState::symmetric_seed(16.0, 2.2, 16.0);
    state.normalize().unwrap();
    for (label, nadd) in [("nadd=0", 0.0), ("nadd=0.08", 0.08)] {
        let prm = Params::new(0.02, nadd);
        let t0 = Instant::now();
        let n = 50;
        for _ in 0..n {
            let r = eom_rhs(&state, &prm, Mode::RealTime).unwrap();
            std::hint::black_box(&r);
        }
        println!("{label}: {:.3} ms/call", t0.elapsed().as_secs_f64() * 1e3 / n as f64);
    }
}
