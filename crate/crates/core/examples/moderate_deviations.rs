//! Moderate-deviation scaled log-mgf for OU with b_t = t^{3/4}.

use moment_lyapunov::fkmc::mdp_lmgf;
use moment_lyapunov::pathsim::RngPolicy;
use moment_lyapunov::{build_model, ModelSpec};

fn main() {
    let model = build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap();
    let (t, dt) = (100.0, 0.02);
    let centering = 1.0 / (2.0 - dt);
    for p in [0.25, 0.5, 1.0] {
        let e = mdp_lmgf(&model, t, [0.0; 3], 0.75, p, 20_000, (t / dt) as usize, &RngPolicy::new(11), centering).unwrap();
        println!("p = {p}: {:.5} vs p^2/4 = {:.5} (ess {:.0})", e.value, 0.25 * p * p, e.ess);
    }
}
