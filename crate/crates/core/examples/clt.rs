//! Fluctuations of A_t around tλ against the Gaussian limit.

use moment_lyapunov::fkmc::clt_sample;
use moment_lyapunov::pathsim::RngPolicy;
use moment_lyapunov::{build_model, ModelSpec};

fn main() {
    let model = build_model(&ModelSpec::OuQuadratic { a: 1.0, sigma: 1.0 }).unwrap();
    for t in [10.0, 50.0, 200.0] {
        let c = clt_sample(&model, t, [0.0; 3], 5000, (t * 50.0) as usize, &RngPolicy::new(3), 0.5, Some(0.5)).unwrap();
        println!("t = {t:>5}: mean {:>8.4}  variance {:.4}  KS {:.4}", c.mean, c.variance, c.ks.unwrap());
    }
}
