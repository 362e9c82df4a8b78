//! Drives the experiment runner from a config file, as the `mlyap` binary does.

use moment_lyapunov::cli::{run, RunOptions, Subcommand};

const CONFIG: &str = "\
[model]
model = pitchfork_q2
a = 0
b = 1
sigma = 1

[spectral]
x_max = 6
n = 800
p_grid = 1, 3, 10

[bounds]
p_ladder = 1, 3, 10
";

fn main() {
    let dir = std::env::temp_dir().join("mlyap-run-config-example");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("pitchfork.ini");
    std::fs::write(&cfg, CONFIG).unwrap();
    let opts = RunOptions { config: Some(cfg), out: Some(dir.clone()), ..Default::default() };
    run(Subcommand::Bounds, &opts, &mut std::io::stdout()).unwrap();
    print!("{}", std::fs::read_to_string(dir.join("bounds.csv")).unwrap());
}
