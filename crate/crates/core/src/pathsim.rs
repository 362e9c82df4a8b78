//! Euler–Maruyama paths of the Itô form together with the running functional.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::model::{Mat2, SdeModel, State};

/// Deterministic per-path random streams.
///
/// Path `i` always draws from the ChaCha8 stream `i` of the master seed, so a
/// batch gives the same numbers however its paths are spread over workers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngPolicy {
    pub master_seed: u64,
}

impl RngPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn stream_for(&self, path_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(path_index);
        rng
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSample {
    pub x_final: State,
    /// `None` when the path blew up.
    pub a_final: Option<f64>,
    pub t: f64,
    pub n_steps: usize,
    pub blowup: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub samples: Vec<PathSample>,
    pub n_blowups: usize,
}

impl Batch {
    /// Final functional values of the paths that stayed inside the guard.
    pub fn valid_a(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.a_final).collect()
    }
}

/// Guard radius: ten times the larger of the model scale, `|x0|` and one.
pub fn guard_radius(model: &SdeModel, x0: &State) -> f64 {
    10.0 * model.domain_scale().max(model.guard_norm(x0)).max(1.0)
}

/// Draws `n_steps · m` Gaussian increments with variance `dt`, step major.
pub fn gaussian_increments<R: Rng>(rng: &mut R, n_steps: usize, m: usize, dt: f64) -> Vec<f64> {
    let sd = dt.sqrt();
    (0..n_steps * m)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

fn check_args(t: f64, n_steps: usize) {
    assert!(t > 0.0 && t.is_finite(), "t must be positive, got {t}");
    assert!(n_steps >= 1, "n_steps must be at least 1");
}

fn em<F: FnMut(usize) -> f64>(
    model: &SdeModel,
    x0: State,
    t: f64,
    n_steps: usize,
    mut dw: F,
) -> PathSample {
    check_args(t, n_steps);
    let dt = t / n_steps as f64;
    let m = model.m();
    let guard = guard_radius(model, &x0);
    let mut x = x0;
    model.wrap(&mut x);
    let mut a = 0.0;
    let mut blowup = false;
    for _ in 0..n_steps {
        let drift = model.ito_drift(&x);
        a += model.q_ito(&x) * dt;
        let mut next = [x[0] + drift[0] * dt, x[1] + drift[1] * dt, x[2] + drift[2] * dt];
        for j in 0..m {
            let w = dw(j);
            a += model.q(j, &x) * w;
            let n = model.noise(j, &x);
            next[0] += n[0] * w;
            next[1] += n[1] * w;
            next[2] += n[2] * w;
        }
        x = next;
        model.wrap(&mut x);
        if !(model.guard_norm(&x) <= guard) || !a.is_finite() || x.iter().any(|v| !v.is_finite()) {
            blowup = true;
            break;
        }
    }
    PathSample {
        x_final: x,
        a_final: (!blowup).then_some(a),
        t,
        n_steps,
        blowup,
    }
}

/// One Euler–Maruyama path with left-endpoint Itô accumulation of `A_t`.
pub fn simulate_path<R: Rng>(
    model: &SdeModel,
    x0: State,
    t: f64,
    n_steps: usize,
    rng: &mut R,
) -> PathSample {
    let sd = (t / n_steps as f64).sqrt();
    em(model, x0, t, n_steps, |_| sd * rng.sample::<f64, _>(StandardNormal))
}

/// Euler–Maruyama driven by given increments (step major, `m` per step).
pub fn simulate_path_increments(model: &SdeModel, x0: State, t: f64, increments: &[f64]) -> PathSample {
    let m = model.m();
    assert!(m > 0 && increments.len().is_multiple_of(m), "increment count must be a multiple of m");
    let mut it = increments.iter();
    em(model, x0, t, increments.len() / m, |_| *it.next().unwrap())
}

/// Heun (midpoint) integration of the Stratonovich form on given increments.
pub fn simulate_path_heun(model: &SdeModel, x0: State, t: f64, increments: &[f64]) -> PathSample {
    let m = model.m();
    assert!(m > 0 && increments.len().is_multiple_of(m), "increment count must be a multiple of m");
    let n_steps = increments.len() / m;
    check_args(t, n_steps);
    let dt = t / n_steps as f64;
    let guard = guard_radius(model, &x0);
    let mut x = x0;
    model.wrap(&mut x);
    let mut a = 0.0;
    let mut blowup = false;
    let euler = |x: &State, dw: &[f64]| {
        let d = model.strat_drift(x);
        let mut dx = [d[0] * dt, d[1] * dt, d[2] * dt];
        let mut da = model.q0(x) * dt;
        for (j, w) in dw.iter().enumerate() {
            let n = model.noise(j, x);
            for k in 0..3 {
                dx[k] += n[k] * w;
            }
            da += model.q(j, x) * w;
        }
        (dx, da)
    };
    for dw in increments.chunks_exact(m) {
        let (dx1, da1) = euler(&x, dw);
        let pred = [x[0] + dx1[0], x[1] + dx1[1], x[2] + dx1[2]];
        let (dx2, da2) = euler(&pred, dw);
        for k in 0..3 {
            x[k] += 0.5 * (dx1[k] + dx2[k]);
        }
        a += 0.5 * (da1 + da2);
        model.wrap(&mut x);
        if !(model.guard_norm(&x) <= guard) || !a.is_finite() {
            blowup = true;
            break;
        }
    }
    PathSample {
        x_final: x,
        a_final: (!blowup).then_some(a),
        t,
        n_steps,
        blowup,
    }
}

/// Simulates `n_paths` independent paths; path `i` uses `policy.stream_for(i)`.
///
/// Runs on the current rayon pool. Results are in path order and do not
/// depend on the number of workers.
pub fn simulate_batch(
    model: &SdeModel,
    x0: State,
    t: f64,
    n_steps: usize,
    n_paths: usize,
    policy: &RngPolicy,
) -> Batch {
    assert!(n_paths >= 1, "n_paths must be at least 1");
    let samples: Vec<PathSample> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = policy.stream_for(i as u64);
            simulate_path(model, x0, t, n_steps, &mut rng)
        })
        .collect();
    let n_blowups = samples.iter().filter(|s| s.blowup).count();
    Batch { samples, n_blowups }
}

/// Runs `f` on a dedicated pool with `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

/// Heun integration of the full linear system `dv = B_0 v dt + Σ_j B_j v ∘ dW^j`.
pub fn simulate_linear_2d(b0: &Mat2, b: &[Mat2], v0: [f64; 2], t: f64, increments: &[f64]) -> [f64; 2] {
    let m = b.len();
    assert!(m > 0 && increments.len().is_multiple_of(m), "increment count must be a multiple of m");
    let dt = t / (increments.len() / m) as f64;
    let mv = |mat: &Mat2, v: &[f64; 2]| {
        [mat[0][0] * v[0] + mat[0][1] * v[1], mat[1][0] * v[0] + mat[1][1] * v[1]]
    };
    let step = |v: &[f64; 2], dw: &[f64]| {
        let d = mv(b0, v);
        let mut dv = [d[0] * dt, d[1] * dt];
        for (bj, w) in b.iter().zip(dw) {
            let n = mv(bj, v);
            dv[0] += n[0] * w;
            dv[1] += n[1] * w;
        }
        dv
    };
    let mut v = v0;
    for dw in increments.chunks_exact(m) {
        let k1 = step(&v, dw);
        let k2 = step(&[v[0] + k1[0], v[1] + k1[1]], dw);
        v[0] += 0.5 * (k1[0] + k2[0]);
        v[1] += 0.5 * (k1[1] + k2[1]);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ScalarField;
    use crate::model::{build_model, project_linear_2d, ModelSpec};
    use std::f64::consts::TAU;

    fn ou(a: f64, sigma: f64) -> SdeModel {
        build_model(&ModelSpec::OuQuadratic { a, sigma }).unwrap()
    }

    #[test]
    fn noise_free_decay() {
        let m = ou(1.0, 0.0);
        let mut rng = RngPolicy::new(1).stream_for(0);
        let s = simulate_path(&m, [2.0, 0.0, 0.0], 1.0, 1000, &mut rng);
        assert!((s.x_final[0] - 2.0 * (-1.0f64).exp()).abs() < 2e-3);
        assert!(!s.blowup);
        assert_eq!(s.n_steps, 1000);
    }

    #[test]
    fn degenerate_telescopes() {
        let m = build_model(&ModelSpec::OuLinearDegenerate { a: 1.0, sigma: 1.0 }).unwrap();
        let mut rng = RngPolicy::new(7).stream_for(3);
        let x0 = 0.4;
        let s = simulate_path(&m, [x0, 0.0, 0.0], 5.0, 500, &mut rng);
        assert!((s.a_final.unwrap() - (x0 - s.x_final[0])).abs() < 1e-12);
    }

    #[test]
    fn isotropic_functional_is_scaled_brownian_motion() {
        let sigma = 0.7;
        let m = project_linear_2d(&[[0.0; 2]; 2], &[[[sigma, 0.0], [0.0, sigma]]]).unwrap();
        let mut rng = RngPolicy::new(11).stream_for(0);
        let dw = gaussian_increments(&mut rng, 400, 1, 0.01);
        let s = simulate_path_increments(&m, [1.0, 0.0, 0.0], 4.0, &dw);
        let w: f64 = dw.iter().sum();
        assert!((s.a_final.unwrap() - sigma * w).abs() < 1e-12);
    }

    #[test]
    fn single_path_batch_matches_stream_zero() {
        let m = ou(1.0, 1.0);
        let policy = RngPolicy::new(42);
        let b = simulate_batch(&m, [0.3, 0.0, 0.0], 2.0, 100, 1, &policy);
        let s = simulate_path(&m, [0.3, 0.0, 0.0], 2.0, 100, &mut policy.stream_for(0));
        assert_eq!(b.samples[0], s);
    }

    #[test]
    fn batch_is_thread_count_independent() {
        let m = ou(1.0, 1.0);
        let policy = RngPolicy::new(5);
        let run = |n| with_threads(Some(n), || simulate_batch(&m, [0.0; 3], 1.0, 50, 200, &policy));
        let (one, four) = (run(1), run(4));
        let bits = |b: &Batch| b.samples.iter().map(|s| s.a_final.unwrap().to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&one), bits(&four));
    }

    #[test]
    fn blowup_is_flagged() {
        let spec = ModelSpec::Custom {
            state_space: crate::model::StateSpace::Line,
            drift: ScalarField::poly(&[0.0, 0.0, 0.0, 1.0]),
            noise: vec![ScalarField::Constant(0.1)],
            q0: ScalarField::zero(),
            q: vec![],
        };
        let m = build_model(&spec).unwrap();
        let s = simulate_path(&m, [2.0, 0.0, 0.0], 5.0, 100, &mut RngPolicy::new(0).stream_for(0));
        assert!(s.blowup);
        assert!(s.a_final.is_none());
    }

    #[test]
    fn circle_shift_invariance() {
        let m = project_linear_2d(&[[0.3, 1.0], [-0.5, -0.2]], &[[[0.2, 0.4], [0.1, -0.3]]]).unwrap();
        let dw = gaussian_increments(&mut RngPolicy::new(2).stream_for(0), 200, 1, 0.01);
        let a = simulate_path_increments(&m, [0.8, 0.0, 0.0], 2.0, &dw);
        let b = simulate_path_increments(&m, [0.8 + TAU, 0.0, 0.0], 2.0, &dw);
        assert!((a.a_final.unwrap() - b.a_final.unwrap()).abs() < 1e-12);
    }
}
