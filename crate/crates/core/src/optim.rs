//! Gradient-free multistart minimization over pure states.
//!
//! A pure state in `C^n` is parametrized as a real unit vector in `R^{2n}`
//! (real parts then imaginary parts). Each restart runs a pattern search:
//! coordinate moves plus a few random directions, halving the step whenever
//! a full sweep fails to improve, until the step drops below the floor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::qcore::C64;
use crate::random::random_pure_vector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereSearch {
    pub restarts: usize,
    pub initial_step: f64,
    pub floor_step: f64,
    pub random_directions: usize,
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for SphereSearch {
    fn default() -> Self {
        Self {
            restarts: 64,
            initial_step: 0.5,
            floor_step: 1e-7,
            random_directions: 4,
            max_evals: 20_000,
            seed: 0x5eed_0f_5a1e,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SphereMinimum {
    pub argmin: Vec<C64>,
    pub value: f64,
    /// Final value of every restart, ascending.
    pub restart_values: Vec<f64>,
    pub evaluations: usize,
}

impl SphereMinimum {
    /// True when the two best restarts agree within `tol`.
    pub fn agrees_within(&self, tol: f64) -> bool {
        match self.restart_values.as_slice() {
            [a, b, ..] => (b - a).abs() <= tol,
            [_] => true,
            [] => false,
        }
    }
}

pub fn to_state(x: &[f64]) -> Vec<C64> {
    let n = x.len() / 2;
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    (0..n).map(|i| C64::new(x[i] / norm, x[n + i] / norm)).collect()
}

pub fn from_state(psi: &[C64]) -> Vec<f64> {
    psi.iter().map(|z| z.re).chain(psi.iter().map(|z| z.im)).collect()
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in x.iter_mut() {
        *v /= norm;
    }
}

/// Local pattern search from `start`; returns the refined point, its value and
/// the evaluation count.
pub fn refine<F, R>(f: &F, start: Vec<f64>, opts: &SphereSearch, rng: &mut R) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[C64]) -> f64,
    R: Rng,
{
    let dim = start.len();
    let mut x = start;
    normalize(&mut x);
    let mut fx = f(&to_state(&x));
    let mut evals = 1;
    let mut step = opts.initial_step;
    let mut trial = vec![0.0; dim];
    while step >= opts.floor_step && evals < opts.max_evals {
        let mut improved = false;
        let mut directions: Vec<Vec<f64>> = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        for _ in 0..opts.random_directions {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
            normalize(&mut v);
            directions.push(v);
        }
        for dir in &directions {
            for sign in [1.0, -1.0] {
                for ((t, xi), di) in trial.iter_mut().zip(&x).zip(dir) {
                    *t = xi + sign * step * di;
                }
                normalize(&mut trial);
                let ft = f(&to_state(&trial));
                evals += 1;
                if ft < fx {
                    fx = ft;
                    x.copy_from_slice(&trial);
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx, evals)
}

/// Minimizes `f` over unit vectors of `C^n`. Restarts are independent with
/// substreams of `opts.seed`, so the result does not depend on thread count.
/// `seeds` are extra starting points tried in addition to the random restarts.
pub fn minimize_on_sphere<F>(n: usize, f: F, opts: &SphereSearch, seeds: &[Vec<C64>]) -> SphereMinimum
where
    F: Fn(&[C64]) -> f64 + Sync,
{
    let total = opts.restarts.max(1) + seeds.len();
    let runs: Vec<(Vec<f64>, f64, usize)> = (0..total)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(r as u64);
            let start = if r < seeds.len() { from_state(&seeds[r]) } else { from_state(&random_pure_vector(n, &mut rng)) };
            refine(&f, start, opts, &mut rng)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.2).sum();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.1.total_cmp(&b.1).then(ia.cmp(ib)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let mut restart_values: Vec<f64> = runs.iter().map(|r| r.1).collect();
    restart_values.sort_by(f64::total_cmp);
    SphereMinimum { argmin: to_state(&runs[best].0), value: runs[best].1, restart_values, evaluations }
}
