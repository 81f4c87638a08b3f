use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::corrector::{Action, CorrectorProblem, CorrectorSolution};
use crate::error::{Error, Result};
use crate::grid::MAX_DIM;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct McOptions<T> {
    /// Total simulated time, split evenly across paths.
    pub horizon: T,
    pub dt: T,
    pub seed: u64,
    pub paths: usize,
    /// Starting point; the origin when `None`.
    pub start: Option<Vec<T>>,
}

impl<T: Scalar> Default for McOptions<T> {
    fn default() -> Self {
        Self { horizon: T::lit(2e4), dt: T::lit(1e-3), seed: 0, paths: 32, start: None }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct McEstimate<T> {
    /// Time-averaged cost over all paths.
    pub estimate: T,
    /// Standard error from the spread of per-path averages.
    pub stderr: T,
    pub running: T,
    pub transfer: T,
    pub escapes: usize,
}

struct PathResult<T> {
    running: T,
    transfer: T,
    escapes: usize,
}

/// Ergodic cost of the grid policy along simulated paths of
/// `rho_{k+1} = rho_k + alpha_bar sqrt(dt) xi_k`. After every step the state
/// is pushed by one grid step along the policy's transfer direction until it
/// sits in a diffusing cell, paying `lambda h` per push.
pub fn mc_ergodic_cost<T: Scalar>(sol: &CorrectorSolution<T>, problem: &CorrectorProblem<T>, opts: &McOptions<T>) -> Result<McEstimate<T>> {
    let grid = &sol.grid;
    let d = grid.d();
    if sol.policy.diffuse_count() == 0 || sol.policy.actions[grid.center()] != Action::Diffuse {
        return Err(Error::NoNTRegion);
    }
    if opts.paths == 0 || !(opts.dt > T::zero()) || !(opts.horizon > T::zero()) {
        return Err(Error::InvalidParams("Monte-Carlo needs paths > 0, dt > 0 and horizon > 0".into()));
    }
    let start = opts.start.clone().unwrap_or_else(|| vec![T::zero(); d]);
    let path_time = opts.horizon / T::from_usize_lossy(opts.paths);
    let steps = (path_time / opts.dt).round().to_usize().unwrap_or(0).max(1);
    let sqrt_dt = opts.dt.sqrt();
    let pairs = problem.pairs();
    let h = grid.h();
    let max_pushes = 4 * grid.n() * d;

    let results: Vec<PathResult<T>> = (0..opts.paths)
        .into_par_iter()
        .map(|path| -> Result<PathResult<T>> {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(path as u64);
            let mut rho = [T::zero(); MAX_DIM];
            rho[..d].copy_from_slice(&start);
            let mut xi = [T::zero(); MAX_DIM];
            let (mut running, mut transfer, mut escapes) = (T::zero(), T::zero(), 0usize);
            for _ in 0..steps {
                for x in xi.iter_mut().take(d) {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *x = T::lit(z);
                }
                for i in 0..d {
                    let mut inc = T::zero();
                    for j in 0..d {
                        inc += problem.alpha_bar[(i, j)] * xi[j];
                    }
                    rho[i] += inc * sqrt_dt;
                }
                let mut escaped = false;
                let mut pushes = 0;
                loop {
                    let (node, clamped) = grid.nearest(&rho[..d]);
                    escaped |= clamped;
                    match sol.policy.actions[node] {
                        Action::Diffuse => break,
                        Action::Transfer(p) => {
                            for i in 0..d {
                                rho[i] += h * T::from_i64(pairs[p].step[i]).expect("small step");
                            }
                            transfer += pairs[p].lambda * h;
                        }
                        Action::Neumann(t) => {
                            let c = grid.coords(t);
                            rho[..d].copy_from_slice(&c);
                        }
                    }
                    pushes += 1;
                    if pushes > max_pushes {
                        return Err(Error::NonConvergence(escapes + 1));
                    }
                }
                escapes += usize::from(escaped);
                running += problem.running_cost(&rho[..d]) * opts.dt;
            }
            Ok(PathResult { running, transfer, escapes })
        })
        .collect::<Result<_>>()?;

    let escapes: usize = results.iter().map(|r| r.escapes).sum();
    if escapes * 100 > steps * opts.paths {
        return Err(Error::NonConvergence(escapes));
    }
    let time = T::from_usize_lossy(steps) * opts.dt;
    let per_path: Vec<T> = results.iter().map(|r| (r.running + r.transfer) / time).collect();
    let np = T::from_usize_lossy(per_path.len());
    let estimate = per_path.iter().copied().sum::<T>() / np;
    let stderr = if per_path.len() > 1 {
        let var = per_path.iter().map(|&c| (c - estimate) * (c - estimate)).sum::<T>() / (np - T::one());
        (var / np).sqrt()
    } else {
        T::zero()
    };
    let running = results.iter().map(|r| r.running).sum::<T>() / (time * np);
    let transfer = results.iter().map(|r| r.transfer).sum::<T>() / (time * np);
    Ok(McEstimate { estimate, stderr, running, transfer, escapes })
}
