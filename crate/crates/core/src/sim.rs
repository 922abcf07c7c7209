//! Reference Monte Carlo simulators for the random transceiver distance and
//! everything derived from it.
//!
//! Two modes: a particle-based random walk with a reflection rule (the moving
//! entity reverts to its pre-step position when the spheres would overlap),
//! and a direct Gaussian-displacement sampler that draws positions at the
//! requested times exactly. The walk costs one step per `step` of simulated
//! time; the sampler is O(1) per requested time and is the default for long
//! horizons, where reflection is negligible anyway.
//!
//! Determinism: realization k always uses stream k of a counter-based
//! generator seeded with the configured seed, so results are bit-identical
//! regardless of how realizations are scheduled across threads.

use crate::channel::{cir, EnvParams};
use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    /// Discrete-time random walk; overlapping moves are reverted.
    ParticleWithReflection,
    /// Positions drawn directly from the free-space displacement law.
    GaussianDisplacement,
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    /// Walk step duration, s.
    pub step: f64,
    /// Simulated horizon, s.
    pub horizon: f64,
    pub realizations: usize,
    pub seed: u64,
    pub mode: SimMode,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !(self.horizon >= self.step) || self.realizations < 1 {
            return Err(Error::Domain(format!("invalid simulation config: {self:?}")));
        }
        Ok(())
    }
}

/// One realization of the distance process sampled on the step grid.
#[derive(Debug, Clone)]
pub struct DistanceTrajectory {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
}

fn rng_for(seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rng
}

fn norm(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn gaussian_step(rng: &mut ChaCha8Rng, std: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for v in out.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v = std * z;
    }
    out
}

/// Initial positions: transmitter at the origin, receiver offset by r0 along
/// the diagonal (r0 / sqrt(3) per coordinate).
fn initial_positions(env: &EnvParams) -> ([f64; 3], [f64; 3]) {
    let c = env.r0 / 3.0f64.sqrt();
    ([0.0; 3], [c; 3])
}

/// Distances of one realization at the (sorted, increasing) `times`,
/// respecting the joint law across times: both modes advance positions by
/// independent Gaussian increments between consecutive requested times; the
/// walk additionally enforces the reflection rule at every step.
fn distance_path(env: &EnvParams, cfg: &SimConfig, times: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (mut tx, mut rx) = initial_positions(env);
    let contact = env.a_tx + env.a_rx;
    let mut out = Vec::with_capacity(times.len());
    let mut now = 0.0f64;
    for &t in times {
        match cfg.mode {
            SimMode::GaussianDisplacement => {
                let dt = t - now;
                if dt > 0.0 {
                    let stx = (2.0 * env.d_tx * dt).sqrt();
                    let srx = (2.0 * env.d_rx * dt).sqrt();
                    let dtx = gaussian_step(rng, stx);
                    let drx = gaussian_step(rng, srx);
                    for j in 0..3 {
                        tx[j] += dtx[j];
                        rx[j] += drx[j];
                    }
                }
            }
            SimMode::ParticleWithReflection => {
                let stx = (2.0 * env.d_tx * cfg.step).sqrt();
                let srx = (2.0 * env.d_rx * cfg.step).sqrt();
                while now + cfg.step * 0.5 < t {
                    let dtx = gaussian_step(rng, stx);
                    let cand_tx = [tx[0] + dtx[0], tx[1] + dtx[1], tx[2] + dtx[2]];
                    // transmitter moves first, then the receiver
                    let d = [
                        cand_tx[0] - rx[0],
                        cand_tx[1] - rx[1],
                        cand_tx[2] - rx[2],
                    ];
                    if norm(d) >= contact {
                        tx = cand_tx;
                    }
                    if env.d_rx > 0.0 {
                        let drx = gaussian_step(rng, srx);
                        let cand_rx = [rx[0] + drx[0], rx[1] + drx[1], rx[2] + drx[2]];
                        let d = [
                            cand_rx[0] - tx[0],
                            cand_rx[1] - tx[1],
                            cand_rx[2] - tx[2],
                        ];
                        if norm(d) >= contact {
                            rx = cand_rx;
                        }
                    }
                    now += cfg.step;
                }
            }
        }
        now = t;
        let d = [rx[0] - tx[0], rx[1] - tx[1], rx[2] - tx[2]];
        out.push(norm(d));
    }
    out
}

/// One full trajectory on the step grid up to the horizon (realization 0 of
/// the configured seed).
pub fn simulate_distance(env: &EnvParams, cfg: &SimConfig) -> Result<DistanceTrajectory> {
    env.validate()?;
    cfg.validate()?;
    let n = (cfg.horizon / cfg.step).round() as usize;
    let times: Vec<f64> = (1..=n).map(|k| k as f64 * cfg.step).collect();
    let mut rng = rng_for(cfg.seed, 0);
    let distances = distance_path(env, cfg, &times, &mut rng);
    Ok(DistanceTrajectory { times, distances })
}

/// Independent draws of the distance at a single elapsed time, one per
/// realization.
pub fn sample_distances(env: &EnvParams, cfg: &SimConfig, t: f64) -> Result<Vec<f64>> {
    env.validate()?;
    cfg.validate()?;
    if t < 0.0 {
        return Err(Error::Domain("t must be >= 0".into()));
    }
    Ok((0..cfg.realizations)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(cfg.seed, k as u64);
            distance_path(env, cfg, &[t], &mut rng)[0]
        })
        .collect())
}

/// Per-delay Monte Carlo mean and variance of the impulse response at
/// elapsed time `t`: every realization draws one distance and evaluates the
/// conditional response on the whole delay grid.
pub fn monte_carlo_cir_stats(
    env: &EnvParams,
    cfg: &SimConfig,
    t: f64,
    tau_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let draws = sample_distances(env, cfg, t)?;
    let nt = tau_grid.len();
    let (sum, sumsq) = draws
        .par_iter()
        .map(|&r| {
            let r = r.max(env.a_rx);
            let mut s = vec![0.0f64; nt];
            let mut s2 = vec![0.0f64; nt];
            for (j, &tau) in tau_grid.iter().enumerate() {
                let h = cir(env, r, tau).unwrap();
                s[j] = h;
                s2[j] = h * h;
            }
            (s, s2)
        })
        .reduce(
            || (vec![0.0; nt], vec![0.0; nt]),
            |(mut a, mut a2), (b, b2)| {
                for j in 0..nt {
                    a[j] += b[j];
                    a2[j] += b2[j];
                }
                (a, a2)
            },
        );
    let n = cfg.realizations as f64;
    Ok((0..nt)
        .map(|j| {
            let m = sum[j] / n;
            (m, (sumsq[j] / n - m * m).max(0.0))
        })
        .collect())
}

/// Monte Carlo draws of the impulse response itself at one (t, tau) point,
/// for empirical-distribution comparisons.
pub fn monte_carlo_cir_samples(
    env: &EnvParams,
    cfg: &SimConfig,
    t: f64,
    tau: f64,
) -> Result<Vec<f64>> {
    let draws = sample_distances(env, cfg, t)?;
    Ok(draws
        .into_iter()
        .map(|r| cir(env, r.max(env.a_rx), tau).unwrap())
        .collect())
}

/// Empirical exceedance results for a superposition of releases.
#[derive(Debug, Clone)]
pub struct AbsorptionMc {
    pub eval_times: Vec<f64>,
    /// Sample mean of the total absorption rate at each evaluation time.
    pub mean_g: Vec<f64>,
    /// Fraction of realizations with total rate >= the target at each time.
    pub exceed: Vec<f64>,
}

/// Simulates the total absorption rate g(t) = sum_i alpha_i h(t_i, t - t_i)
/// for releases at `release_times` with `alphas` molecules each, drawing the
/// distances at the release times along one joint trajectory per
/// realization, and estimates Pr(g(t) >= theta(t)) on the evaluation grid.
pub fn monte_carlo_absorption(
    env: &EnvParams,
    cfg: &SimConfig,
    release_times: &[f64],
    alphas: &[f64],
    eval_grid: &[f64],
    theta: &[f64],
) -> Result<AbsorptionMc> {
    env.validate()?;
    cfg.validate()?;
    if release_times.len() != alphas.len() {
        return Err(Error::Domain(
            "release_times and alphas must have equal length".into(),
        ));
    }
    if eval_grid.len() != theta.len() {
        return Err(Error::Domain("eval_grid and theta must have equal length".into()));
    }
    let ne = eval_grid.len();
    let (sum_g, count) = (0..cfg.realizations)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(cfg.seed, k as u64);
            let r_at_release = distance_path(env, cfg, release_times, &mut rng);
            let mut g = vec![0.0f64; ne];
            for (j, &te) in eval_grid.iter().enumerate() {
                let mut acc = 0.0;
                for (i, &ti) in release_times.iter().enumerate() {
                    if ti < te && alphas[i] != 0.0 {
                        let r = r_at_release[i].max(env.a_rx);
                        acc += alphas[i] * cir(env, r, te - ti).unwrap();
                    }
                }
                g[j] = acc;
            }
            let hits: Vec<f64> = g
                .iter()
                .zip(theta.iter())
                .map(|(&gv, &th)| if gv >= th { 1.0 } else { 0.0 })
                .collect();
            (g, hits)
        })
        .reduce(
            || (vec![0.0; ne], vec![0.0; ne]),
            |(mut a, mut c), (b, d)| {
                for j in 0..ne {
                    a[j] += b[j];
                    c[j] += d[j];
                }
                (a, c)
            },
        );
    let n = cfg.realizations as f64;
    Ok(AbsorptionMc {
        eval_times: eval_grid.to_vec(),
        mean_g: sum_g.into_iter().map(|s| s / n).collect(),
        exceed: count.into_iter().map(|c| c / n).collect(),
    })
}
