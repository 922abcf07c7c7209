//! Minimum-dose release scheduling: choose how many molecules to release at
//! each instant so the expected absorption rate, discounted by a safety
//! multiple of its standard deviation, stays above a therapeutic target at
//! every constraint instant.
//!
//! The constraint uses the triangle-inequality bound on the standard
//! deviation of the summed rate, which makes it linear in the release counts
//! and the design a linear program. When the constraint instants coincide
//! with the release grid the constraint matrix is lower triangular with a
//! positive diagonal, and the all-tight solution from forward substitution
//! is optimal whenever it and its dual certificate are nonnegative; the
//! simplex solver remains as the general fallback.

use crate::channel::{cir_peak, EnvParams};
use crate::error::{Error, Result};
use crate::numerics::lp::{solve as solve_lp, LpProblem};
use crate::numerics::quad::QuadratureSpec;
use crate::stats::CirStatistics;
use rayon::prelude::*;

/// Release instants and molecule counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ReleaseSchedule {
    pub times: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl ReleaseSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.alphas.len() {
            return Err(Error::Domain("times and alphas must have equal length".into()));
        }
        if self.alphas.iter().any(|&a| a < 0.0 || !a.is_finite()) {
            return Err(Error::Domain("alphas must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.alphas.iter().sum()
    }
}

/// Design input: `releases` instants spread uniformly over the window
/// (t_i = (i-1) window / releases), `constraints` instants over the
/// constraint window (t_n = n constraint_window / constraints), a deviation
/// weight `beta`, and the target rate sampled at the constraint instants.
#[derive(Debug, Clone)]
pub struct DrugDesignProblem {
    pub env: EnvParams,
    /// Release window T, s.
    pub window: f64,
    /// Constraint window, s.
    pub constraint_window: f64,
    /// Number of release instants I.
    pub releases: usize,
    /// Number of constraint instants N.
    pub constraints: usize,
    /// Deviation weight in the mean - beta * std constraint.
    pub beta: f64,
    /// Target rate at each constraint instant, 1/s.
    pub theta: Vec<f64>,
    pub quad: QuadratureSpec,
}

impl DrugDesignProblem {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.quad.validate()?;
        let ok = self.releases >= 1
            && self.constraints >= 1
            && self.beta >= 0.0
            && self.window > 0.0
            && self.constraint_window > 0.0
            && self.theta.len() == self.constraints
            && self.theta.iter().all(|&th| th >= 0.0 && th.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("invalid drug design problem".into()))
        }
    }

    /// Spacing between release instants.
    pub fn t_b(&self) -> f64 {
        self.window / self.releases as f64
    }

    pub fn release_times(&self) -> Vec<f64> {
        let tb = self.t_b();
        (0..self.releases).map(|i| i as f64 * tb).collect()
    }

    pub fn constraint_times(&self) -> Vec<f64> {
        let dt = self.constraint_window / self.constraints as f64;
        (1..=self.constraints).map(|n| n as f64 * dt).collect()
    }
}

/// Designed schedule plus the certification metadata of the underlying LP.
#[derive(Debug, Clone)]
pub struct DrugDesignResult {
    /// Integer molecule counts per release instant.
    pub alphas: Vec<f64>,
    /// Total dose after quantization.
    pub total: f64,
    /// LP objective before quantization.
    pub lp_objective: f64,
    pub feasible: bool,
}

/// Constraint coefficients: entry (n, i) is mean - beta * std of the rate
/// contributed at constraint instant n by one molecule released at instant
/// i, zero when the release is not yet in the past.
pub fn build_constraint_matrix(problem: &DrugDesignProblem) -> Result<Vec<Vec<f64>>> {
    problem.validate()?;
    let stats = CirStatistics::new(problem.env, problem.quad)?;
    let release_times = problem.release_times();
    let constraint_times = problem.constraint_times();
    constraint_times
        .par_iter()
        .map(|&tn| {
            release_times
                .iter()
                .map(|&ti| {
                    if ti < tn {
                        let tau = tn - ti;
                        // releases at t=0 see the deterministic initial distance
                        let m = stats.cir_mean(ti, tau)?;
                        if problem.beta == 0.0 {
                            Ok(m)
                        } else {
                            let sd = stats.cir_variance(ti, tau)?.sqrt();
                            Ok(m - problem.beta * sd)
                        }
                    } else {
                        Ok(0.0)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Forward/backward substitution on a square lower-triangular system with
/// positive diagonal. Returns primal and dual iff both are nonnegative (the
/// optimality certificate for an all-ones objective).
fn try_triangular(matrix: &[Vec<f64>], rhs: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = rhs.len();
    if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
        return None;
    }
    for (i, row) in matrix.iter().enumerate() {
        if row[i] <= 0.0 || row[i + 1..].iter().any(|&v| v != 0.0) {
            return None;
        }
    }
    let mut x = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[i];
        for j in 0..i {
            s -= matrix[i][j] * x[j];
        }
        x[i] = s / matrix[i][i];
        if x[i] < 0.0 {
            if x[i] > -1e-9 * rhs[i].abs().max(1.0) {
                x[i] = 0.0;
            } else {
                return None;
            }
        }
    }
    // duals: M^T y = 1
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = 1.0;
        for j in i + 1..n {
            s -= matrix[j][i] * y[j];
        }
        y[i] = s / matrix[i][i];
        if y[i] < 0.0 {
            if y[i] > -1e-9 {
                y[i] = 0.0;
            } else {
                return None;
            }
        }
    }
    Some((x, y))
}

/// Solves the design LP and quantizes to whole molecules. Infeasibility is
/// reported through the `feasible` flag, not as an error.
pub fn design_release(problem: &DrugDesignProblem) -> Result<DrugDesignResult> {
    let matrix = build_constraint_matrix(problem)?;
    let real = if let Some((x, _)) = try_triangular(&matrix, &problem.theta) {
        x
    } else {
        let lp = LpProblem {
            c: vec![1.0; problem.releases],
            a: matrix,
            b: problem.theta.clone(),
        };
        match solve_lp(&lp) {
            Ok(sol) => sol.x,
            Err(Error::Infeasible) => {
                return Ok(DrugDesignResult {
                    alphas: vec![],
                    total: 0.0,
                    lp_objective: 0.0,
                    feasible: false,
                })
            }
            Err(e) => return Err(e),
        }
    };
    let lp_objective: f64 = real.iter().sum();
    let alphas: Vec<f64> = real.iter().map(|&a| a.round().max(0.0)).collect();
    let total = alphas.iter().sum();
    Ok(DrugDesignResult {
        alphas,
        total,
        lp_objective,
        feasible: true,
    })
}

/// Expected total absorption rate at `t` and the triangle-inequality upper
/// bound on its standard deviation.
pub fn absorption_rate_moments(
    env: &EnvParams,
    quad: &QuadratureSpec,
    schedule: &ReleaseSchedule,
    t: f64,
) -> Result<(f64, f64)> {
    schedule.validate()?;
    let stats = CirStatistics::new(*env, *quad)?;
    let mut mean = 0.0;
    let mut dev = 0.0;
    for (&ti, &alpha) in schedule.times.iter().zip(schedule.alphas.iter()) {
        if ti < t && alpha > 0.0 {
            let tau = t - ti;
            mean += alpha * stats.cir_mean(ti, tau)?;
            dev += alpha * stats.cir_variance(ti, tau)?.sqrt();
        }
    }
    Ok((mean, dev))
}

/// Probability that the summed absorption rate at time `t` reaches the
/// target `theta`, treating per-release contributions as independent (the
/// analytic metric of the design).
///
/// Each contribution is discretized into probability masses on a common
/// value grid over [0, theta] with one absorbing overflow cell at the top;
/// masses come from CDF differences so the diverging density at each
/// release's peak rate is handled exactly. Convolution splits each summed
/// mass between the two neighboring cells, which keeps the discretization
/// unbiased in the mean.
pub fn exceedance_probability(
    env: &EnvParams,
    quad: &QuadratureSpec,
    schedule: &ReleaseSchedule,
    theta: f64,
    t: f64,
    grid_resolution: usize,
) -> Result<f64> {
    schedule.validate()?;
    if grid_resolution < 2 {
        return Err(Error::Domain("grid_resolution must be >= 2".into()));
    }
    if theta <= 0.0 {
        return Ok(1.0);
    }
    let stats = CirStatistics::new(*env, *quad)?;
    // active contributions and their maximum rates
    let mut active: Vec<(f64, f64, f64, f64)> = Vec::new(); // (ti, tau, alpha, cap)
    let mut max_total = 0.0;
    for (&ti, &alpha) in schedule.times.iter().zip(schedule.alphas.iter()) {
        if ti < t && alpha > 0.0 {
            let tau = t - ti;
            let (_, h_star) = cir_peak(env, tau)?;
            let cap = alpha * h_star;
            max_total += cap;
            active.push((ti, tau, alpha, cap));
        }
    }
    if active.is_empty() || max_total < theta {
        return Ok(0.0);
    }
    let g = grid_resolution;
    let delta = theta / g as f64;
    // contributions too small to move the sum by a cell are dropped
    let floor = delta * 1e-3 / active.len().max(1) as f64;
    active.retain(|&(_, _, _, cap)| cap >= floor);

    // dist[k] = mass near value (k + 0.5) delta, dist[g] = mass >= theta
    let mut dist = vec![0.0f64; g + 1];
    dist[0] = 1.0;
    for &(ti, tau, alpha, cap) in &active {
        let kmax = ((cap / delta).floor() as usize).min(g - 1);
        let mut mass = vec![0.0f64; kmax + 2];
        if ti <= 0.0 || env.d2() <= 0.0 {
            // deterministic distance at this release: a point contribution,
            // spread over the two neighboring midpoint cells to keep the
            // mean exact
            let v = alpha * crate::channel::cir(env, env.r0, tau)?;
            if v >= theta {
                mass[kmax + 1] = 1.0;
            } else {
                let pos = (v / delta - 0.5).max(0.0);
                let k = (pos.floor() as usize).min(kmax);
                let frac = (pos - k as f64).clamp(0.0, 1.0);
                mass[k] += 1.0 - frac;
                mass[(k + 1).min(kmax + 1)] += frac;
            }
        } else {
            let cdf = |x: f64| -> Result<f64> { stats.cir_cdf(ti, tau, x / alpha) };
            let mut below = 0.0;
            for (k, m) in mass.iter_mut().enumerate().take(kmax + 1) {
                let hi = cdf((k + 1) as f64 * delta)?;
                *m = (hi - below).max(0.0);
                below = hi;
            }
            mass[kmax + 1] = (1.0 - below).max(0.0); // overflow of this release
        }
        let mut next = vec![0.0f64; g + 1];
        for (j, &dj) in dist.iter().enumerate() {
            if dj == 0.0 {
                continue;
            }
            if j == g {
                next[g] += dj;
                continue;
            }
            for (k, &mk) in mass.iter().enumerate() {
                if mk == 0.0 {
                    continue;
                }
                let idx = j + k;
                if k == kmax + 1 && kmax == g - 1 {
                    // tail cell of a release whose peak rate reaches the
                    // target on its own: mass at or beyond theta
                    next[g] += dj * mk;
                } else if idx >= g {
                    next[g] += dj * mk;
                } else {
                    // midpoint sum lands on a cell edge: split
                    next[idx] += 0.5 * dj * mk;
                    if idx + 1 >= g {
                        next[g] += 0.5 * dj * mk;
                    } else {
                        next[idx + 1] += 0.5 * dj * mk;
                    }
                }
            }
        }
        dist = next;
    }
    Ok(dist[g].clamp(0.0, 1.0))
}

/// Guaranteed floor on the exceedance probability when the design constraint
/// holds with deviation weight `beta`; informative only for beta > 1.
pub fn chebyshev_lower_bound(beta: f64) -> f64 {
    if beta <= 1.0 {
        0.0
    } else {
        1.0 - 1.0 / (beta * beta)
    }
}
