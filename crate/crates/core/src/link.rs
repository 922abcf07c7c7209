//! On-off-keying link design when the transceiver distance is only known at
//! frame start.
//!
//! The per-bit received count is modeled as Gaussian: mean eta (noise only)
//! for a 0-bit, mean alpha_i p + eta and variance alpha_i p (1 - p) + eta
//! for a 1-bit, where p is the per-interval absorption probability at the
//! bit's release time. Later bits see a more uncertain distance, so their
//! error probability is worse; the designs below pick the detection
//! threshold, the per-bit release counts, and the frame duration.

use crate::channel::{absorption_probability, DistanceLaw, EnvParams};
use crate::error::{Error, Result};
use crate::numerics::optim::minimize_scalar_convex;
use crate::numerics::quad::{integrate, QuadratureSpec};
use crate::numerics::roots::{find_root, RootBracket};
use crate::numerics::special::erf;
use crate::stats::CirStatistics;

#[derive(Debug, Clone, Copy)]
pub struct McLinkConfig {
    pub env: EnvParams,
    /// Bits per frame.
    pub bits: usize,
    /// Bit interval, s.
    pub t_b: f64,
    /// Noise mean (= variance).
    pub eta: f64,
    /// Frame molecule budget A.
    pub budget: f64,
    /// Efficiency floor on the absorption probability.
    pub psi: f64,
    /// Required confidence that the floor is met.
    pub confidence: f64,
    pub quad: QuadratureSpec,
}

impl McLinkConfig {
    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.quad.validate()?;
        let ok = self.bits >= 1
            && self.t_b > 0.0
            && self.eta >= 0.0
            && self.budget >= self.bits as f64
            && self.psi > 0.0
            && self.psi < 1.0
            && self.confidence > 0.0
            && self.confidence < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("invalid link configuration".into()))
        }
    }

    /// Release time of bit `i` (1-based).
    pub fn bit_time(&self, i: usize) -> f64 {
        (i - 1) as f64 * self.t_b
    }
}

#[derive(Debug, Clone)]
pub struct McDesignResult {
    pub xi: f64,
    pub alphas: Vec<f64>,
    pub per_bit_ber: Vec<f64>,
    pub max_ber: f64,
}

/// How an optimal frame duration query resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameDuration {
    /// The confidence constraint binds at this duration.
    Bounded(f64),
    /// The floor already fails at frame start; no positive duration works.
    Unattainable,
    /// The constraint still holds at the search horizon.
    HorizonReached(f64),
}

fn zeta(xi: f64, eta: f64, alpha: f64, p: f64) -> f64 {
    let var = (alpha * p * (1.0 - p) + eta).max(1e-300);
    (xi - (alpha * p + eta)) / (2.0 * var).sqrt()
}

/// Absorption probability with the distance clamped to the receiver surface
/// below contact (certain absorption there).
fn p_of_r(env: &EnvParams, r: f64, t_b: f64) -> f64 {
    if r <= env.a_rx {
        1.0
    } else {
        absorption_probability(env, r, t_b).unwrap()
    }
}

/// Error probability of bit `i` (1-based) for threshold `xi` and release
/// count `alpha_i`: equal priors, false alarm against the noise-only
/// hypothesis plus the miss probability averaged over the random distance at
/// the bit's release time. The first bit sees the known initial distance.
pub fn bit_error_probability(
    cfg: &McLinkConfig,
    i: usize,
    xi: f64,
    alpha_i: f64,
) -> Result<f64> {
    cfg.validate()?;
    if i < 1 || i > cfg.bits {
        return Err(Error::Domain(format!("bit index {i} out of 1..={}", cfg.bits)));
    }
    if alpha_i < 0.0 {
        return Err(Error::Domain("alpha_i must be >= 0".into()));
    }
    if alpha_i == 0.0 {
        // signal indistinguishable from noise
        return Ok(0.5);
    }
    let eta = cfg.eta;
    let base = 0.5 - 0.25 * erf((xi - eta) / (2.0 * eta).sqrt());
    let t_i = cfg.bit_time(i);
    let miss_term = if t_i <= 0.0 || cfg.env.d2() <= 0.0 {
        let p = p_of_r(&cfg.env, cfg.env.r0, cfg.t_b);
        erf(zeta(xi, eta, alpha_i, p))
    } else {
        let law = DistanceLaw::new(cfg.env, t_i)?;
        let upper = law.mean() + cfg.quad.truncation_sigma * law.variance().sqrt();
        integrate(
            |r| {
                let p = p_of_r(&cfg.env, r, cfg.t_b);
                law.pdf(r).unwrap() * erf(zeta(xi, eta, alpha_i, p))
            },
            0.0,
            upper,
            &cfg.quad,
        )?
    };
    Ok(base + 0.25 * miss_term)
}

/// Mean received count of a 1-bit: alpha * E{p} + eta.
pub fn mean_bit_one(cfg: &McLinkConfig, i: usize, alpha_i: f64) -> Result<f64> {
    let t_i = cfg.bit_time(i);
    let e_p = if t_i <= 0.0 || cfg.env.d2() <= 0.0 {
        p_of_r(&cfg.env, cfg.env.r0, cfg.t_b)
    } else {
        let law = DistanceLaw::new(cfg.env, t_i)?;
        let upper = law.mean() + cfg.quad.truncation_sigma * law.variance().sqrt();
        integrate(
            |r| law.pdf(r).unwrap() * p_of_r(&cfg.env, r, cfg.t_b),
            0.0,
            upper,
            &cfg.quad,
        )?
    };
    Ok(alpha_i * e_p + cfg.eta)
}

/// Worst-bit error probability over the frame for a common threshold and
/// uniform release counts.
fn max_ber(cfg: &McLinkConfig, xi: f64, alphas: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 1..=cfg.bits {
        worst = worst.max(bit_error_probability(cfg, i, xi, alphas[i - 1])?);
    }
    Ok(worst)
}

/// Minimizes the worst-bit error probability over the threshold for the
/// uniform allocation A / I. The objective is a pointwise maximum of convex
/// functions on (eta, min_i mean-of-bit-1), hence unimodal there.
pub fn optimize_threshold_uniform(cfg: &McLinkConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let alpha = cfg.budget / cfg.bits as f64;
    let alphas = vec![alpha; cfg.bits];
    let mut upper = f64::INFINITY;
    for i in 1..=cfg.bits {
        upper = upper.min(mean_bit_one(cfg, i, alpha)?);
    }
    if upper <= cfg.eta {
        return Err(Error::Infeasible);
    }
    let lo = cfg.eta;
    let xi = minimize_scalar_convex(
        |xi| max_ber(cfg, xi, &alphas).unwrap(),
        lo,
        upper,
        (upper - lo).max(1e-12) * 1e-6,
        300,
    )?;
    Ok((xi, max_ber(cfg, xi, &alphas)?))
}

/// Splits the molecule budget so every bit achieves the same error
/// probability at the given threshold: each per-bit error is strictly
/// decreasing in its release count, so the common level is found by
/// bisection, inverting each bit monotonically, until the budget is met.
/// The result is quantized to whole molecules preserving the budget.
pub fn optimize_release(cfg: &McLinkConfig, xi: f64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let a_total = cfg.budget;
    let invert = |i: usize, level: f64| -> Result<Option<f64>> {
        // alpha with bit_error_probability(i, xi, alpha) == level, if
        // attainable within the whole budget
        let at_full = bit_error_probability(cfg, i, xi, a_total)?;
        if at_full > level {
            return Ok(None);
        }
        if at_full == level {
            return Ok(Some(a_total));
        }
        let g = |alpha: f64| bit_error_probability(cfg, i, xi, alpha).unwrap() - level;
        let root = find_root(g, RootBracket::new(0.0, a_total)?, a_total * 1e-10, 200)?;
        Ok(Some(root))
    };
    let mut lo = 0.0f64; // level too small: demands more than the budget
    let mut hi = 0.5f64; // level 1/2: zero molecules suffice
    for i in 1..=cfg.bits {
        let worst = bit_error_probability(cfg, i, xi, a_total)?;
        lo = lo.max(worst);
    }
    if lo >= hi {
        return Err(Error::Infeasible);
    }
    let budget_at = |level: f64| -> Result<Option<f64>> {
        let mut sum = 0.0;
        for i in 1..=cfg.bits {
            match invert(i, level)? {
                Some(a) => sum += a,
                None => return Ok(None),
            }
        }
        Ok(Some(sum))
    };
    let mut alphas = vec![a_total / cfg.bits as f64; cfg.bits];
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match budget_at(mid)? {
            Some(sum) if sum > a_total => lo = mid,
            _ => hi = mid,
        }
    }
    let level = hi;
    for i in 1..=cfg.bits {
        alphas[i - 1] = invert(i, level)?.unwrap_or(a_total);
    }
    // rescale the tiny bisection residue, then round preserving the budget
    let sum: f64 = alphas.iter().sum();
    if sum > 0.0 {
        let scale = a_total / sum;
        for a in alphas.iter_mut() {
            *a *= scale;
        }
    }
    Ok(round_preserving_sum(&alphas, a_total))
}

/// Largest-remainder rounding to integers with a fixed integer total.
fn round_preserving_sum(values: &[f64], total: f64) -> Vec<f64> {
    let mut out: Vec<f64> = values.iter().map(|v| v.floor()).collect();
    let assigned: f64 = out.iter().sum();
    let mut remainder = (total.round() - assigned) as i64;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = values[a] - values[a].floor();
        let fb = values[b] - values[b].floor();
        fb.total_cmp(&fa)
    });
    let mut idx = 0;
    while remainder > 0 && !order.is_empty() {
        out[order[idx % order.len()]] += 1.0;
        remainder -= 1;
        idx += 1;
    }
    while remainder < 0 && !order.is_empty() {
        let j = order[order.len() - 1 - (idx % order.len())];
        if out[j] > 0.0 {
            out[j] -= 1.0;
            remainder += 1;
        }
        idx += 1;
    }
    out
}

/// Probability that the absorption probability of a molecule released at
/// elapsed time `t` stays above the floor psi.
pub fn efficiency(cfg: &McLinkConfig, t: f64) -> Result<f64> {
    cfg.validate()?;
    if t <= 0.0 || cfg.env.d2() <= 0.0 {
        let p0 = p_of_r(&cfg.env, cfg.env.r0, cfg.t_b);
        return Ok(if p0 > cfg.psi { 1.0 } else { 0.0 });
    }
    let stats = CirStatistics::new(cfg.env, cfg.quad)?;
    Ok(1.0 - stats.absorption_prob_cdf(t, cfg.t_b, cfg.psi)?)
}

/// Largest frame duration such that, with the configured confidence, the
/// last bit's molecules are still absorbed with probability above the floor.
/// The efficiency is decreasing in elapsed time (when the floor is met at
/// the known initial distance), so the binding time is found by bracketed
/// root finding; the duration adds one bit interval for the final bit.
pub fn optimal_frame_duration(cfg: &McLinkConfig, horizon: f64) -> Result<FrameDuration> {
    cfg.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::Domain("horizon must be > 0".into()));
    }
    let p0 = p_of_r(&cfg.env, cfg.env.r0, cfg.t_b);
    if p0 <= cfg.psi {
        return Ok(FrameDuration::Unattainable);
    }
    if cfg.env.d2() <= 0.0 || efficiency(cfg, horizon)? >= cfg.confidence {
        return Ok(FrameDuration::HorizonReached(horizon + cfg.t_b));
    }
    // expand the lower end until the efficiency clears the confidence
    let mut lo = horizon * 1e-9;
    while efficiency(cfg, lo)? < cfg.confidence {
        lo *= 0.1;
        if lo < 1e-18 * horizon {
            return Ok(FrameDuration::Unattainable);
        }
    }
    let g = |t: f64| efficiency(cfg, t).unwrap() - cfg.confidence;
    let t = find_root(g, RootBracket::new(lo, horizon)?, horizon * 1e-10, 200)?;
    Ok(FrameDuration::Bounded(t + cfg.t_b))
}

/// Table of Pr(absorption probability > psi) for several floors over a time
/// grid; one row per floor.
pub fn efficiency_curve(
    cfg: &McLinkConfig,
    psi_list: &[f64],
    t_grid: &[f64],
) -> Result<Vec<Vec<f64>>> {
    cfg.validate()?;
    psi_list
        .iter()
        .map(|&psi| {
            let c = McLinkConfig { psi, ..*cfg };
            t_grid.iter().map(|&t| efficiency(&c, t)).collect()
        })
        .collect()
}
