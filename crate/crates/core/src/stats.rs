//! Stochastic characterization of the time-variant impulse response and of
//! the per-interval absorption probability, induced by the random
//! transmitter-receiver distance.
//!
//! The mean admits a closed form; the second moment requires quadrature of a
//! Gaussian-type integrand containing a 1/r piece with no antiderivative.
//! The PDF and CDF follow from inverting the conditional impulse response,
//! which rises from zero at contact to a single maximum `h_star` and decays
//! beyond it, so every level 0 <= h < h_star has exactly two preimages.

use crate::channel::{
    absorption_probability, absorption_probability_derivative, cir, cir_peak, DistanceLaw,
    EnvParams,
};
use crate::error::{Error, Result};
use crate::numerics::quad::{integrate, QuadratureSpec};
use crate::numerics::roots::{find_root, RootBracket};
use crate::numerics::special::erfcx;

const PI: f64 = std::f64::consts::PI;

/// Analytic moment and distribution evaluators bound to one environment.
#[derive(Debug, Clone, Copy)]
pub struct CirStatistics {
    pub env: EnvParams,
    pub quad: QuadratureSpec,
}

/// exp(pre) * exp(s^2) * erfc(s), evaluated without overflow.
///
/// `safe_exponent` must equal pre + s^2 (supplied in a cancellation-free
/// form by the caller); it is <= 0 for all inputs arising here.
fn scaled_erfc_term(s: f64, pre: f64, safe_exponent: f64) -> f64 {
    if s >= 0.0 {
        pre.exp() * erfcx(s)
    } else {
        // erfc(s) = 2 - erfc(-s)
        2.0 * safe_exponent.exp() - pre.exp() * erfcx(-s)
    }
}

impl CirStatistics {
    pub fn new(env: EnvParams, quad: QuadratureSpec) -> Result<Self> {
        env.validate()?;
        quad.validate()?;
        Ok(Self { env, quad })
    }

    /// Mean impulse response at elapsed time `t` and delay `tau`.
    ///
    /// Closed form obtained by integrating the conditional response against
    /// the distance density; rewritten through the scaled complementary
    /// error function so the e^{s^2} factors never overflow (their exponents
    /// combine to -(r0 -+ a)^2 / (4 (d1 tau + d2 t)) <= 0).
    pub fn cir_mean(&self, t: f64, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Ok(0.0);
        }
        let d2t = self.env.d2() * t;
        if d2t <= 0.0 {
            // degenerate distance law: the response is deterministic
            return cir(&self.env, self.env.r0, tau);
        }
        let a = self.env.a_rx;
        let r0 = self.env.r0;
        let d1t = self.env.d1() * tau;
        let u = 0.25 / d1t + 0.25 / d2t;
        let v = -a / (2.0 * d1t) - r0 / (2.0 * d2t);
        let w = -a / (2.0 * d1t) + r0 / (2.0 * d2t);
        let pre = -a * a / (4.0 * d1t) - r0 * r0 / (4.0 * d2t);
        let su = u.sqrt();
        let sum_d = d1t + d2t;
        let exp_v = -(r0 - a) * (r0 - a) / (4.0 * sum_d);
        let exp_w = -(r0 + a) * (r0 + a) / (4.0 * sum_d);
        let term_v = scaled_erfc_term(v / (2.0 * su), pre, exp_v);
        let term_w = scaled_erfc_term(w / (2.0 * su), pre, exp_w);
        let amp = a / (4.0 * (PI * sum_d).sqrt() * r0 * tau);
        let m = amp * (-(v / (2.0 * u) + a) * term_v + (w / (2.0 * u) + a) * term_w);
        Ok(m.max(0.0))
    }

    /// Second moment E{h^2} at elapsed time `t` and delay `tau`, by adaptive
    /// quadrature. The prefactor's exponential is folded into the integrand
    /// so nothing underflows prematurely.
    pub fn cir_second_moment(&self, t: f64, tau: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Ok(0.0);
        }
        let d2t = self.env.d2() * t;
        if d2t <= 0.0 {
            let h = cir(&self.env, self.env.r0, tau)?;
            return Ok(h * h);
        }
        let a = self.env.a_rx;
        let r0 = self.env.r0;
        let d1t = self.env.d1() * tau;
        let coeff = a * a / (8.0 * self.env.d1() * PI * tau.powi(3) * r0 * (PI * d2t).sqrt());
        let k = a * a / (2.0 * d1t) + r0 * r0 / (4.0 * d2t);
        let u_hat = 0.5 / d1t + 0.25 / d2t;
        let v_hat = -a / d1t - r0 / (2.0 * d2t);
        let w_hat = -a / d1t + r0 / (2.0 * d2t);
        let law = DistanceLaw::new(self.env, t)?;
        let upper = law.mean() + self.quad.truncation_sigma * law.variance().sqrt();
        let integrand = |r: f64| {
            if r <= 0.0 {
                return 0.0;
            }
            let quad_term = -u_hat * r * r - k;
            let diff = (quad_term - v_hat * r).exp() - (quad_term - w_hat * r).exp();
            diff * (r - 2.0 * a + a * a / r)
        };
        let phi = coeff * integrate(integrand, 0.0, upper, &self.quad)?;
        Ok(phi.max(0.0))
    }

    /// Variance of the impulse response; clamped at zero against quadrature
    /// noise in the moment subtraction.
    pub fn cir_variance(&self, t: f64, tau: f64) -> Result<f64> {
        let m = self.cir_mean(t, tau)?;
        let phi = self.cir_second_moment(t, tau)?;
        Ok((phi - m * m).max(0.0))
    }

    /// Radial derivative of the conditional response, tolerating r == a_rx
    /// (limit value) for the level-zero inversion.
    fn hprime(&self, r: f64, tau: f64) -> f64 {
        let a = self.env.a_rx;
        let d1t = self.env.d1() * tau;
        let amp = a / (4.0 * PI * self.env.d1() * tau.powi(3)).sqrt();
        let gap = r - a;
        let gauss = (-gap * gap / (4.0 * d1t)).exp();
        amp * gauss * (a / (r * r) - (1.0 - a / r) * gap / (2.0 * d1t))
    }

    /// Both preimages of the level h of the conditional response: the lower
    /// one in [a_rx, r_star], the upper one in (r_star, r_max) or `None`
    /// when it lies beyond the truncation radius (negligible mass there).
    fn invert_level(&self, t: f64, tau: f64, h: f64) -> Result<(f64, Option<f64>)> {
        let (r_star, h_star) = cir_peak(&self.env, tau)?;
        debug_assert!(h < h_star);
        let a = self.env.a_rx;
        let r1 = if h == 0.0 {
            a
        } else {
            let g = |r: f64| cir(&self.env, r, tau).unwrap() - h;
            find_root(g, RootBracket::new(a, r_star)?, r_star * 1e-14, 200)?
        };
        let law = DistanceLaw::new(self.env, t)?;
        let r_max = law.mean() + self.quad.truncation_sigma * law.variance().sqrt();
        let r2 = if r_max <= r_star || cir(&self.env, r_max, tau)? >= h {
            None
        } else {
            let g = |r: f64| cir(&self.env, r, tau).unwrap() - h;
            Some(find_root(
                g,
                RootBracket::new(r_star, r_max)?,
                r_max * 1e-14,
                200,
            )?)
        };
        Ok((r1, r2))
    }

    /// Density of the impulse response at level `h`. Returns positive
    /// infinity at the support endpoint h_star, where the density diverges
    /// (the spike carries zero probability mass); zero outside [0, h_star].
    pub fn cir_pdf(&self, t: f64, tau: f64, h: f64) -> Result<f64> {
        self.require_random(t, tau)?;
        let (_, h_star) = cir_peak(&self.env, tau)?;
        if h < 0.0 || h > h_star {
            return Ok(0.0);
        }
        if h == h_star {
            return Ok(f64::INFINITY);
        }
        let law = DistanceLaw::new(self.env, t)?;
        let (r1, r2) = self.invert_level(t, tau, h)?;
        let mut f = law.pdf(r1)? / self.hprime(r1, tau);
        if let Some(r2) = r2 {
            // derivative negative on the falling branch
            f -= law.pdf(r2)? / self.hprime(r2, tau);
        }
        Ok(f.max(0.0))
    }

    /// Cumulative distribution of the impulse response at level `h`.
    pub fn cir_cdf(&self, t: f64, tau: f64, h: f64) -> Result<f64> {
        self.require_random(t, tau)?;
        let (_, h_star) = cir_peak(&self.env, tau)?;
        if h < 0.0 {
            return Ok(0.0);
        }
        if h >= h_star {
            return Ok(1.0);
        }
        let law = DistanceLaw::new(self.env, t)?;
        let (r1, r2) = self.invert_level(t, tau, h)?;
        let upper_tail = match r2 {
            Some(r2) => 1.0 - law.cdf(r2)?,
            None => 0.0,
        };
        Ok((law.cdf(r1)? + upper_tail).clamp(0.0, 1.0))
    }

    fn require_random(&self, t: f64, tau: f64) -> Result<()> {
        if t <= 0.0 || tau <= 0.0 {
            return Err(Error::Domain(format!(
                "distribution requires t > 0 and tau > 0, got t={t}, tau={tau}"
            )));
        }
        if self.env.d2() <= 0.0 {
            return Err(Error::Domain(
                "distribution is a point mass for a static transceiver pair".into(),
            ));
        }
        Ok(())
    }

    /// Distance at which the per-interval absorption probability equals `p`;
    /// unique because the probability is strictly decreasing in distance.
    pub fn distance_at_absorption(&self, t_b: f64, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("p={p} must lie in (0,1)")));
        }
        let a = self.env.a_rx;
        let mut hi = 2.0 * a;
        while absorption_probability(&self.env, hi, t_b)? > p {
            hi *= 2.0;
            if hi > 1e12 * a {
                return Err(Error::NonConvergence(
                    "absorption level bracket expansion failed".into(),
                ));
            }
        }
        let g = |r: f64| absorption_probability(&self.env, r, t_b).unwrap() - p;
        find_root(g, RootBracket::new(a, hi)?, a * 1e-13, 200)
    }

    /// Density of the per-interval absorption probability at level `p`.
    pub fn absorption_prob_pdf(&self, t: f64, t_b: f64, p: f64) -> Result<f64> {
        self.require_random(t, t_b)?;
        let r = self.distance_at_absorption(t_b, p)?;
        let law = DistanceLaw::new(self.env, t)?;
        let dp = absorption_probability_derivative(&self.env, r, t_b)?;
        Ok(-law.pdf(r)? / dp)
    }

    /// Cumulative distribution of the per-interval absorption probability.
    pub fn absorption_prob_cdf(&self, t: f64, t_b: f64, p: f64) -> Result<f64> {
        self.require_random(t, t_b)?;
        let r = self.distance_at_absorption(t_b, p)?;
        let law = DistanceLaw::new(self.env, t)?;
        Ok((1.0 - law.cdf(r)?).clamp(0.0, 1.0))
    }
}
