//! Channel physics for a point-release transmitter and a fully absorbing
//! spherical receiver diffusing relative to each other.
//!
//! Two effective diffusion coefficients govern the system: `d1` for the
//! molecule-receiver relative motion (absorption physics at fixed distance)
//! and `d2` for the transmitter-receiver relative motion (the random distance
//! process). Conditioned on the center distance `r`, the impulse response is
//! the classical first-hitting rate of a diffusing molecule on an absorbing
//! sphere; the distance itself follows a noncentral chi law with three
//! degrees of freedom.

use crate::error::{Error, Result};
use crate::numerics::special::{erf, erfc, marcum_q_3_2};

const PI: f64 = std::f64::consts::PI;

/// Physical scenario: diffusion coefficients of transmitter, receiver, and
/// signaling molecules, the two radii, and the initial center distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvParams {
    /// Transmitter diffusion coefficient, m^2/s.
    pub d_tx: f64,
    /// Receiver diffusion coefficient, m^2/s.
    pub d_rx: f64,
    /// Signaling-molecule diffusion coefficient, m^2/s.
    pub d_x: f64,
    /// Transmitter radius, m.
    pub a_tx: f64,
    /// Receiver radius, m.
    pub a_rx: f64,
    /// Initial center-to-center distance, m.
    pub r0: f64,
}

impl EnvParams {
    pub fn new(d_tx: f64, d_rx: f64, d_x: f64, a_tx: f64, a_rx: f64, r0: f64) -> Result<Self> {
        let p = Self {
            d_tx,
            d_rx,
            d_x,
            a_tx,
            a_rx,
            r0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.d_tx >= 0.0
            && self.d_rx >= 0.0
            && self.d_x > 0.0
            && self.a_tx > 0.0
            && self.a_rx > 0.0
            && self.r0 >= self.a_tx + self.a_rx
            && [self.d_tx, self.d_rx, self.d_x, self.a_tx, self.a_rx, self.r0]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid environment parameters: {self:?}")))
        }
    }

    /// Effective molecule-receiver diffusion coefficient.
    pub fn d1(&self) -> f64 {
        self.d_x + self.d_rx
    }

    /// Effective transmitter-receiver diffusion coefficient.
    pub fn d2(&self) -> f64 {
        self.d_tx + self.d_rx
    }
}

/// Impulse response conditioned on center distance `r`: the absorption rate
/// density at delay `tau` after release.
///
/// Zero for `tau <= 0`; the factor `(1 - a_rx/r)` makes it vanish at contact.
pub fn cir(env: &EnvParams, r: f64, tau: f64) -> Result<f64> {
    if r < env.a_rx {
        return Err(Error::Domain(format!(
            "distance {r} below receiver radius {}",
            env.a_rx
        )));
    }
    if tau <= 0.0 {
        return Ok(0.0);
    }
    let d1 = env.d1();
    let a = env.a_rx;
    let amp = a / (4.0 * PI * d1 * tau * tau * tau).sqrt();
    let gap = r - a;
    Ok(amp * (1.0 - a / r) * (-gap * gap / (4.0 * d1 * tau)).exp())
}

/// Radial derivative of the conditional impulse response at fixed delay.
pub fn cir_derivative_r(env: &EnvParams, r: f64, tau: f64) -> Result<f64> {
    if r <= env.a_rx {
        return Err(Error::Domain(format!(
            "distance {r} not above receiver radius {}",
            env.a_rx
        )));
    }
    if tau <= 0.0 {
        return Err(Error::Domain("tau must be > 0".into()));
    }
    let d1 = env.d1();
    let a = env.a_rx;
    let amp = a / (4.0 * PI * d1 * tau * tau * tau).sqrt();
    let gap = r - a;
    let gauss = (-gap * gap / (4.0 * d1 * tau)).exp();
    // product rule on (1 - a/r) * exp(-(r-a)^2 / (4 d1 tau))
    Ok(amp * gauss * (a / (r * r) - (1.0 - a / r) * gap / (2.0 * d1 * tau)))
}

/// Largest real root of the depressed-form cubic r^3 - 2a r^2 + a^2 r - 2 a d
/// (the stationarity condition r (r-a)^2 = 2 a d), located beyond r = a.
///
/// Cardano / trigonometric closed form followed by a Newton polish. The
/// branch with one real root applies for d > 2 a^2 / 27; below that the two
/// extra real roots lie in (0, a) and are not physical, so the largest root
/// is taken.
fn peak_radius_cubic(a: f64, d: f64) -> f64 {
    // depressed cubic x^3 + p x + q with r = x + 2a/3
    let p = -a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - 2.0 * a * d;
    let disc = 0.25 * q * q + p * p * p / 27.0;
    let x = if disc > 0.0 {
        let s = disc.sqrt();
        (-0.5 * q + s).cbrt() + (-0.5 * q - s).cbrt()
    } else {
        // three real roots; the largest one corresponds to r > a
        let m = 2.0 * (-p / 3.0).sqrt();
        let theta = (3.0 * q / (p * m)).clamp(-1.0, 1.0).acos();
        m * (theta / 3.0).cos()
    };
    let mut r = x + 2.0 * a / 3.0;
    // Newton polish on f(r) = r (r-a)^2 - 2 a d
    for _ in 0..4 {
        let f = r * (r - a) * (r - a) - 2.0 * a * d;
        let fp = (r - a) * (3.0 * r - a);
        if fp.abs() > 0.0 {
            r -= f / fp;
        }
    }
    r
}

/// Location and height of the maximum of the conditional impulse response
/// over distance, at fixed delay.
pub fn cir_peak(env: &EnvParams, tau: f64) -> Result<(f64, f64)> {
    if tau <= 0.0 {
        return Err(Error::Domain("tau must be > 0".into()));
    }
    let r_star = peak_radius_cubic(env.a_rx, env.d1() * tau);
    let h_star = cir(env, r_star, tau)?;
    Ok((r_star, h_star))
}

/// Probability that a molecule released at center distance `r` is absorbed
/// within the following interval `t_b`. Equals the integral of the impulse
/// response over delays in [0, t_b].
pub fn absorption_probability(env: &EnvParams, r: f64, t_b: f64) -> Result<f64> {
    if r < env.a_rx {
        return Err(Error::Domain(format!(
            "distance {r} below receiver radius {}",
            env.a_rx
        )));
    }
    if t_b <= 0.0 {
        return Err(Error::Domain("t_b must be > 0".into()));
    }
    let a = env.a_rx;
    Ok((a / r) * erfc((r - a) / (2.0 * (env.d1() * t_b).sqrt())))
}

/// Radial derivative of [`absorption_probability`]; strictly negative.
pub fn absorption_probability_derivative(env: &EnvParams, r: f64, t_b: f64) -> Result<f64> {
    if r <= env.a_rx {
        return Err(Error::Domain(format!(
            "distance {r} not above receiver radius {}",
            env.a_rx
        )));
    }
    if t_b <= 0.0 {
        return Err(Error::Domain("t_b must be > 0".into()));
    }
    let a = env.a_rx;
    let s = (env.d1() * t_b).sqrt();
    let u = (r - a) / (2.0 * s);
    Ok(-(a / (r * r)) * erfc(u) - (a / (r * PI.sqrt() * s)) * (-u * u).exp())
}

/// Law of the random center distance at elapsed time `t`: a noncentral chi
/// distribution with three degrees of freedom after normalization by
/// sqrt(2 d2 t), noncentrality r0 / sqrt(2 d2 t).
#[derive(Debug, Clone, Copy)]
pub struct DistanceLaw {
    pub env: EnvParams,
    pub t: f64,
}

impl DistanceLaw {
    pub fn new(env: EnvParams, t: f64) -> Result<Self> {
        env.validate()?;
        if t < 0.0 || !t.is_finite() {
            return Err(Error::Domain(format!("elapsed time {t} must be >= 0")));
        }
        Ok(Self { env, t })
    }

    /// Noncentrality parameter of the normalized distance. Infinite at t = 0
    /// (degenerate law).
    pub fn lambda(&self) -> f64 {
        self.env.r0 / (2.0 * self.env.d2() * self.t).sqrt()
    }

    /// Mean distance.
    pub fn mean(&self) -> f64 {
        let r0 = self.env.r0;
        let dt = self.env.d2() * self.t;
        if dt == 0.0 {
            return r0;
        }
        (4.0 * dt / PI).sqrt() * (-r0 * r0 / (4.0 * dt)).exp()
            + (r0 + 2.0 * dt / r0) * erf(r0 / (4.0 * dt).sqrt())
    }

    /// E{r^2} = r0^2 + 6 d2 t, exact for the Gaussian relative displacement.
    pub fn second_moment(&self) -> f64 {
        self.env.r0 * self.env.r0 + 6.0 * self.env.d2() * self.t
    }

    /// Variance of the distance; clamped at zero against rounding in the
    /// mean-squared subtraction.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.second_moment() - m * m).max(0.0)
    }

    /// Probability density of the distance. The sinh factor of the radial
    /// law is expanded into a difference of exponentials so no intermediate
    /// overflows at small t.
    pub fn pdf(&self, r: f64) -> Result<f64> {
        let dt = self.env.d2() * self.t;
        if dt <= 0.0 {
            return Err(Error::Domain("pdf requires t > 0 and d2 > 0".into()));
        }
        if r <= 0.0 {
            return Ok(0.0);
        }
        let r0 = self.env.r0;
        let e1 = (-(r - r0) * (r - r0) / (4.0 * dt)).exp();
        let e2 = (-(r + r0) * (r + r0) / (4.0 * dt)).exp();
        Ok(r / (2.0 * r0 * (PI * dt).sqrt()) * (e1 - e2))
    }

    /// Cumulative distribution of the distance, via the Marcum Q tail of the
    /// normalized noncentral chi variable.
    pub fn cdf(&self, r: f64) -> Result<f64> {
        let dt = self.env.d2() * self.t;
        if dt <= 0.0 {
            return Err(Error::Domain("cdf requires t > 0 and d2 > 0".into()));
        }
        if r <= 0.0 {
            return Ok(0.0);
        }
        let scale = (2.0 * dt).sqrt();
        Ok(1.0 - marcum_q_3_2(self.env.r0 / scale, r / scale)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::{integrate, integrate_semi_infinite, QuadratureSpec};
    use proptest::prelude::*;

    /// Reference scenario: slow transmitter, static receiver, fast molecules.
    pub fn table_env() -> EnvParams {
        EnvParams::new(1e-14, 0.0, 8e-11, 1e-7, 1e-6, 1e-5).unwrap()
    }

    #[test]
    fn rejects_overlapping_start() {
        assert!(EnvParams::new(1e-14, 0.0, 8e-11, 1e-7, 1e-6, 1e-6).is_err());
    }

    #[test]
    fn cir_zero_for_nonpositive_delay() {
        let env = table_env();
        assert_eq!(cir(&env, 1e-5, -1.0).unwrap(), 0.0);
        assert_eq!(cir(&env, 1e-5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn cir_zero_at_contact() {
        let env = table_env();
        assert_eq!(cir(&env, env.a_rx, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn cir_rejects_inside_receiver() {
        let env = table_env();
        assert!(cir(&env, 0.5e-6, 1.0).is_err());
    }

    #[test]
    fn cir_reference_value() {
        // Independent evaluation of the same formula, assembled step by step.
        let env = table_env();
        let (r, tau) = (1e-5, 0.17f64);
        let d1: f64 = 8e-11;
        let amp = 1e-6 / (4.0 * PI * d1 * tau.powi(3)).sqrt();
        let expected = amp * 0.9 * (-(9e-6_f64).powi(2) / (4.0 * d1 * tau)).exp();
        let got = cir(&env, r, tau).unwrap();
        assert!((got - expected).abs() < 1e-12 * expected);
        assert!((got - 0.0914).abs() < 2e-4, "got {got}");
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let env = table_env();
        for &(r, tau) in &[(2e-6, 0.05), (1e-5, 0.17), (3e-5, 1.0), (1e-4, 10.0)] {
            let d = cir_derivative_r(&env, r, tau).unwrap();
            let eps = r * 1e-7;
            let fd = (cir(&env, r + eps, tau).unwrap() - cir(&env, r - eps, tau).unwrap())
                / (2.0 * eps);
            let scale = d.abs().max(fd.abs()).max(1e-30);
            assert!((d - fd).abs() / scale < 1e-6, "r={r} tau={tau}: {d} vs {fd}");
        }
    }

    #[test]
    fn derivative_positive_near_contact() {
        let env = table_env();
        assert!(cir_derivative_r(&env, env.a_rx * 1.0001, 0.17).unwrap() > 0.0);
    }

    #[test]
    fn peak_is_stationary_and_maximal() {
        let env = table_env();
        let (r_star, h_star) = cir_peak(&env, 0.17).unwrap();
        let d = cir_derivative_r(&env, r_star, 0.17).unwrap();
        // relative scale: derivative magnitude nearby
        let near = cir_derivative_r(&env, r_star * 0.9, 0.17).unwrap().abs();
        assert!(d.abs() < 1e-9 * near.max(1.0), "residual slope {d}");
        let eps = 1e-9;
        assert!(cir(&env, r_star + eps, 0.17).unwrap() < h_star);
        assert!(cir(&env, r_star - eps, 0.17).unwrap() < h_star);
    }

    #[test]
    fn peak_height_reference() {
        let env = table_env();
        let (_, h_star) = cir_peak(&env, 0.17).unwrap();
        assert!((h_star - 0.29).abs() < 0.01, "h_star = {h_star}");
    }

    #[test]
    fn cardano_matches_newton_from_grid_seed() {
        let env = table_env();
        for &tau in &[1e-4, 1e-3, 0.01, 0.17, 1.0, 30.0] {
            let (r_star, _) = cir_peak(&env, tau).unwrap();
            // independent Newton solve seeded from a coarse grid scan
            let a = env.a_rx;
            let d = env.d1() * tau;
            let f = |r: f64| r * (r - a) * (r - a) - 2.0 * a * d;
            let mut best = a * 1.0001;
            let mut best_abs = f64::INFINITY;
            for k in 1..20000 {
                let r = a + (a + (2.0 * a * d).cbrt() * 4.0) * k as f64 / 2e4;
                if f(r).abs() < best_abs {
                    best_abs = f(r).abs();
                    best = r;
                }
            }
            for _ in 0..60 {
                let fp = (best - a) * (3.0 * best - a);
                best -= f(best) / fp;
            }
            assert!(
                (r_star - best).abs() < 1e-12 * best,
                "tau={tau}: {r_star} vs {best}"
            );
        }
    }

    #[test]
    fn absorption_probability_boundaries() {
        let env = table_env();
        assert!((absorption_probability(&env, env.a_rx, 28.8).unwrap() - 1.0).abs() < 1e-15);
        assert!(absorption_probability(&env, 1.0, 28.8).unwrap() < 1e-12);
    }

    #[test]
    fn absorption_probability_equals_cir_integral() {
        let env = table_env();
        let spec = QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-11,
            max_subdivisions: 2000,
            truncation_sigma: 10.0,
        };
        for &(r, tb) in &[(1e-5, 28.8), (3e-6, 10.0), (2e-5, 100.0)] {
            let p = absorption_probability(&env, r, tb).unwrap();
            let q = integrate(|tau| cir(&env, r, tau).unwrap(), 0.0, tb, &spec).unwrap();
            assert!((p - q).abs() < 1e-8, "r={r}: {p} vs {q}");
        }
    }

    #[test]
    fn absorption_derivative_matches_finite_difference() {
        let env = table_env();
        for &(r, tb) in &[(2e-6, 28.8), (1e-5, 10.0), (5e-5, 100.0)] {
            let d = absorption_probability_derivative(&env, r, tb).unwrap();
            assert!(d < 0.0);
            let eps = r * 1e-7;
            let fd = (absorption_probability(&env, r + eps, tb).unwrap()
                - absorption_probability(&env, r - eps, tb).unwrap())
                / (2.0 * eps);
            assert!((d - fd).abs() / d.abs() < 1e-6, "r={r}: {d} vs {fd}");
        }
    }

    #[test]
    fn distance_law_degenerate_at_zero_time() {
        let law = DistanceLaw::new(table_env(), 0.0).unwrap();
        assert_eq!(law.mean(), 1e-5);
        assert_eq!(law.variance(), 0.0);
    }

    #[test]
    fn distance_pdf_normalizes() {
        let spec = QuadratureSpec::default();
        for &t in &[36.0, 360.0, 3600.0] {
            let law = DistanceLaw::new(table_env(), t).unwrap();
            let std = law.variance().sqrt();
            let v = integrate_semi_infinite(|r| law.pdf(r).unwrap(), law.mean(), std, &spec)
                .unwrap();
            assert!((v - 1.0).abs() < 1e-6, "t={t}: {v}");
        }
    }

    #[test]
    fn distance_mean_matches_pdf_quadrature() {
        let spec = QuadratureSpec::default();
        let law = DistanceLaw::new(table_env(), 3600.0).unwrap();
        let std = law.variance().sqrt();
        let m = integrate_semi_infinite(|r| r * law.pdf(r).unwrap(), law.mean(), std, &spec)
            .unwrap();
        assert!((m - law.mean()).abs() < 1e-9 * law.mean());
    }

    #[test]
    fn distance_cdf_limits() {
        let law = DistanceLaw::new(table_env(), 360.0).unwrap();
        assert_eq!(law.cdf(0.0).unwrap(), 0.0);
        assert!((law.cdf(1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_cdf_matches_pdf_integral() {
        let spec = QuadratureSpec::default();
        let law = DistanceLaw::new(table_env(), 360.0).unwrap();
        for &(lo, hi) in &[(0.0, 8e-6), (8e-6, 1.2e-5), (1.2e-5, 3e-5)] {
            let mass = integrate(|r| law.pdf(r).unwrap(), lo, hi, &spec).unwrap();
            let diff = law.cdf(hi).unwrap() - law.cdf(lo).unwrap();
            assert!((mass - diff).abs() < 1e-8, "[{lo},{hi}]: {mass} vs {diff}");
        }
    }

    #[test]
    fn distance_pdf_vanishes_at_origin() {
        let law = DistanceLaw::new(table_env(), 360.0).unwrap();
        assert!(law.pdf(1e-12).unwrap() < law.pdf(law.mean()).unwrap() * 1e-6);
    }

    proptest! {
        #[test]
        fn second_moment_identity(
            r0 in 1e-6f64..1e-4,
            d2 in 1e-15f64..1e-10,
            t in 1.0f64..1e5,
        ) {
            let env = EnvParams::new(d2, 0.0, 8e-11, 1e-9, 1e-9, r0).unwrap();
            let law = DistanceLaw::new(env, t).unwrap();
            prop_assert!((law.second_moment() - (r0 * r0 + 6.0 * d2 * t)).abs()
                < 1e-12 * law.second_moment());
            // variance nonnegative and below the second moment
            prop_assert!(law.variance() >= 0.0);
            prop_assert!(law.variance() <= law.second_moment());
        }

        #[test]
        fn absorption_monotone(
            r in prop::collection::vec(1.1e-6f64..1e-4, 2),
            tb in prop::collection::vec(0.1f64..1e3, 2),
        ) {
            let env = table_env();
            let (r_lo, r_hi) = (r[0].min(r[1]), r[0].max(r[1]) + 1e-9);
            let (t_lo, t_hi) = (tb[0].min(tb[1]), tb[0].max(tb[1]) + 1e-6);
            // decreasing in distance at fixed interval
            prop_assert!(
                absorption_probability(&env, r_lo, t_lo).unwrap()
                    >= absorption_probability(&env, r_hi, t_lo).unwrap()
            );
            // increasing in interval at fixed distance
            prop_assert!(
                absorption_probability(&env, r_hi, t_hi).unwrap()
                    >= absorption_probability(&env, r_hi, t_lo).unwrap()
            );
        }

        #[test]
        fn cdf_monotone_in_r(
            t in 1.0f64..1e5,
            r in prop::collection::vec(1e-7f64..1e-3, 2),
        ) {
            let law = DistanceLaw::new(table_env(), t).unwrap();
            let (lo, hi) = (r[0].min(r[1]), r[0].max(r[1]));
            prop_assert!(law.cdf(lo).unwrap() <= law.cdf(hi).unwrap() + 1e-12);
        }

        #[test]
        fn derivative_single_sign_change(tau in 1e-3f64..100.0) {
            // positive below the peak radius, negative above it
            let env = table_env();
            let (r_star, _) = cir_peak(&env, tau).unwrap();
            for k in 1..=8 {
                let f = 0.1 + 0.1 * k as f64;
                let below = env.a_rx + (r_star - env.a_rx) * f * 0.99;
                let above = r_star + (r_star - env.a_rx) * f;
                prop_assert!(cir_derivative_r(&env, below, tau).unwrap() > 0.0);
                prop_assert!(cir_derivative_r(&env, above, tau).unwrap() < 0.0);
            }
        }
    }
}
