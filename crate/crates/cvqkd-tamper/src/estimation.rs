//! Parameter estimation for the Gaussian-modulated coherent-state protocol.
//!
//! Covers the linear-model regression estimators used on quadrature data,
//! the moment-based estimators of the tampered channel, worst-case
//! finite-size penalties, and the weighted-average estimators seen when an
//! attack is active for a fraction of the block.

use serde::{Deserialize, Serialize};

use crate::erf::erfc;
use crate::error::{Error, Result};
use crate::security::LinkConfig;

/// Paired quadrature records from Alice and Bob, in shot-noise units.
#[derive(Debug, Clone)]
pub struct QuadratureBatch {
    pub x_alice: Vec<f64>,
    pub x_bob: Vec<f64>,
    pub shot_noise: f64,
    pub v_el: f64,
    pub eta: f64,
}

impl QuadratureBatch {
    pub fn new(x_alice: Vec<f64>, x_bob: Vec<f64>, shot_noise: f64, v_el: f64, eta: f64) -> Result<Self> {
        if x_alice.len() != x_bob.len() || x_alice.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "quadrature batch needs two same-length records, got {} and {}",
                x_alice.len(),
                x_bob.len()
            )));
        }
        if !(shot_noise > 0.0) || v_el < 0.0 || !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidInput(
                "shot noise must be positive, v_el non-negative, eta in (0,1]".into(),
            ));
        }
        Ok(Self {
            x_alice,
            x_bob,
            shot_noise,
            v_el,
            eta,
        })
    }

    pub fn len(&self) -> usize {
        self.x_alice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_alice.is_empty()
    }
}

/// Regression slope `t = sum(x_A x_B) / sum(x_A^2)`, the estimator of
/// `sqrt(eta) * E(sqrt(T))`.
pub fn estimate_t(batch: &QuadratureBatch) -> Result<f64> {
    let sum_aa: f64 = batch.x_alice.iter().map(|a| a * a).sum();
    if sum_aa <= 0.0 {
        return Err(Error::Estimation(
            "all-zero Alice quadratures; slope undefined".into(),
        ));
    }
    let sum_ab: f64 = batch
        .x_alice
        .iter()
        .zip(&batch.x_bob)
        .map(|(a, b)| a * b)
        .sum();
    Ok(sum_ab / sum_aa)
}

/// Residual noise power `(1/m) sum (x_B - t x_A)^2`.
pub fn estimate_noise(batch: &QuadratureBatch, t_hat: f64) -> f64 {
    let m = batch.len() as f64;
    batch
        .x_alice
        .iter()
        .zip(&batch.x_bob)
        .map(|(a, b)| {
            let r = b - t_hat * a;
            r * r
        })
        .sum::<f64>()
        / m
}

/// Channel parameters inferred from the transmittance moments:
/// `T = E(sqrt(T))^2` and `xi = (E(T)/T) (V_A + xi_true) - V_A`.
///
/// The fluctuation of `T` always shows up as extra estimated noise;
/// `xi >= xi_true` with equality only for a degenerate distribution.
pub fn attacked_estimators(
    e_sqrt_t: f64,
    e_t: f64,
    v_a: f64,
    xi: f64,
) -> Result<(f64, f64)> {
    if e_sqrt_t < 0.0 || e_t < 0.0 {
        return Err(Error::InvalidInput("moments must be non-negative".into()));
    }
    if e_sqrt_t == 0.0 {
        return Err(Error::BlockedChannel(
            "E(sqrt(T)) = 0; the channel is fully blocked".into(),
        ));
    }
    let t_hat = e_sqrt_t * e_sqrt_t;
    let xi_hat = e_t / t_hat * (v_a + xi) - v_a;
    Ok((t_hat, xi_hat))
}

/// Block-size bookkeeping and security epsilons for the finite-size bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteSizeConfig {
    /// Total block size N (symbols).
    pub n_block: f64,
    /// Symbols sacrificed for parameter estimation, m < N.
    pub m_pe: f64,
    pub eps_pe: f64,
    pub eps_cor: f64,
    pub eps_h: f64,
    pub eps_s: f64,
    /// Success probability of error correction.
    pub p_ec: f64,
    /// Alphabet size after analogue-to-digital conversion.
    pub d_alphabet: u32,
    /// Measurement variance constant; 2 for heterodyne detection.
    pub v0: f64,
    /// Estimation offset constant, kept at 0.
    pub c_pe: f64,
}

impl Default for FiniteSizeConfig {
    fn default() -> Self {
        Self {
            n_block: 1e12,
            m_pe: 1e11,
            eps_pe: 1e-9,
            eps_cor: 1e-9,
            eps_h: 1e-9,
            eps_s: 1e-9,
            p_ec: 0.99,
            d_alphabet: 32,
            v0: 2.0,
            c_pe: 0.0,
        }
    }
}

impl FiniteSizeConfig {
    /// Default epsilons with a given block size; keeps `m = N/10`.
    pub fn with_block_size(n_block: f64) -> Self {
        Self {
            n_block,
            m_pe: n_block / 10.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_block > 0.0) || !(self.m_pe > 0.0) || self.m_pe >= self.n_block {
            return Err(Error::InvalidInput(format!(
                "need 0 < m < N, got m={}, N={}",
                self.m_pe, self.n_block
            )));
        }
        for (name, e) in [
            ("eps_pe", self.eps_pe),
            ("eps_cor", self.eps_cor),
            ("eps_h", self.eps_h),
            ("eps_s", self.eps_s),
        ] {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::InvalidInput(format!("{name} must be in (0,1), got {e}")));
            }
        }
        if !(self.p_ec > 0.0 && self.p_ec <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "p_ec must be in (0,1], got {}",
                self.p_ec
            )));
        }
        Ok(())
    }

    /// Key symbols left after parameter estimation.
    pub fn n_key(&self) -> f64 {
        self.n_block - self.m_pe
    }

    /// Sub-block configuration after post-selection splits the block by
    /// `fraction`; estimation symbols scale proportionally.
    pub fn scaled(&self, fraction: f64) -> Self {
        Self {
            n_block: self.n_block * fraction,
            m_pe: self.m_pe * fraction,
            ..*self
        }
    }

    /// Overall secrecy parameter `2 p_ec eps_PE + eps_cor + eps_h + eps_s`.
    pub fn epsilon_total(&self) -> f64 {
        2.0 * self.p_ec * self.eps_pe + self.eps_cor + self.eps_h + self.eps_s
    }
}

/// Confidence factor `w = sqrt(2) * erfinv(1 - eps_PE)`, solved from
/// `erfc(w / sqrt(2)) = eps_PE` by bisection plus Newton polish.
pub fn w_factor(eps_pe: f64) -> Result<f64> {
    if !(eps_pe > 0.0 && eps_pe <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "eps_PE must be in (0,1], got {eps_pe}"
        )));
    }
    if eps_pe == 1.0 {
        return Ok(0.0);
    }
    let target = |w: f64| erfc(w / std::f64::consts::SQRT_2) - eps_pe;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while target(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::Numerical(format!(
                "w_factor bracket failed for eps_PE={eps_pe}"
            )));
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if target(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let mut w = 0.5 * (lo + hi);
    // Newton polish: d/dw erfc(w/sqrt 2) = -sqrt(2/pi) exp(-w^2/2)
    for _ in 0..4 {
        let deriv = -(2.0 / std::f64::consts::PI).sqrt() * (-0.5 * w * w).exp();
        if deriv.abs() < 1e-300 {
            break;
        }
        let step = target(w) / deriv;
        w -= step;
        if step.abs() < 1e-14 {
            break;
        }
    }
    Ok(w.max(0.0))
}

/// Worst-case channel parameters at confidence `1 - eps_PE`:
/// `T_wc = T - w sigma_T`, `xi_wc = (T/T_wc) xi + w sigma_xi`.
pub fn worst_case_params(
    t: f64,
    xi: f64,
    cfg: &FiniteSizeConfig,
    sys: &LinkConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(Error::InvalidInput(format!("T must be positive, got {t}")));
    }
    let w = w_factor(cfg.eps_pe)?;
    let m = cfg.m_pe;
    let sigma_t = 2.0 * t / (cfg.v0 * m).sqrt()
        * (cfg.c_pe + (xi + (cfg.v0 + sys.v_el) / (sys.eta * t)) / sys.v_a).sqrt();
    let t_wc = t - w * sigma_t;
    if t_wc <= 0.0 {
        return Err(Error::Estimation(format!(
            "worst-case transmittance non-positive (T={t}, w*sigma_T={})",
            w * sigma_t
        )));
    }
    let sigma_xi = (2.0 / (cfg.v0 * m)).sqrt() * (sys.eta * t + cfg.v0 + sys.v_el) / (sys.eta * t_wc);
    let xi_wc = t / t_wc * xi + w * sigma_xi;
    Ok((t_wc, xi_wc))
}

/// Transmittance moments of the block when the attack runs for a fraction
/// `f` of it: the weighted average of attacked and unattacked laws.
pub fn weighted_moments(f_attack: f64, p: f64, g: f64, t0: f64) -> (f64, f64) {
    let e_sqrt_t = f_attack * p * (g * t0).sqrt() + (1.0 - f_attack) * t0.sqrt();
    let e_t = f_attack * p * g * t0 + (1.0 - f_attack) * t0;
    (e_sqrt_t, e_t)
}

/// Channel parameters estimated over a partially attacked block.
pub fn weighted_params(
    f_attack: f64,
    p: f64,
    g: f64,
    t0: f64,
    v_a: f64,
    xi: f64,
) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&f_attack) {
        return Err(Error::InvalidInput(format!(
            "f_attack must be in [0,1], got {f_attack}"
        )));
    }
    let (e_sqrt_t, e_t) = weighted_moments(f_attack, p, g, t0);
    attacked_estimators(e_sqrt_t, e_t, v_a, xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn normal(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen::<f64>();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn slope_identity_and_scaling() {
        let xa = vec![1.0, -2.0, 0.5, 3.0];
        let batch = QuadratureBatch::new(xa.clone(), xa.clone(), 1.0, 0.0, 1.0).unwrap();
        assert!((estimate_t(&batch).unwrap() - 1.0).abs() < 1e-15);
        let xb: Vec<f64> = xa.iter().map(|x| 0.5 * x).collect();
        let batch = QuadratureBatch::new(xa, xb, 1.0, 0.0, 1.0).unwrap();
        assert!((estimate_t(&batch).unwrap() - 0.5).abs() < 1e-15);

        let zeros = QuadratureBatch::new(vec![0.0; 4], vec![1.0; 4], 1.0, 0.0, 1.0).unwrap();
        assert!(estimate_t(&zeros).is_err());
    }

    #[test]
    fn slope_recovers_channel_on_synthetic_data() {
        // x_B = sqrt(eta T) x_A + z, z ~ N(0, 1 + v_el + eta T xi)
        let (t, eta, xi, v_el, v_a) = (0.25, 0.9, 0.01, 0.05, 2.8);
        let m = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut xa = Vec::with_capacity(m);
        let mut xb = Vec::with_capacity(m);
        let s = (1.0 + v_el + eta * t * xi as f64).sqrt();
        for _ in 0..m {
            let a = (v_a as f64).sqrt() * normal(&mut rng);
            let b = (eta * t as f64).sqrt() * a + s * normal(&mut rng);
            xa.push(a);
            xb.push(b);
        }
        let batch = QuadratureBatch::new(xa, xb, 1.0, v_el, eta).unwrap();
        let t_hat = estimate_t(&batch).unwrap();
        let want = (eta * t as f64).sqrt();
        // std error of the slope ~ s / sqrt(m V_A)
        let se = s / ((m as f64) * v_a).sqrt();
        assert!((t_hat - want).abs() < 3.0 * se, "{t_hat} vs {want}");
    }

    #[test]
    fn noise_estimator_examples() {
        let xa = vec![1.0, 2.0, -1.0, 0.5];
        let xb: Vec<f64> = xa.iter().map(|x| 0.7 * x).collect();
        let batch = QuadratureBatch::new(xa, xb, 1.0, 0.0, 1.0).unwrap();
        assert!(estimate_noise(&batch, 0.7).abs() < 1e-15);

        // constant residual c gives c^2
        let xa = vec![1.0, 2.0, 3.0, 4.0];
        let xb: Vec<f64> = xa.iter().map(|x| x + 0.3).collect();
        let batch = QuadratureBatch::new(xa, xb, 1.0, 0.0, 1.0).unwrap();
        assert!((estimate_noise(&batch, 1.0) - 0.09).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = 1_000_000;
        let xa: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
        let xb: Vec<f64> = xa.iter().map(|a| a + 1.05f64.sqrt() * normal(&mut rng)).collect();
        let batch = QuadratureBatch::new(xa, xb, 1.0, 0.0, 1.0).unwrap();
        let s2 = estimate_noise(&batch, 1.0);
        assert!((s2 - 1.05).abs() < 0.01, "{s2}");
    }

    #[test]
    fn attacked_estimator_cases() {
        // degenerate distribution: parameters unchanged
        let t0 = 0.36;
        let (t, xi) = attacked_estimators(t0.sqrt(), t0, 2.8, 0.015).unwrap();
        assert!((t - t0).abs() < 1e-15);
        assert!((xi - 0.015).abs() < 1e-12);

        // amplification only (p = 1): T scales by g, noise unchanged
        let g = 1.12;
        let (t, xi) = attacked_estimators((g * t0).sqrt(), g * t0, 2.8, 0.015).unwrap();
        assert!((t - g * t0).abs() < 1e-12);
        assert!((xi - 0.015).abs() < 1e-12);

        // hybrid (p = 1/sqrt(g)): T back to T0, noise inflated
        let p = 1.0 / g.sqrt();
        let (v_a, xi_true) = (2.8, 0.015);
        let (t, xi) =
            attacked_estimators(p * (g * t0).sqrt(), p * g * t0, v_a, xi_true).unwrap();
        assert!((t - t0).abs() < 1e-12);
        let want = g.sqrt() * (v_a + xi_true) - v_a;
        assert!((xi - want).abs() < 1e-12);

        assert!(matches!(
            attacked_estimators(0.0, 0.0, 2.8, 0.01),
            Err(Error::BlockedChannel(_))
        ));
    }

    #[test]
    fn estimator_noise_never_below_true_noise() {
        // Cauchy-Schwarz: E(T) >= E(sqrt T)^2, so xi_hat >= xi.
        for (p, g) in [(1.0, 1.0), (0.9, 1.2), (0.5, 0.8), (0.99, 1.6)] {
            let t0 = 0.2;
            let es: f64 = p * (g * t0 as f64).sqrt();
            let et = p * g * t0;
            let (_, xi_hat) = attacked_estimators(es, et, 2.8, 0.01).unwrap();
            assert!(xi_hat >= 0.01 - 1e-12, "p={p} g={g}: {xi_hat}");
        }
    }

    #[test]
    fn w_factor_reference_points() {
        assert_eq!(w_factor(1.0).unwrap(), 0.0);
        assert!((w_factor(1e-9).unwrap() - 6.10941020486940).abs() < 1e-10);
        assert!((w_factor(0.3173).unwrap() - 1.00002171332300).abs() < 1e-10);
        assert!((w_factor(1e-6).unwrap() - 4.89163847569859).abs() < 1e-10);
        assert!((w_factor(1e-3).unwrap() - 3.29052673149189).abs() < 1e-10);
        assert!((w_factor(0.5).unwrap() - 0.674489750196082).abs() < 1e-10);
        assert!(w_factor(0.0).is_err());
        assert!(w_factor(1.5).is_err());
    }

    #[test]
    fn w_factor_is_strictly_decreasing() {
        let eps = [1e-12, 1e-9, 1e-6, 1e-3, 0.01, 0.1, 0.5, 0.9, 0.99, 1.0];
        let ws: Vec<f64> = eps.iter().map(|&e| w_factor(e).unwrap()).collect();
        for pair in ws.windows(2) {
            assert!(pair[0] > pair[1], "{ws:?}");
        }
    }

    fn golden_link() -> LinkConfig {
        LinkConfig {
            v_a: 2.8,
            ..LinkConfig::default()
        }
    }

    #[test]
    fn worst_case_golden_value() {
        // frozen from a 50-digit evaluation of the closed-form expressions
        let cfg = FiniteSizeConfig::default();
        let sys = golden_link();
        let (t_wc, xi_wc) = worst_case_params(0.1585, 0.015, &cfg, &sys).unwrap();
        assert!((t_wc - 0.158490184055073).abs() < 1e-13, "{t_wc}");
        assert!((xi_wc - 0.0152979066297027).abs() < 1e-13, "{xi_wc}");
    }

    #[test]
    fn worst_case_limits() {
        let sys = golden_link();
        // eps_PE = 1 gives w = 0 and no penalty
        let cfg = FiniteSizeConfig {
            eps_pe: 1.0,
            ..FiniteSizeConfig::default()
        };
        let (t_wc, xi_wc) = worst_case_params(0.1585, 0.015, &cfg, &sys).unwrap();
        assert!((t_wc - 0.1585).abs() < 1e-15);
        assert!((xi_wc - 0.015).abs() < 1e-15);

        // asymptotic limit m -> infinity
        let cfg = FiniteSizeConfig {
            n_block: 1e30,
            m_pe: 1e29,
            ..FiniteSizeConfig::default()
        };
        let (t_wc, xi_wc) = worst_case_params(0.1585, 0.015, &cfg, &sys).unwrap();
        assert!((t_wc - 0.1585).abs() < 1e-8);
        assert!((xi_wc - 0.015).abs() < 1e-8);

        // larger m brings the worst case monotonically closer
        let mut prev = f64::NEG_INFINITY;
        for m in [1e6, 1e8, 1e10, 1e12] {
            let cfg = FiniteSizeConfig {
                n_block: 10.0 * m,
                m_pe: m,
                ..FiniteSizeConfig::default()
            };
            let (t_wc, _) = worst_case_params(0.1585, 0.015, &cfg, &sys).unwrap();
            assert!(t_wc > prev);
            prev = t_wc;
        }

        // tiny block: estimation failure
        let cfg = FiniteSizeConfig {
            n_block: 100.0,
            m_pe: 10.0,
            ..FiniteSizeConfig::default()
        };
        assert!(matches!(
            worst_case_params(1e-4, 0.015, &cfg, &sys),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn weighted_params_endpoints() {
        let (t0, v_a, xi) = (0.158489319246111, 2.8, 0.0103);
        let (t, x) = weighted_params(0.0, 1.0, 1.58, t0, v_a, xi).unwrap();
        assert!((t - t0).abs() < 1e-15);
        assert!((x - xi).abs() < 1e-12);

        let (t, x) = weighted_params(1.0, 1.0, 1.58, t0, v_a, xi).unwrap();
        assert!((t - 1.58 * t0).abs() < 1e-12);
        assert!((x - xi).abs() < 1e-12);

        // half-time amplification: T = ((sqrt g + 1)/2)^2 T0 ~ 1.27 T0
        let (t, _) = weighted_params(0.5, 1.0, 1.58, t0, v_a, xi).unwrap();
        assert!((t / t0 - 1.27349025449883).abs() < 1e-10);
    }

    /// Regression estimators on synthetic fluctuating-channel data agree
    /// with the moment-based estimators.
    #[test]
    fn regression_matches_moment_estimators() {
        let (eta, v_el, v_a, xi) = (0.9, 0.05, 2.8, 0.02);
        let (p, g, t0) = (0.9, 1.2, 0.2);
        let m = 200_000;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut xa = Vec::with_capacity(m);
        let mut xb = Vec::with_capacity(m);
        for _ in 0..m {
            let t_i = if rng.gen::<f64>() < p { g * t0 } else { 0.0 };
            let a = v_a.sqrt() * normal(&mut rng);
            let s2: f64 = 1.0 + v_el + eta * t_i * xi;
            let b = (eta * t_i).sqrt() * a + s2.sqrt() * normal(&mut rng);
            xa.push(a);
            xb.push(b);
        }
        let batch = QuadratureBatch::new(xa, xb, 1.0, v_el, eta).unwrap();
        let t_slope = estimate_t(&batch).unwrap();
        let s2 = estimate_noise(&batch, t_slope);
        // regression route
        let t_reg = t_slope * t_slope / eta;
        let xi_reg = (s2 - v_el - 1.0) / (eta * t_reg);
        // moment route
        let (es, et) = (p * (g * t0 as f64).sqrt(), p * g * t0);
        let (t_mom, xi_mom) = attacked_estimators(es, et, v_a, xi).unwrap();
        assert!((t_reg - t_mom).abs() < 0.01, "{t_reg} vs {t_mom}");
        assert!((xi_reg - xi_mom).abs() < 0.05 * (1.0 + xi_mom), "{xi_reg} vs {xi_mom}");
    }
}
