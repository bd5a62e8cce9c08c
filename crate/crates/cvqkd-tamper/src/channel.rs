//! Fiber channel model: transmittance, Eve's amplification gain, and the
//! tampered transmittance distribution with exact moments and Monte-Carlo
//! sampling.
//!
//! The channel under attack follows a two-point (Bernoulli) law scaled by
//! the amplified segment transmittance and blurred by the relative
//! intensity noise of the transmitted local oscillator:
//!
//! `T_i = b_i * (g * T_eve) * nu_i`
//!
//! with `b_i ~ Bernoulli(p)` and `nu_i` a normal fluctuation centred on the
//! downstream transmittance `T_bob`, truncated to `[0, 1]` by rejection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attenuation of standard telecom fiber, dB/km.
pub const STANDARD_FIBER_LOSS_DB_KM: f64 = 0.2;
/// Attenuation of ultra-low-loss fiber an attacker may splice in, dB/km.
pub const ULTRA_LOW_LOSS_DB_KM: f64 = 0.15;

/// The transmittance readout divides two monitored powers (input and output
/// of the link); both monitors see the LO intensity noise, so the readout
/// fluctuation is sqrt(2) times the single-monitor noise.
pub const LO_MONITOR_NOISE_FACTOR: f64 = std::f64::consts::SQRT_2;

/// A span of fiber with uniform attenuation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSegment {
    pub loss_db_per_km: f64,
    pub length_km: f64,
}

impl FiberSegment {
    pub fn new(loss_db_per_km: f64, length_km: f64) -> Result<Self> {
        if !(loss_db_per_km >= 0.0) || !(length_km >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "fiber segment needs non-negative loss and length, got {loss_db_per_km} dB/km, {length_km} km"
            )));
        }
        Ok(Self {
            loss_db_per_km,
            length_km,
        })
    }

    /// Power transmittance `10^(-loss * length / 10)`, in `(0, 1]`.
    pub fn transmittance(&self) -> f64 {
        10f64.powf(-self.loss_db_per_km * self.length_km / 10.0)
    }
}

/// Transmittance of a fiber span; zero length gives exactly 1.
pub fn transmittance(loss_db_per_km: f64, length_km: f64) -> Result<f64> {
    Ok(FiberSegment::new(loss_db_per_km, length_km)?.transmittance())
}

/// Gain obtained by replacing `d_eve_km` of fiber of loss `loss_db` with
/// fiber of loss `loss_prime_db`: `g = 10^((loss - loss') * d_eve / 10)`.
pub fn amplification_gain(loss_db: f64, loss_prime_db: f64, d_eve_km: f64) -> Result<f64> {
    if !(d_eve_km >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "attacked length must be non-negative, got {d_eve_km} km"
        )));
    }
    if loss_db < 0.0 || loss_prime_db < 0.0 {
        return Err(Error::InvalidInput(
            "fiber losses must be non-negative".into(),
        ));
    }
    Ok(10f64.powf((loss_db - loss_prime_db) * d_eve_km / 10.0))
}

/// The four channel classes distinguished by the monitor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackKind {
    /// Untampered channel.
    Normal,
    /// Channel amplification: lower-loss fiber spliced in, `p = 1`, `g > 1`.
    Ca,
    /// Hybrid amplification + intermittent blocking with `p = 1/sqrt(g)`,
    /// which keeps the estimated transmittance at its unattacked value.
    CaDos,
    /// Denial of service: intermittent blocking, `p < 1`, `g <= 1`.
    Dos,
}

impl AttackKind {
    pub const ALL: [AttackKind; 4] = [
        AttackKind::Normal,
        AttackKind::Ca,
        AttackKind::CaDos,
        AttackKind::Dos,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            AttackKind::Normal => "Normal",
            AttackKind::Ca => "CA",
            AttackKind::CaDos => "CA-DoS",
            AttackKind::Dos => "DoS",
        }
    }

    pub fn index(&self) -> usize {
        match self {
            AttackKind::Normal => 0,
            AttackKind::Ca => 1,
            AttackKind::CaDos => 2,
            AttackKind::Dos => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<AttackKind> {
        AttackKind::ALL.get(i).copied()
    }

    pub fn from_label(s: &str) -> Option<AttackKind> {
        AttackKind::ALL.iter().copied().find(|k| k.label() == s)
    }

    /// One-hot encoding in class order Normal, CA, CA-DoS, DoS.
    pub fn one_hot(&self) -> [u8; 4] {
        let mut v = [0u8; 4];
        v[self.index()] = 1;
        v
    }
}

impl std::fmt::Display for AttackKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Full description of one tampering scenario on a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub kind: AttackKind,
    /// Transmittance gain of the attacked span (dimensionless).
    pub g: f64,
    /// Two-point (Bernoulli) pass probability.
    pub p: f64,
    pub d_eve_km: f64,
    pub d_bob_km: f64,
    /// Fraction of the block during which the attack is active.
    pub f_attack: f64,
    /// Relative intensity noise std of the local oscillator.
    pub sigma_rin_lo: f64,
}

impl AttackConfig {
    /// Untampered channel over a link split at `d_eve_km` (split is
    /// irrelevant for the physics, kept for bookkeeping).
    pub fn normal(d_eve_km: f64, d_bob_km: f64, sigma_rin_lo: f64) -> Self {
        Self {
            kind: AttackKind::Normal,
            g: 1.0,
            p: 1.0,
            d_eve_km,
            d_bob_km,
            f_attack: 0.0,
            sigma_rin_lo,
        }
    }

    /// Channel-amplification attack with the standard/ultra-low fiber pair.
    pub fn ca(d_eve_km: f64, d_bob_km: f64, sigma_rin_lo: f64, f_attack: f64) -> Result<Self> {
        let g = amplification_gain(STANDARD_FIBER_LOSS_DB_KM, ULTRA_LOW_LOSS_DB_KM, d_eve_km)?;
        Self {
            kind: AttackKind::Ca,
            g,
            p: 1.0,
            d_eve_km,
            d_bob_km,
            f_attack,
            sigma_rin_lo,
        }
        .validated()
    }

    /// Hybrid attack: same splice as [`AttackConfig::ca`] with the blocking
    /// probability tuned to `p = 1/sqrt(g)`.
    pub fn ca_dos(d_eve_km: f64, d_bob_km: f64, sigma_rin_lo: f64, f_attack: f64) -> Result<Self> {
        let g = amplification_gain(STANDARD_FIBER_LOSS_DB_KM, ULTRA_LOW_LOSS_DB_KM, d_eve_km)?;
        Self {
            kind: AttackKind::CaDos,
            g,
            p: 1.0 / g.sqrt(),
            d_eve_km,
            d_bob_km,
            f_attack,
            sigma_rin_lo,
        }
        .validated()
    }

    /// Denial-of-service attack with explicit `g <= 1` and `p < 1`.
    pub fn dos(
        g: f64,
        p: f64,
        d_eve_km: f64,
        d_bob_km: f64,
        sigma_rin_lo: f64,
        f_attack: f64,
    ) -> Result<Self> {
        Self {
            kind: AttackKind::Dos,
            g,
            p,
            d_eve_km,
            d_bob_km,
            f_attack,
            sigma_rin_lo,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let err = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.g > 0.0) {
            return err(format!("gain must be positive, got {}", self.g));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return err(format!("p must be in [0,1], got {}", self.p));
        }
        if self.d_eve_km < 0.0 || self.d_bob_km < 0.0 {
            return err("segment lengths must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.f_attack) {
            return err(format!("f_attack must be in [0,1], got {}", self.f_attack));
        }
        if self.sigma_rin_lo < 0.0 {
            return err("sigma_rin_lo must be non-negative".into());
        }
        match self.kind {
            AttackKind::Normal => {}
            AttackKind::Ca => {
                if self.p != 1.0 || self.g <= 1.0 {
                    return err(format!(
                        "CA attack needs p = 1 and g > 1, got p={}, g={}",
                        self.p, self.g
                    ));
                }
            }
            AttackKind::CaDos => {
                if self.g <= 1.0 || (self.p - 1.0 / self.g.sqrt()).abs() > 1e-9 {
                    return err(format!(
                        "CA-DoS attack needs g > 1 and p = 1/sqrt(g), got p={}, g={}",
                        self.p, self.g
                    ));
                }
            }
            AttackKind::Dos => {
                if self.p >= 1.0 || self.g > 1.0 {
                    return err(format!(
                        "DoS attack needs p < 1 and g <= 1, got p={}, g={}",
                        self.p, self.g
                    ));
                }
            }
        }
        Ok(self)
    }

    pub fn total_length_km(&self) -> f64 {
        self.d_eve_km + self.d_bob_km
    }
}

/// Monte-Carlo draws of the channel transmittance.
#[derive(Debug, Clone)]
pub struct TransmittanceSamples {
    pub values: Vec<f64>,
    pub seed: u64,
}

impl TransmittanceSamples {
    pub fn count(&self) -> usize {
        self.values.len()
    }
}

/// Exact first moments of the tampered transmittance distribution:
/// `E(sqrt(T)) = p * sqrt(g * T0)` and `E(T) = p * g * T0`.
pub fn analytic_moments(cfg: &AttackConfig, t0: f64) -> Result<(f64, f64)> {
    if !(t0 > 0.0 && t0 <= 1.0) {
        return Err(Error::InvalidInput(format!("T0 must be in (0,1], got {t0}")));
    }
    cfg.validated()?;
    let e_sqrt_t = cfg.p * (cfg.g * t0).sqrt();
    let e_t = cfg.p * cfg.g * t0;
    Ok((e_sqrt_t, e_t))
}

/// Draw `n` transmittance samples from the attack distribution.
///
/// Deterministic for a fixed seed; parallel callers should derive one RNG
/// stream per task via [`sample_transmittance_stream`].
pub fn sample_transmittance(
    cfg: &AttackConfig,
    t0: f64,
    n: usize,
    seed: u64,
) -> Result<TransmittanceSamples> {
    sample_transmittance_stream(cfg, t0, n, seed, 0)
}

/// As [`sample_transmittance`] but drawing from an independent counter-based
/// stream of the same seed (ChaCha8 keyed by `seed`, stream = `stream`).
pub fn sample_transmittance_stream(
    cfg: &AttackConfig,
    t0: f64,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<TransmittanceSamples> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    if !(t0 > 0.0 && t0 <= 1.0) {
        return Err(Error::InvalidInput(format!("T0 must be in (0,1], got {t0}")));
    }
    cfg.validated()?;

    let total = cfg.total_length_km();
    // Uniform loss along the link: T_eve = T0^(d_eve/D), T_bob = T0^(d_bob/D).
    let (t_eve, t_bob) = if total > 0.0 {
        (
            t0.powf(cfg.d_eve_km / total),
            t0.powf(cfg.d_bob_km / total),
        )
    } else {
        (1.0, 1.0)
    };
    let amplified = cfg.g * t_eve;
    let sigma = LO_MONITOR_NOISE_FACTOR * cfg.sigma_rin_lo * t_bob;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let pass = rng.gen::<f64>() < cfg.p;
        if !pass {
            values.push(0.0);
            continue;
        }
        let nu = truncated_normal(&mut rng, t_bob, sigma);
        values.push((amplified * nu).clamp(0.0, 1.0));
    }
    Ok(TransmittanceSamples { values, seed })
}

/// Normal draw truncated to [0, 1] by rejection; for the noise levels used
/// here the rejection rate is negligible.
fn truncated_normal(rng: &mut ChaCha8Rng, mean: f64, std: f64) -> f64 {
    if std == 0.0 {
        return mean.clamp(0.0, 1.0);
    }
    loop {
        let x = mean + std * standard_normal(rng);
        if (0.0..=1.0).contains(&x) {
            return x;
        }
    }
}

/// Box-Muller standard normal.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Excess noise contributed by the LO relative intensity noise,
/// `(V_A + 1)/4 * sigma`, in shot-noise units at the channel input.
pub fn rin_excess_noise(sigma_rin_lo: f64, v_a: f64) -> f64 {
    (v_a + 1.0) / 4.0 * sigma_rin_lo
}

/// Total excess noise `xi = xi_B + (V_A + 1)/4 * sigma_RIN,LO`.
pub fn total_excess_noise(xi_b: f64, sigma_rin_lo: f64, v_a: f64) -> Result<f64> {
    if xi_b < 0.0 || sigma_rin_lo < 0.0 || v_a < 0.0 {
        return Err(Error::InvalidInput(
            "noise parameters must be non-negative".into(),
        ));
    }
    Ok(xi_b + rin_excess_noise(sigma_rin_lo, v_a))
}
