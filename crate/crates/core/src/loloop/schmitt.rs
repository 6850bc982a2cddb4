use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Hysteresis thresholds, in PGA-normalized amplitude units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchmittConfig {
    pub v_high: f64,
    pub v_low: f64,
}

impl Default for SchmittConfig {
    fn default() -> Self {
        SchmittConfig {
            v_high: 0.3,
            v_low: -0.3,
        }
    }
}

impl SchmittConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.v_high.is_finite() && self.v_low.is_finite() && self.v_high > self.v_low,
            "v_high",
            "must exceed v_low",
        )
    }

    pub fn window(&self) -> f64 {
        self.v_high - self.v_low
    }
}

/// Stateful Schmitt trigger.
#[derive(Debug, Clone, Copy)]
pub struct Schmitt {
    cfg: SchmittConfig,
    state: bool,
}

impl Schmitt {
    pub fn new(cfg: SchmittConfig, initial: bool) -> Self {
        Schmitt { cfg, state: initial }
    }

    #[inline]
    pub fn step(&mut self, x: f64) -> bool {
        if x > self.cfg.v_high {
            self.state = true;
        } else if x < self.cfg.v_low {
            self.state = false;
        }
        self.state
    }

    pub fn state(&self) -> bool {
        self.state
    }
}

/// Slices `x` with hysteresis, starting low.
pub fn schmitt(x: &[f64], cfg: &SchmittConfig) -> Result<Vec<u8>> {
    cfg.validate()?;
    let mut s = Schmitt::new(*cfg, false);
    Ok(x.iter().map(|&v| u8::from(s.step(v))).collect())
}

/// Plain zero-hysteresis comparator at `threshold`.
pub fn comparator(x: &[f64], threshold: f64) -> Vec<u8> {
    x.iter().map(|&v| u8::from(v > threshold)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::TAU;

    fn transitions(b: &[u8]) -> usize {
        b.windows(2).filter(|w| w[0] != w[1]).count()
    }

    #[test]
    fn holds_inside_band() {
        let cfg = SchmittConfig::default();
        assert!(schmitt(&[0.1; 100], &cfg).unwrap().iter().all(|&b| b == 0));
        let mut s = Schmitt::new(cfg, true);
        assert!((0..100).all(|_| s.step(-0.2)));
        assert!(SchmittConfig { v_high: 0.0, v_low: 0.0 }.validate().is_err());
    }

    #[test]
    fn sine_becomes_square() {
        let fs = 32.768e6;
        let f = 1.035e6;
        let n = 32768;
        let x: Vec<f64> = (0..n).map(|k| (TAU * f * k as f64 / fs).sin()).collect();
        let out = schmitt(&x, &SchmittConfig::default()).unwrap();
        let rising = out.windows(2).filter(|w| w[0] == 0 && w[1] == 1).count() as f64;
        let expected = f * n as f64 / fs;
        assert!((rising - expected).abs() <= 1.0, "{rising} vs {expected}");
    }

    #[test]
    fn noisy_ramp_is_chatter_free() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let x: Vec<f64> = (0..10_000)
            .map(|k| -1.0 + 2.0 * k as f64 / 10_000.0 + noise.sample(&mut rng))
            .collect();
        assert_eq!(transitions(&schmitt(&x, &SchmittConfig::default()).unwrap()), 1);
        assert!(transitions(&comparator(&x, 0.0)) > 1);
    }
}
