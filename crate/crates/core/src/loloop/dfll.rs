use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::util::rng_from_seed;

/// Digitally controlled oscillator seen through the mixer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DfllPlant {
    /// IF at code 0.
    pub f_if0: f64,
    /// IF decrease per code step.
    pub dco_step_hz: f64,
    pub code_min: i64,
    pub code_max: i64,
}

impl Default for DfllPlant {
    fn default() -> Self {
        DfllPlant {
            f_if0: 1.0e6,
            dco_step_hz: 10e3,
            code_min: -512,
            code_max: 511,
        }
    }
}

impl DfllPlant {
    pub fn f_if(&self, code: i64) -> f64 {
        self.f_if0 - code as f64 * self.dco_step_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DfllConfig {
    pub counter_window: f64,
    pub target_count: u64,
    /// Codes per count of error. `None` picks half the deadbeat gain.
    pub gain: Option<f64>,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for DfllConfig {
    fn default() -> Self {
        DfllConfig {
            counter_window: 10e-6,
            target_count: 10,
            gain: None,
            max_iter: 64,
            seed: 0,
        }
    }
}

impl DfllConfig {
    /// Frequency resolution of one count.
    pub fn quantum(&self) -> f64 {
        1.0 / self.counter_window
    }

    pub fn target_hz(&self) -> f64 {
        self.target_count as f64 / self.counter_window
    }

    /// Gain that cancels the error in one step for a noiseless count.
    pub fn deadbeat_gain(&self, plant: &DfllPlant) -> f64 {
        self.quantum() / plant.dco_step_hz
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfllRow {
    pub iter: usize,
    pub code: i64,
    pub count: u64,
    pub f_if: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfllResult {
    pub rows: Vec<DfllRow>,
    pub final_code: i64,
    /// `|f_if - target|` after the last update.
    pub residual_hz: f64,
    /// Residual within one counter quantum.
    pub converged: bool,
    /// Peak-to-peak half amplitude of `f_if` over the second half, in quanta.
    pub amplitude_quanta: f64,
    pub limit_cycle: bool,
}

/// Counter-based frequency-locked loop.
///
/// Each iteration counts IF cycles in the window with a random counter phase,
/// so the count is `floor(f_if * window + u)` with `u` uniform in `[0, 1)`,
/// then moves the code by `gain * (count - target_count)`.
pub fn dfll_calibrate(plant: &DfllPlant, cfg: &DfllConfig) -> Result<DfllResult> {
    ensure(
        cfg.counter_window > 0.0 && cfg.counter_window.is_finite(),
        "counter_window",
        "must be positive",
    )?;
    ensure(cfg.max_iter >= 2, "max_iter", "must be at least 2")?;
    ensure(plant.dco_step_hz > 0.0, "dco_step_hz", "must be positive")?;
    ensure(plant.code_min <= 0 && plant.code_max >= 0, "code_min", "range must contain 0")?;
    let gain = cfg.gain.unwrap_or(0.5 * cfg.deadbeat_gain(plant));
    ensure(gain >= 0.0 && gain.is_finite(), "gain", "must be non-negative")?;

    let mut rng = rng_from_seed(cfg.seed);
    let mut code = 0i64;
    let mut rows = Vec::with_capacity(cfg.max_iter);
    for iter in 0..cfg.max_iter {
        let f_if = plant.f_if(code);
        let u: f64 = rng.random();
        let count = (f_if * cfg.counter_window + u).floor().max(0.0) as u64;
        rows.push(DfllRow {
            iter,
            code,
            count,
            f_if,
        });
        let err = count as f64 - cfg.target_count as f64;
        code = (code + (gain * err).round() as i64).clamp(plant.code_min, plant.code_max);
    }
    let target = cfg.target_hz();
    let final_f = plant.f_if(code);
    let residual_hz = (final_f - target).abs();
    let half = &rows[rows.len() / 2..];
    let (lo, hi) = half.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.f_if), hi.max(r.f_if))
    });
    let amplitude_quanta = (hi - lo) / 2.0 / cfg.quantum();
    Ok(DfllResult {
        rows,
        final_code: code,
        residual_hz,
        converged: residual_hz <= cfg.quantum(),
        amplitude_quanta,
        limit_cycle: amplitude_quanta > 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn on_target_holds_code() {
        let plant = DfllPlant::default();
        let cfg = DfllConfig::default();
        let r = dfll_calibrate(&plant, &cfg).unwrap();
        assert!(r.rows.iter().all(|row| row.code.abs() <= 5));
        assert!(r.converged);
    }

    #[test]
    fn large_error_converges() {
        let plant = DfllPlant {
            f_if0: 1.0e6 + 450e3,
            ..Default::default()
        };
        for seed in 0..10 {
            let cfg = DfllConfig {
                seed,
                ..Default::default()
            };
            let r = dfll_calibrate(&plant, &cfg).unwrap();
            assert!(r.converged, "seed {seed}: {}", r.residual_hz);
            assert!(!r.limit_cycle);
        }
    }

    #[test]
    fn excessive_gain_flags_limit_cycle() {
        let plant = DfllPlant {
            f_if0: 1.0e6 + 450e3,
            ..Default::default()
        };
        let base = DfllConfig::default();
        let cfg = DfllConfig {
            gain: Some(10.0 * 0.5 * base.deadbeat_gain(&plant)),
            ..base
        };
        let r = dfll_calibrate(&plant, &cfg).unwrap();
        assert!(r.limit_cycle, "{}", r.amplitude_quanta);
    }
}
