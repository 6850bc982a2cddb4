use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::util::rng_from_seed;

/// Free-running ring VCO after the coarse lookup table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VcoModel {
    /// Center frequency at `v_ctrl = v_mid`.
    pub f_nominal: f64,
    /// Static frequency error of the uncalibrated oscillator.
    pub init_offset_ppm: f64,
    /// Random-walk intensity in ppm per square-root second.
    pub drift: f64,
    /// Output duty cycle, fixed at one half.
    pub duty: f64,
}

impl Default for VcoModel {
    fn default() -> Self {
        VcoModel {
            f_nominal: 900e6 - 1.035e6,
            init_offset_ppm: 0.0,
            drift: 0.0,
            duty: 0.5,
        }
    }
}

impl VcoModel {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.f_nominal > 0.0 && self.f_nominal.is_finite(),
            "f_nominal",
            "must be positive",
        )?;
        ensure(self.init_offset_ppm.is_finite(), "init_offset_ppm", "must be finite")?;
        ensure(self.drift >= 0.0 && self.drift.is_finite(), "drift", "must be non-negative")?;
        ensure(self.duty == 0.5, "duty", "the ring VCO output is fixed at 50%")
    }

    /// LO frequency for a given control voltage and drift state.
    pub fn frequency(&self, v_ctrl: f64, k_vco: f64, v_mid: f64, drift_ppm: f64) -> f64 {
        self.f_nominal * (1.0 + (self.init_offset_ppm + drift_ppm) * 1e-6)
            + k_vco * (v_ctrl - v_mid)
    }
}

/// Running oscillator. The phase is tracked relative to `rf_center`, so
/// `iq()` is the LO as a baseband phasor.
#[derive(Debug, Clone)]
pub struct Vco {
    model: VcoModel,
    k_vco: f64,
    v_mid: f64,
    rf_center: f64,
    phase: f64,
    drift_ppm: f64,
    f_lo: f64,
    rng: ChaCha8Rng,
}

impl Vco {
    pub fn new(model: VcoModel, k_vco: f64, v_mid: f64, rf_center: f64, seed: u64) -> Self {
        let f_lo = model.frequency(v_mid, k_vco, v_mid, 0.0);
        Vco {
            model,
            k_vco,
            v_mid,
            rf_center,
            phase: 0.0,
            drift_ppm: 0.0,
            f_lo,
            rng: rng_from_seed(seed),
        }
    }

    pub fn with_state(mut self, phase: f64, drift_ppm: f64) -> Self {
        self.phase = phase;
        self.drift_ppm = drift_ppm;
        self
    }

    /// Advances one sample and returns `f_lo`.
    #[inline]
    pub fn step(&mut self, v_ctrl: f64, dt: f64) -> f64 {
        self.f_lo = self
            .model
            .frequency(v_ctrl, self.k_vco, self.v_mid, self.drift_ppm);
        self.phase = (self.phase + TAU * (self.f_lo - self.rf_center) * dt).rem_euclid(TAU);
        self.f_lo
    }

    /// Adds one random-walk increment covering `dt`.
    pub fn drift_step(&mut self, dt: f64) {
        if self.model.drift > 0.0 {
            let n: f64 = StandardNormal.sample(&mut self.rng);
            self.drift_ppm += self.model.drift * dt.sqrt() * n;
        }
    }

    /// Quadrature LO phasor `I + jQ`.
    #[inline]
    pub fn iq(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn drift_ppm(&self) -> f64 {
        self.drift_ppm
    }

    pub fn f_lo(&self) -> f64 {
        self.f_lo
    }
}
