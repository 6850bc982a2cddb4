//! IF-feedback LO calibration loop and its digital alternatives.
//!
//! The analog loop is simulated sample by sample: the carrier is mixed with
//! the ring-VCO output, band-pass filtered, sliced by a pair of Schmitt
//! triggers, compared with a reference clock in a rotational frequency
//! detector, and the resulting UP/DN pulses steer the VCO through a charge
//! pump and a capacitor.
//!
//! Sign convention: UP raises `v_ctrl`, which raises `f_lo` and lowers
//! `f_if = f_carrier - f_lo`. The detector emits UP when `f_if > f_ref`.

mod analytic;
mod charge_pump;
mod dfll;
mod engine;
mod rfd;
mod sar;
mod schmitt;
mod trajectory;
mod vco;

pub use analytic::{analytic_pole, detector_gain, rise_time_10_90};
pub use charge_pump::{charge_pump_and_filter, ChargePump};
pub use dfll::{dfll_calibrate, DfllConfig, DfllPlant, DfllResult, DfllRow};
pub use engine::{
    run_calibration, run_calibration_from, CalibrationRun, CalibrationSetup, LoopState,
};
pub use rfd::{quadrant, rfd_step, RfdEvent, RfdState};
pub use sar::{
    sar_calibrate, FnComparator, FreqComparator, IdealComparator, NoisyComparator, SarResult,
};
pub use schmitt::{comparator, schmitt, Schmitt, SchmittConfig};
pub use trajectory::{lock_detect, LockInfo, LoopTrajectory, RowEvent, TrajectoryRow};
pub use vco::{Vco, VcoModel};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Charge pump, loop filter and VCO gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopParams {
    /// DN current; UP current is `i_cp * cp_mismatch`.
    pub i_cp: f64,
    pub c_loop: f64,
    /// Series resistor of the loop filter, 0 for a pure capacitor.
    pub r_loop: f64,
    /// VCO gain in Hz/V.
    pub k_vco: f64,
    /// Reference clock, equal to the target IF.
    pub f_ref: f64,
    /// Extra frequency tolerance accepted as locked.
    pub dead_zone: f64,
    /// CP pulse width. `None` means one reference period.
    pub pulse_width: Option<f64>,
    /// UP/DN current ratio.
    pub cp_mismatch: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Control voltage at which the VCO sits at its nominal frequency.
    pub v_mid: f64,
}

impl Default for LoopParams {
    fn default() -> Self {
        LoopParams {
            i_cp: 5e-6,
            c_loop: 80e-12,
            r_loop: 0.0,
            k_vco: 2e6,
            f_ref: 1.035e6,
            dead_zone: 0.0,
            pulse_width: None,
            cp_mismatch: 1.0,
            v_min: 0.0,
            v_max: 1.2,
            v_mid: 0.6,
        }
    }
}

/// Low-frequency synthesizer output range.
pub const F_REF_RANGE: (f64, f64) = (0.5e6, 1.5e6);

impl LoopParams {
    pub fn validate(&self) -> Result<()> {
        ensure(self.i_cp > 0.0 && self.i_cp.is_finite(), "i_cp", "must be positive")?;
        ensure(self.c_loop > 0.0 && self.c_loop.is_finite(), "c_loop", "must be positive")?;
        ensure(self.r_loop >= 0.0 && self.r_loop.is_finite(), "r_loop", "must be non-negative")?;
        ensure(self.k_vco >= 0.0 && self.k_vco.is_finite(), "k_vco", "must be non-negative")?;
        ensure(self.f_ref > 0.0 && self.f_ref.is_finite(), "f_ref", "must be positive")?;
        ensure(self.dead_zone >= 0.0, "dead_zone", "must be non-negative")?;
        ensure(
            self.cp_mismatch > 0.0 && self.cp_mismatch.is_finite(),
            "cp_mismatch",
            "must be positive",
        )?;
        if let Some(w) = self.pulse_width {
            ensure(w > 0.0 && w.is_finite(), "pulse_width", "must be positive")?;
        }
        ensure(
            self.v_min < self.v_max && (self.v_min..=self.v_max).contains(&self.v_mid),
            "v_mid",
            "rails must satisfy v_min <= v_mid <= v_max with v_min < v_max",
        )
    }

    pub fn pulse_width(&self) -> f64 {
        self.pulse_width.unwrap_or(1.0 / self.f_ref)
    }

    pub fn i_up(&self) -> f64 {
        self.i_cp * self.cp_mismatch
    }

    /// LO frequency step caused by one full CP pulse, using the larger of the
    /// two currents.
    pub fn cp_quantum(&self) -> f64 {
        self.k_vco * self.i_cp.max(self.i_up()) * self.pulse_width() / self.c_loop
    }

    /// Frequency tolerance for lock: dead zone plus one CP quantum.
    pub fn lock_tolerance(&self) -> f64 {
        self.dead_zone + self.cp_quantum()
    }

    /// LO tuning span on either side of the nominal frequency.
    pub fn tuning_range(&self) -> (f64, f64) {
        (
            self.k_vco * (self.v_min - self.v_mid),
            self.k_vco * (self.v_max - self.v_mid),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_quantum_and_range() {
        let p = LoopParams::default();
        p.validate().unwrap();
        let q = 2e6 * 5e-6 / 1.035e6 / 80e-12;
        assert!((p.cp_quantum() - q).abs() < 1e-6);
        assert!((p.cp_quantum() - 120.77e3).abs() < 10.0);
        let (lo, hi) = p.tuning_range();
        assert!(hi >= 0.9e6 && -lo >= 0.9e6);
    }

    #[test]
    fn validation() {
        for bad in [
            LoopParams { i_cp: 0.0, ..Default::default() },
            LoopParams { c_loop: -1.0, ..Default::default() },
            LoopParams { f_ref: 0.0, ..Default::default() },
            LoopParams { dead_zone: -1.0, ..Default::default() },
            LoopParams { v_mid: 2.0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
