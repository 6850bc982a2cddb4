use std::f64::consts::TAU;

use super::LoopParams;
use crate::error::{ensure, Result};

/// Pulses per reference cycle per Hz of frequency error for the rotational
/// detector: one pulse per full relative turn.
pub fn detector_gain(f_ref: f64) -> f64 {
    1.0 / f_ref
}

/// Closed-loop pole of the linearized first-order loop, in Hz.
///
/// The detector emits `detector_gain * f_ref * e` pulses per second for a
/// frequency error `e`, and each pulse moves the LO by one CP quantum, so the
/// error decays as `exp(-detector_gain * f_ref * quantum * t)`.
pub fn analytic_pole(params: &LoopParams, detector_gain: f64) -> Result<f64> {
    params.validate()?;
    ensure(
        detector_gain >= 0.0 && detector_gain.is_finite(),
        "detector_gain",
        "must be non-negative",
    )?;
    Ok(detector_gain * params.f_ref * params.cp_quantum() / TAU)
}

/// 10-90% rise time of a first-order response with pole `pole_hz`.
pub fn rise_time_10_90(pole_hz: f64) -> f64 {
    (9f64).ln() / (TAU * pole_hz)
}
