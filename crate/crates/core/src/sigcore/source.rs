use std::f64::consts::TAU;

use num_complex::Complex64;

use super::{PowerDbm, SampledSignal};
use crate::error::{ensure, Error, Result};
use crate::linecodec::BitStream;

/// Rectangular on-off keyed carrier with a static frequency offset `cfo`.
///
/// Bit `k` occupies `[k / symbol_rate, (k + 1) / symbol_rate)`. A one is sent
/// at the amplitude that delivers `power` into `ref_impedance`.
pub fn make_ook_carrier(
    bits: &BitStream,
    symbol_rate: f64,
    cfo: f64,
    power: PowerDbm,
    sample_rate: f64,
    ref_impedance: f64,
) -> Result<SampledSignal> {
    ensure(
        symbol_rate.is_finite() && symbol_rate > 0.0,
        "symbol_rate",
        "must be positive",
    )?;
    ensure(
        ref_impedance.is_finite() && ref_impedance > 0.0,
        "ref_impedance",
        "must be positive",
    )?;
    ensure(cfo.is_finite(), "cfo", "must be finite")?;
    let required = 8.0 * (cfo.abs() + symbol_rate);
    if !(sample_rate >= required) {
        return Err(Error::SampleRateTooLow {
            sample_rate,
            required,
        });
    }
    let amplitude = if power.is_below_floor() {
        0.0
    } else {
        ensure(power.0.is_finite(), "power", "must be finite")?;
        (power.to_watts() * ref_impedance).sqrt()
    };
    let bits = bits.as_slice();
    let len = (bits.len() as f64 * sample_rate / symbol_rate).round() as usize;
    let samples = (0..len)
        .map(|n| {
            let t = n as f64 / sample_rate;
            let k = ((t * symbol_rate) as usize).min(bits.len() - 1);
            if bits[k] == 1 {
                Complex64::from_polar(amplitude, TAU * cfo * t)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(SampledSignal::from_parts(samples, sample_rate, 0.0))
}
