use std::fmt;

use serde::{Deserialize, Serialize};

use super::SampledSignal;
use crate::error::{ensure, Error, Result};

/// A power level in dBm. `-inf` means "below floor" (exactly zero watts).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerDbm(pub f64);

impl PowerDbm {
    pub const BELOW_FLOOR: PowerDbm = PowerDbm(f64::NEG_INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn to_watts(self) -> f64 {
        dbm_to_watts(self.0)
    }

    pub fn from_watts(watts: f64) -> PowerDbm {
        PowerDbm(watts_to_dbm(watts))
    }

    pub fn is_below_floor(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl fmt::Display for PowerDbm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_below_floor() {
            write!(f, "below floor")
        } else {
            write!(f, "{:.2} dBm", self.0)
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    if watts <= 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * watts.log10() + 30.0
    }
}

/// Mean-square amplitude of `signal` into `ref_impedance`, in dBm.
///
/// A complex envelope of amplitude `A` carries `|A|^2 / R` watts.
pub fn measure_power(signal: &SampledSignal, ref_impedance: f64) -> Result<PowerDbm> {
    ensure(
        ref_impedance > 0.0 && ref_impedance.is_finite(),
        "ref_impedance",
        "must be positive",
    )?;
    let ms = signal.mean_square().ok_or(Error::EmptySignal)?;
    Ok(PowerDbm::from_watts(ms / ref_impedance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::{Complex64, REF_IMPEDANCE_OHMS};

    #[test]
    fn conversions() {
        assert_eq!(dbm_to_watts(0.0), 1e-3);
        assert_eq!(dbm_to_watts(30.0), 1.0);
        let w = dbm_to_watts(-88.45);
        assert!((w - 1.429e-12).abs() / 1.429e-12 < 1e-3, "{w}");
        for dbm in [-174.0, -88.45, -30.0, 0.0, 13.0103, 47.3] {
            let back = watts_to_dbm(dbm_to_watts(dbm));
            assert!((back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0));
        }
        assert!(PowerDbm::from_watts(0.0).is_below_floor());
        assert_eq!(PowerDbm::BELOW_FLOOR.to_string(), "below floor");
    }

    #[test]
    fn unit_tone_into_50_ohm() {
        let s = SampledSignal::tone(1.0, 1e5, 4096, 1e7, 0.0).unwrap();
        let p = measure_power(&s, REF_IMPEDANCE_OHMS).unwrap();
        // 10 log10(1 / 50 * 1000)
        assert!((p.0 - 13.0103).abs() < 1e-3, "{}", p.0);
    }

    #[test]
    fn zero_and_empty() {
        let z = SampledSignal::zeros(16, 1e6, 0.0).unwrap();
        assert!(measure_power(&z, 50.0).unwrap().is_below_floor());
        let e = SampledSignal::zeros(0, 1e6, 0.0).unwrap();
        assert_eq!(measure_power(&e, 50.0).unwrap_err(), Error::EmptySignal);
    }

    #[test]
    fn doubling_amplitude_adds_6db() {
        let s = SampledSignal::new(
            (0..100)
                .map(|n| Complex64::new((n as f64).sin(), (n as f64 * 0.3).cos()))
                .collect(),
            1e6,
            0.0,
        )
        .unwrap();
        let p1 = measure_power(&s, 50.0).unwrap().0;
        let p2 = measure_power(&s.scaled(2.0), 50.0).unwrap().0;
        assert!((p2 - p1 - 20.0 * 2f64.log10()).abs() < 1e-12);
    }
}
