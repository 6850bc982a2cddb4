use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{dbm_to_watts, SampledSignal, REF_IMPEDANCE_OHMS, THERMAL_FLOOR_DBM_HZ};
use crate::error::{ensure, Result};
use crate::util::rng_from_seed;

/// Additive noise level referred to the antenna.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Noise density in dBm/Hz.
    pub density: f64,
    /// Extra noise figure on top of `density`, in dB.
    pub extra_nf: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            density: THERMAL_FLOOR_DBM_HZ,
            extra_nf: 0.0,
        }
    }
}

impl NoiseSpec {
    pub fn with_nf(extra_nf: f64) -> Self {
        NoiseSpec {
            extra_nf,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.density.is_finite() && self.density <= -100.0,
            "density",
            format!("must be at most -100 dBm/Hz, got {}", self.density),
        )?;
        ensure(
            self.extra_nf.is_finite() && self.extra_nf >= 0.0,
            "extra_nf",
            format!("must be non-negative, got {}", self.extra_nf),
        )
    }
}

/// Total noise power in dBm over `bandwidth`.
pub fn noise_power(noise: &NoiseSpec, bandwidth: f64) -> f64 {
    noise.density + 10.0 * bandwidth.log10() + noise.extra_nf
}

/// Adds complex white Gaussian noise of total power [`noise_power`].
///
/// The noise is white over the full simulation band, so its measured power
/// over all samples equals `density + 10 log10(bandwidth) + extra_nf`.
pub fn add_awgn(
    signal: &SampledSignal,
    noise: &NoiseSpec,
    bandwidth: f64,
    seed: u64,
) -> Result<SampledSignal> {
    ensure(
        bandwidth.is_finite() && bandwidth > 0.0,
        "bandwidth",
        "must be positive",
    )?;
    noise.validate()?;
    let var = dbm_to_watts(noise_power(noise, bandwidth)) * REF_IMPEDANCE_OHMS;
    let sigma = (var / 2.0).sqrt();
    let mut rng = rng_from_seed(seed);
    let samples = signal
        .samples()
        .iter()
        .map(|s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex64::new(re * sigma, im * sigma)
        })
        .collect();
    Ok(SampledSignal::from_parts(
        samples,
        signal.sample_rate(),
        signal.epoch(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::measure_power;

    #[test]
    fn thermal_power_in_180k() {
        let p = noise_power(&NoiseSpec::default(), 180e3);
        assert!((p - (-121.45)).abs() < 0.01, "{p}");
    }

    #[test]
    fn measured_level_with_nf() {
        let z = SampledSignal::zeros(1 << 20, 32.768e6, 0.0).unwrap();
        let n = add_awgn(&z, &NoiseSpec::with_nf(12.0), 180e3, 3).unwrap();
        let p = measure_power(&n, REF_IMPEDANCE_OHMS).unwrap().0;
        assert!((p - (-109.45)).abs() < 0.3, "{p}");
    }

    #[test]
    fn deterministic() {
        let z = SampledSignal::zeros(1000, 1e6, 0.0).unwrap();
        let a = add_awgn(&z, &NoiseSpec::default(), 1e5, 9).unwrap();
        let b = add_awgn(&z, &NoiseSpec::default(), 1e5, 9).unwrap();
        let c = add_awgn(&z, &NoiseSpec::default(), 1e5, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_inputs() {
        let z = SampledSignal::zeros(4, 1e6, 0.0).unwrap();
        assert!(add_awgn(&z, &NoiseSpec::default(), 0.0, 0).is_err());
        assert!(add_awgn(&z, &NoiseSpec::with_nf(-1.0), 1e3, 0).is_err());
        let hot = NoiseSpec {
            density: -50.0,
            extra_nf: 0.0,
        };
        assert!(add_awgn(&z, &hot, 1e3, 0).is_err());
    }
}
