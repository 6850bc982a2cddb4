use std::cmp::Ordering;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::util::rng_from_seed;

/// Compares a trial LO frequency against the calibration target.
pub trait FreqComparator {
    /// `Greater` when `f_lo` lies above the target.
    fn compare(&mut self, f_lo: f64) -> Ordering;

    /// The target, when known, for residual reporting.
    fn target(&self) -> Option<f64> {
        None
    }
}

/// Noise-free comparator.
#[derive(Debug, Clone, Copy)]
pub struct IdealComparator {
    pub target: f64,
}

impl FreqComparator for IdealComparator {
    fn compare(&mut self, f_lo: f64) -> Ordering {
        f_lo.total_cmp(&self.target)
    }

    fn target(&self) -> Option<f64> {
        Some(self.target)
    }
}

/// Comparator whose decision threshold jitters with Gaussian noise.
#[derive(Debug, Clone)]
pub struct NoisyComparator {
    pub target: f64,
    noise: Normal<f64>,
    rng: ChaCha8Rng,
}

impl NoisyComparator {
    pub fn new(target: f64, sigma_hz: f64, seed: u64) -> Result<Self> {
        ensure(sigma_hz >= 0.0 && sigma_hz.is_finite(), "sigma_hz", "must be non-negative")?;
        Ok(NoisyComparator {
            target,
            noise: Normal::new(0.0, sigma_hz).expect("validated sigma"),
            rng: rng_from_seed(seed),
        })
    }
}

impl FreqComparator for NoisyComparator {
    fn compare(&mut self, f_lo: f64) -> Ordering {
        let n = self.noise.sample(&mut self.rng);
        f_lo.total_cmp(&(self.target + n))
    }

    fn target(&self) -> Option<f64> {
        Some(self.target)
    }
}

/// Wraps a closure as a comparator with no known target.
pub struct FnComparator<F: FnMut(f64) -> Ordering>(pub F);

impl<F: FnMut(f64) -> Ordering> FreqComparator for FnComparator<F> {
    fn compare(&mut self, f_lo: f64) -> Ordering {
        (self.0)(f_lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SarResult {
    pub code: u32,
    /// Center of the selected code cell.
    pub frequency: f64,
    pub comparisons: u32,
    pub lsb_hz: f64,
    /// `|frequency - target|` when the comparator knows its target.
    pub residual_hz: Option<f64>,
    /// Residual above two LSBs: the comparator was not monotone over the band
    /// or the target lies outside it.
    pub flagged: bool,
}

/// Binary search of an `n_bits` tuning code over `band`.
///
/// Code `c` tunes the LO to the center of cell `c`, `lo + (c + 1/2) * lsb`.
/// Each step tests the lower edge of the trial cell and keeps the bit when
/// that edge is not above the target.
pub fn sar_calibrate<C: FreqComparator>(
    comparator: &mut C,
    n_bits: u32,
    band: (f64, f64),
) -> Result<SarResult> {
    ensure((1..=31).contains(&n_bits), "n_bits", "must be between 1 and 31")?;
    let (lo, hi) = band;
    ensure(
        lo.is_finite() && hi.is_finite() && hi > lo,
        "band",
        "upper edge must exceed lower edge",
    )?;
    let lsb = (hi - lo) / f64::from(1u32 << n_bits);
    let mut code = 0u32;
    let mut comparisons = 0;
    for bit in (0..n_bits).rev() {
        let trial = code | (1 << bit);
        comparisons += 1;
        if comparator.compare(lo + f64::from(trial) * lsb) != Ordering::Greater {
            code = trial;
        }
    }
    let frequency = lo + (f64::from(code) + 0.5) * lsb;
    let residual_hz = comparator.target().map(|t| (frequency - t).abs());
    Ok(SarResult {
        code,
        frequency,
        comparisons,
        lsb_hz: lsb,
        residual_hz,
        flagged: residual_hz.is_some_and(|r| r > 2.0 * lsb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BAND: (f64, f64) = (0.891e9, 0.909e9);

    #[test]
    fn eight_bits_over_two_percent() {
        for target in [0.8915e9, 0.9e9, 0.90123e9, 0.9089e9] {
            let mut c = IdealComparator { target };
            let r = sar_calibrate(&mut c, 8, BAND).unwrap();
            assert_eq!(r.comparisons, 8);
            assert!(r.residual_hz.unwrap() <= 18e6 / 512.0 + 1e-6);
            assert!(!r.flagged);
        }
    }

    #[test]
    fn band_edges() {
        let r = sar_calibrate(&mut IdealComparator { target: 1e12 }, 8, BAND).unwrap();
        assert_eq!(r.code, 255);
        assert!(r.flagged);
        let r = sar_calibrate(&mut IdealComparator { target: 0.0 }, 8, BAND).unwrap();
        assert_eq!(r.code, 0);
    }

    #[test]
    fn one_bit_one_comparison() {
        let mut calls = 0;
        let mut c = FnComparator(|f: f64| {
            calls += 1;
            f.total_cmp(&0.9e9)
        });
        let r = sar_calibrate(&mut c, 1, BAND).unwrap();
        assert_eq!(r.comparisons, 1);
        assert_eq!(calls, 1);
        assert!(r.residual_hz.is_none());
    }

    #[test]
    fn non_monotone_comparator_flagged() {
        let mut c = NoisyComparator::new(0.9e9, 5e6, 3).unwrap();
        let flagged = (0..20)
            .filter(|_| sar_calibrate(&mut c, 8, BAND).unwrap().flagged)
            .count();
        assert!(flagged > 0);
        assert!(sar_calibrate(&mut IdealComparator { target: 0.9e9 }, 0, BAND).is_err());
    }
}
