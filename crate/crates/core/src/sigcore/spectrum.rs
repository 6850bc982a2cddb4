//! FFT helpers for tone and band-power measurements.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Forward FFT of `x`, unnormalized.
pub fn fft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    }
    buf
}

/// Inverse FFT of `x`, scaled by `1 / len`.
pub fn ifft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if !buf.is_empty() {
        FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }
    buf
}

/// Signed frequency of FFT bin `k` out of `n`.
pub fn bin_frequency(k: usize, n: usize, sample_rate: f64) -> f64 {
    let k = if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    };
    k * sample_rate / n as f64
}

/// Frequency of the strongest FFT bin, in `[-fs/2, fs/2)`.
pub fn peak_frequency(x: &[Complex64], sample_rate: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    let spec = fft(x);
    let (k, _) = spec
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .expect("non-empty");
    Ok(bin_frequency(k, x.len(), sample_rate))
}

/// Fraction of mean-square power with frequency in `[lo, hi]`.
///
/// Multiply by the mean square of `x` to get absolute in-band power.
pub fn band_fraction(x: &[Complex64], sample_rate: f64, lo: f64, hi: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    let spec = fft(x);
    let n = x.len();
    let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let inband: f64 = spec
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = bin_frequency(*k, n, sample_rate);
            f >= lo && f <= hi
        })
        .map(|(_, v)| v.norm_sqr())
        .sum();
    Ok(inband / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn bins_are_signed() {
        assert_eq!(bin_frequency(0, 8, 8.0), 0.0);
        assert_eq!(bin_frequency(3, 8, 8.0), 3.0);
        assert_eq!(bin_frequency(4, 8, 8.0), -4.0);
        assert_eq!(bin_frequency(7, 8, 8.0), -1.0);
    }

    #[test]
    fn negative_tone_peak_and_roundtrip() {
        let fs = 1e6;
        let x: Vec<Complex64> = (0..1024)
            .map(|n| Complex64::from_polar(1.0, -TAU * 125e3 * n as f64 / fs))
            .collect();
        assert!((peak_frequency(&x, fs).unwrap() + 125e3).abs() < 1e-6);
        let back = ifft(&fft(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
        let frac = band_fraction(&x, fs, -130e3, -120e3).unwrap();
        assert!((frac - 1.0).abs() < 1e-12);
    }
}
