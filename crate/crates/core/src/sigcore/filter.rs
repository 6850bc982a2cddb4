//! Complex band-pass IIR: a Butterworth low-pass prototype shifted to a
//! center frequency.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::SampledSignal;
use crate::error::{ensure, Result};

/// Quality factors of the two sections of a 4th-order Butterworth.
const BUTTER4_Q: [f64; 2] = [0.541_196_100_146_197, 1.306_562_964_876_376_7];
/// Normalized DC group delay of a 4th-order Butterworth, in units of `1 / wc`.
const BUTTER4_DELAY: f64 = 2.613_125_929_752_753;

#[derive(Debug, Clone)]
struct Biquad {
    b: [Complex64; 3],
    a: [Complex64; 2],
    s1: Complex64,
    s2: Complex64,
}

impl Biquad {
    #[inline]
    fn process(&mut self, x: Complex64) -> Complex64 {
        let y = self.b[0] * x + self.s1;
        self.s1 = self.b[1] * x - self.a[0] * y + self.s2;
        self.s2 = self.b[2] * x - self.a[1] * y;
        y
    }
}

/// 4th-order complex Butterworth band-pass of width `bw` around `center`.
///
/// Only positive or negative frequencies near `center` pass, so the filter
/// separates a wanted IF from its image.
#[derive(Debug, Clone)]
pub struct ComplexBandpass {
    sections: Vec<Biquad>,
    center: f64,
    bw: f64,
    sample_rate: f64,
}

impl ComplexBandpass {
    pub fn new(center: f64, bw: f64, sample_rate: f64) -> Result<Self> {
        ensure(
            sample_rate.is_finite() && sample_rate > 0.0,
            "sample_rate",
            "must be positive",
        )?;
        ensure(
            bw.is_finite() && bw > 0.0 && bw < sample_rate / 2.0,
            "bw",
            "must be positive and below half the sample rate",
        )?;
        ensure(
            center.is_finite() && center.abs() < sample_rate / 2.0,
            "center",
            "must lie inside the Nyquist band",
        )?;
        let k = (PI * (bw / 2.0) / sample_rate).tan();
        let w0 = TAU * center / sample_rate;
        let rot = Complex64::from_polar(1.0, w0);
        let sections = BUTTER4_Q
            .iter()
            .map(|&q| {
                let norm = 1.0 / (1.0 + k / q + k * k);
                let b0 = k * k * norm;
                let a1 = 2.0 * (k * k - 1.0) * norm;
                let a2 = (1.0 - k / q + k * k) * norm;
                Biquad {
                    b: [
                        Complex64::new(b0, 0.0),
                        rot * (2.0 * b0),
                        rot * rot * b0,
                    ],
                    a: [rot * a1, rot * rot * a2],
                    s1: Complex64::new(0.0, 0.0),
                    s2: Complex64::new(0.0, 0.0),
                }
            })
            .collect();
        Ok(ComplexBandpass {
            sections,
            center,
            bw,
            sample_rate,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn bw(&self) -> f64 {
        self.bw
    }

    /// Group delay at the center frequency.
    pub fn group_delay(&self) -> f64 {
        BUTTER4_DELAY / (PI * self.bw)
    }

    /// Equivalent noise bandwidth of the 4th-order Butterworth response.
    pub fn noise_bandwidth(&self) -> f64 {
        self.bw * (PI / 8.0) / (PI / 8.0).sin()
    }

    pub fn reset(&mut self) {
        for s in &mut self.sections {
            s.s1 = Complex64::new(0.0, 0.0);
            s.s2 = Complex64::new(0.0, 0.0);
        }
    }

    #[inline]
    pub fn process(&mut self, x: Complex64) -> Complex64 {
        self.sections.iter_mut().fold(x, |acc, s| s.process(acc))
    }

    pub fn process_slice(&mut self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter().map(|&v| self.process(v)).collect()
    }

    /// Filters `signal` from a reset state.
    pub fn filter(&mut self, signal: &SampledSignal) -> Result<SampledSignal> {
        ensure(
            signal.sample_rate() == self.sample_rate,
            "signal",
            "sample rate differs from the filter design rate",
        )?;
        self.reset();
        Ok(SampledSignal::from_parts(
            self.process_slice(signal.samples()),
            self.sample_rate,
            signal.epoch(),
        ))
    }

    /// Complex gain at frequency `f`.
    pub fn response(&self, f: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -TAU * f / self.sample_rate);
        self.sections
            .iter()
            .map(|s| {
                let num = s.b[0] + s.b[1] * z1 + s.b[2] * z1 * z1;
                let den = Complex64::new(1.0, 0.0) + s.a[0] * z1 + s.a[1] * z1 * z1;
                num / den
            })
            .product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unity_at_center_and_3db_edges() {
        let f = ComplexBandpass::new(1.035e6, 180e3, 32.768e6).unwrap();
        assert!((f.response(1.035e6).norm() - 1.0).abs() < 1e-9);
        let edge = f.response(1.035e6 + 90e3).norm_sqr();
        assert!((edge - 0.5).abs() < 0.01, "{edge}");
        let image = f.response(-1.035e6).norm();
        assert!(image < 1e-4, "{image}");
    }

    #[test]
    fn time_domain_matches_response() {
        let fs = 32.768e6;
        let mut f = ComplexBandpass::new(1.0e6, 1.2e6, fs).unwrap();
        let x = SampledSignal::tone(1.0, 1.4e6, 20000, fs, 0.0).unwrap();
        let y = f.filter(&x).unwrap();
        let g = f.response(1.4e6);
        let n = 19000;
        let expect = x.samples()[n] * g;
        assert!((y.samples()[n] - expect).norm() < 1e-6);
    }

    #[test]
    fn rejects_bad_design() {
        assert!(ComplexBandpass::new(0.0, 0.0, 1e6).is_err());
        assert!(ComplexBandpass::new(0.6e6, 1e3, 1e6).is_err());
    }
}
