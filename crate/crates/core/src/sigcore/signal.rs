use std::f64::consts::TAU;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Complex baseband sample stream.
///
/// `epoch` is the time of the first sample. Sample `n` sits at
/// `epoch + n / sample_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledSignal {
    samples: Vec<Complex64>,
    sample_rate: f64,
    epoch: f64,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, epoch: f64) -> Result<Self> {
        ensure(
            sample_rate.is_finite() && sample_rate > 0.0,
            "sample_rate",
            format!("must be positive and finite, got {sample_rate}"),
        )?;
        ensure(epoch.is_finite(), "epoch", "must be finite")?;
        if let Some(index) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(SampledSignal {
            samples,
            sample_rate,
            epoch,
        })
    }

    /// Builds a signal whose samples are known to be finite.
    pub(crate) fn from_parts(samples: Vec<Complex64>, sample_rate: f64, epoch: f64) -> Self {
        debug_assert!(sample_rate > 0.0);
        debug_assert!(samples.iter().all(|s| s.re.is_finite() && s.im.is_finite()));
        SampledSignal {
            samples,
            sample_rate,
            epoch,
        }
    }

    pub fn zeros(len: usize, sample_rate: f64, epoch: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate, epoch)
    }

    /// A constant-amplitude complex tone `amplitude * exp(j 2 pi f t)`.
    pub fn tone(
        amplitude: f64,
        freq: f64,
        len: usize,
        sample_rate: f64,
        epoch: f64,
    ) -> Result<Self> {
        let samples = (0..len)
            .map(|n| {
                let t = epoch + n as f64 / sample_rate;
                Complex64::from_polar(amplitude, TAU * freq * t)
            })
            .collect();
        Self::new(samples, sample_rate, epoch)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn epoch(&self) -> f64 {
        self.epoch
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn time_of(&self, index: usize) -> f64 {
        self.epoch + index as f64 / self.sample_rate
    }

    /// Index of the first sample at or after `t`, clamped to `[0, len]`.
    pub fn index_at(&self, t: f64) -> usize {
        let idx = ((t - self.epoch) * self.sample_rate - 1e-6).ceil();
        if idx <= 0.0 {
            0
        } else {
            (idx as usize).min(self.samples.len())
        }
    }

    /// Samples in `range`, keeping absolute time.
    pub fn slice(&self, range: Range<usize>) -> SampledSignal {
        let start = range.start.min(self.len());
        let end = range.end.clamp(start, self.len());
        SampledSignal {
            samples: self.samples[start..end].to_vec(),
            sample_rate: self.sample_rate,
            epoch: self.time_of(start),
        }
    }

    /// Multiplies every sample by a real gain.
    pub fn scaled(&self, gain: f64) -> SampledSignal {
        SampledSignal {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
            epoch: self.epoch,
        }
    }

    /// Sample-wise sum of two signals with identical timing.
    pub fn add(&self, other: &SampledSignal) -> Result<SampledSignal> {
        ensure(
            self.sample_rate == other.sample_rate && self.len() == other.len(),
            "other",
            "signals must share sample rate and length",
        )?;
        ensure(
            (self.epoch - other.epoch).abs() <= 0.5 / self.sample_rate,
            "other",
            "signals must share epoch",
        )?;
        Ok(SampledSignal {
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(a, b)| a + b)
                .collect(),
            sample_rate: self.sample_rate,
            epoch: self.epoch,
        })
    }

    /// Concatenates `other` after `self`. The epoch of `other` is ignored.
    pub fn concat(&self, other: &SampledSignal) -> Result<SampledSignal> {
        ensure(
            self.sample_rate == other.sample_rate,
            "other",
            "signals must share sample rate",
        )?;
        let mut samples = self.samples.clone();
        samples.extend_from_slice(&other.samples);
        Ok(SampledSignal {
            samples,
            sample_rate: self.sample_rate,
            epoch: self.epoch,
        })
    }

    /// Mean of `|x|^2` over all samples.
    pub fn mean_square(&self) -> Option<f64> {
        if self.samples.is_empty() {
            None
        } else {
            Some(self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.len() as f64)
        }
    }

    pub fn real_channel(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.re).collect()
    }

    pub fn imag_channel(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.im).collect()
    }
}
