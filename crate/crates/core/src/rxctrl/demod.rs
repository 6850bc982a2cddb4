use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linecodec::BitStream;
use crate::sigcore::SampledSignal;

/// Symbols in the sliding threshold window.
const THRESHOLD_WINDOW: usize = 16;
/// Candidate symbol phases tried by blind timing.
const TIMING_PHASES: usize = 16;

/// Decision threshold policy for the envelope slicer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Midpoint of the top and bottom quartile means over a sliding
    /// 16-symbol window.
    Adaptive,
    /// As `Adaptive`, falling back to half the given carrier-on level when a
    /// window lacks contrast.
    AdaptiveWithReference(f64),
    /// A fixed threshold on the symbol mean magnitude.
    Fixed(f64),
}

/// Mean of `mag` over `n` consecutive symbols of `sps` samples, the first
/// starting at fractional index `start`. Symbols running past the end are
/// averaged over the samples available.
pub fn symbol_means(mag: &[f64], start: f64, sps: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let a = (start + k as f64 * sps).round().max(0.0) as usize;
            let b = ((start + (k + 1) as f64 * sps).round().max(0.0) as usize).min(mag.len());
            if a >= b {
                0.0
            } else {
                mag[a..b].iter().sum::<f64>() / (b - a) as f64
            }
        })
        .collect()
}

fn quartile_midpoint(window: &[f64]) -> (f64, f64) {
    let mut v = window.to_vec();
    v.sort_by(f64::total_cmp);
    let q = (v.len() / 4).max(1);
    let low = v[..q].iter().sum::<f64>() / q as f64;
    let high = v[v.len() - q..].iter().sum::<f64>() / q as f64;
    (low, high)
}

/// Slices symbol means into bits.
///
/// In the adaptive modes a window whose top and bottom quartile means differ
/// by less than half the reference level is treated as having no contrast
/// and is sliced at half the reference. Without an explicit reference the
/// top quartile mean of the whole stream is used.
pub fn threshold_decide(means: &[f64], mode: ThresholdMode) -> Vec<u8> {
    let reference = match mode {
        ThresholdMode::Fixed(t) => {
            return means.iter().map(|&m| u8::from(m > t)).collect();
        }
        ThresholdMode::AdaptiveWithReference(on) => on,
        ThresholdMode::Adaptive => {
            if means.is_empty() {
                return Vec::new();
            }
            quartile_midpoint(means).1
        }
    };
    let half = THRESHOLD_WINDOW / 2;
    (0..means.len())
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (lo + THRESHOLD_WINDOW).min(means.len());
            let lo = hi.saturating_sub(THRESHOLD_WINDOW);
            let (low, high) = quartile_midpoint(&means[lo..hi]);
            let t = if high - low < 0.5 * reference {
                0.5 * reference
            } else {
                0.5 * (low + high)
            };
            u8::from(means[k] > t)
        })
        .collect()
}

fn variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Envelope detector with integrate-and-dump and blind symbol timing.
///
/// The symbol phase is chosen among 16 candidates as the one maximizing the
/// spread of symbol means, the earliest winning ties. Only whole symbols
/// after that phase are decoded.
pub fn envelope_demod(
    iq_if: &SampledSignal,
    symbol_rate: f64,
    mode: ThresholdMode,
) -> Result<BitStream> {
    if !(symbol_rate > 0.0 && symbol_rate.is_finite()) {
        return Err(Error::Timing(format!("invalid symbol rate {symbol_rate}")));
    }
    let sps = iq_if.sample_rate() / symbol_rate;
    if sps < 2.0 {
        return Err(Error::Timing(format!(
            "{sps:.3} samples per symbol, need at least 2"
        )));
    }
    if (iq_if.len() as f64) < sps {
        return Err(Error::Timing(format!(
            "signal of {} samples is shorter than one symbol of {sps:.1}",
            iq_if.len()
        )));
    }
    let mag: Vec<f64> = iq_if.samples().iter().map(|z| z.norm()).collect();
    let best = (0..TIMING_PHASES)
        .map(|p| p as f64 * sps / TIMING_PHASES as f64)
        .filter_map(|start| {
            let n = ((mag.len() as f64 - start) / sps + 1e-3).floor() as usize;
            (n > 0).then(|| {
                let m = symbol_means(&mag, start, sps, n);
                (variance(&m), m)
            })
        })
        .min_by(|a, b| b.0.total_cmp(&a.0))
        .map(|(_, m)| m)
        .ok_or_else(|| Error::Timing("no complete symbol at any phase".into()))?;
    BitStream::new(threshold_decide(&best, mode))
}
