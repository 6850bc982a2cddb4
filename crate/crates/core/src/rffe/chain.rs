use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::selectivity::response_with;
use super::RffeConfig;
use crate::error::{Error, Result};
use crate::sigcore::{dbm_to_watts, spectrum, SampledSignal, REF_IMPEDANCE_OHMS, THERMAL_FLOOR_DBM_HZ};
use crate::util::rng_from_seed;

/// Lowest offset at which the flicker term is evaluated.
const FLICKER_FLOOR_HZ: f64 = 1e3;

/// Rotates `rf` by `exp(-j 2 pi lo_offset t)` using absolute sample time.
pub fn downconvert(rf: &SampledSignal, lo_offset: f64) -> Result<SampledSignal> {
    let fs = rf.sample_rate();
    if !(fs >= 2.0 * lo_offset.abs()) {
        return Err(Error::SampleRateTooLow {
            sample_rate: fs,
            required: 2.0 * lo_offset.abs(),
        });
    }
    Ok(SampledSignal::from_parts(
        rotate(rf.samples(), -lo_offset, fs, rf.epoch()),
        fs,
        rf.epoch(),
    ))
}

/// Samples of `x` times `exp(j 2 pi freq t)`, with `t = epoch + n / fs`.
///
/// The phasor is advanced by multiplication and re-anchored every block to
/// keep the rounding error far below 1e-12.
pub(crate) fn rotate(x: &[Complex64], freq: f64, fs: f64, epoch: f64) -> Vec<Complex64> {
    const BLOCK: usize = 1024;
    let step = Complex64::from_polar(1.0, TAU * freq / fs);
    let mut out = Vec::with_capacity(x.len());
    for (b, chunk) in x.chunks(BLOCK).enumerate() {
        let t = epoch + (b * BLOCK) as f64 / fs;
        let mut ph = Complex64::from_polar(1.0, TAU * (freq * t).fract());
        for v in chunk {
            out.push(v * ph);
            ph *= step;
        }
    }
    out
}

/// Input-referred noise density in dBm/Hz at down-converted offset `f`.
pub fn noise_density_at(cfg: &RffeConfig, f: f64) -> f64 {
    let base = THERMAL_FLOOR_DBM_HZ + cfg.nf_db;
    match cfg.flicker_corner_hz {
        Some(fc) if fc > 0.0 => {
            let f = f.abs().max(FLICKER_FLOOR_HZ);
            base + 10.0 * ((1.0 + fc / f) / (1.0 + fc / cfg.nf_ref_hz)).log10()
        }
        _ => base,
    }
}

/// Per-bin mask amplitude and input noise standard deviation for an FFT of
/// length `n`.
struct BinProfile {
    mask: Vec<f64>,
    sigma: Vec<f64>,
}

const PROFILE_CACHE: usize = 4;

static PROFILES: Mutex<Vec<(String, Arc<BinProfile>)>> = Mutex::new(Vec::new());

fn bin_profile(cfg: &RffeConfig, n: usize, fs: f64) -> Arc<BinProfile> {
    let key = format!(
        "{n}:{}:{}",
        fs.to_bits(),
        serde_json::to_string(cfg).unwrap_or_default()
    );
    let mut cache = PROFILES.lock().unwrap_or_else(|e| e.into_inner());
    if let Some((_, p)) = cache.iter().find(|(k, _)| *k == key) {
        return Arc::clone(p);
    }
    let anchors = cfg.oob_anchors();
    let (mask, sigma) = (0..n)
        .map(|k| {
            let f = spectrum::bin_frequency(k, n, fs);
            let m = 10f64.powf((response_with(&anchors, cfg, f) - cfg.gain_db) / 20.0);
            let var = dbm_to_watts(noise_density_at(cfg, f)) * REF_IMPEDANCE_OHMS * fs * n as f64;
            (m, (var / 2.0).sqrt())
        })
        .unzip();
    let p = Arc::new(BinProfile { mask, sigma });
    if cache.len() == PROFILE_CACHE {
        cache.remove(0);
    }
    cache.push((key, Arc::clone(&p)));
    p
}

/// Smallest `2^a 3^b 5^c` not below `n`.
fn smooth_size(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1usize;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut m = p35;
            while m < n {
                m *= 2;
            }
            best = best.min(m);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

fn padded_spectrum(y: &SampledSignal) -> Vec<Complex64> {
    let n = smooth_size(y.len());
    let mut buf = y.samples().to_vec();
    buf.resize(n, Complex64::new(0.0, 0.0));
    spectrum::fft(&buf)
}

/// Applies the selectivity mask, normalized to unity in the passband.
pub fn apply_selectivity(y: &SampledSignal, cfg: &RffeConfig) -> Result<SampledSignal> {
    cfg.validate()?;
    if y.is_empty() {
        return Ok(y.clone());
    }
    let mut spec = padded_spectrum(y);
    let profile = bin_profile(cfg, spec.len(), y.sample_rate());
    spec.iter_mut().zip(&profile.mask).for_each(|(s, m)| *s *= m);
    let mut out = spectrum::ifft(&spec);
    out.truncate(y.len());
    Ok(SampledSignal::from_parts(out, y.sample_rate(), y.epoch()))
}

/// Selectivity mask, input-referred noise and gain applied to an already
/// down-converted signal.
///
/// The noise has density [`noise_density_at`] and passes through the same
/// mask as the signal.
pub fn frontend_chain(y: &SampledSignal, cfg: &RffeConfig, seed: u64) -> Result<SampledSignal> {
    cfg.validate()?;
    if y.is_empty() {
        return Ok(y.clone());
    }
    let fs = y.sample_rate();
    let mut spec = padded_spectrum(y);
    let profile = bin_profile(cfg, spec.len(), fs);
    let mut rng = rng_from_seed(seed);
    for ((s, m), sigma) in spec.iter_mut().zip(&profile.mask).zip(&profile.sigma) {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *s = (*s + Complex64::new(re, im) * *sigma) * m;
    }
    let gain = 10f64.powf(cfg.gain_db / 20.0);
    let mut out = spectrum::ifft(&spec);
    out.truncate(y.len());
    out.iter_mut().for_each(|v| *v *= gain);
    Ok(SampledSignal::from_parts(out, fs, y.epoch()))
}

/// Down-conversion by `lo_offset` followed by [`frontend_chain`].
pub fn apply_frontend(
    rf: &SampledSignal,
    cfg: &RffeConfig,
    lo_offset: f64,
    seed: u64,
) -> Result<SampledSignal> {
    frontend_chain(&downconvert(rf, lo_offset)?, cfg, seed)
}
