use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::receiver::{run_receive, Frame};
use super::RxConfig;
use crate::error::{ensure, Result};
use crate::linecodec::BitStream;
use crate::loloop::CalibrationSetup;
use crate::sigcore::{PowerDbm, THERMAL_FLOOR_DBM_HZ};
use crate::util::{csv_field, mix_seed, rng_from_seed, sig12};

/// Link-budget sensitivity `-174 + 10 log10(bw) + snr_min + nf + margin`.
pub fn sensitivity_estimate(bw: f64, snr_min: f64, nf: f64, margin: f64) -> Result<PowerDbm> {
    ensure(bw > 0.0 && bw.is_finite(), "bw", "must be positive")?;
    ensure(snr_min.is_finite(), "snr_min", "must be finite")?;
    ensure(nf.is_finite(), "nf", "must be finite")?;
    ensure(margin.is_finite(), "margin", "must be finite")?;
    Ok(PowerDbm(
        THERMAL_FLOOR_DBM_HZ + 10.0 * bw.log10() + snr_min + nf + margin,
    ))
}

/// Wilson score interval at 95% confidence for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Frames per power point.
    pub trials: usize,
    /// Payload bits per frame.
    pub payload_bits: usize,
    /// Carrier offset from the nominal carrier.
    pub cfo_hz: f64,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            trials: 10,
            payload_bits: 1000,
            cfo_hz: 0.0,
            seed: 0,
        }
    }
}

/// One power point. Erased bits and frames without lock count as errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub power_dbm: f64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_bits: usize,
    pub n_errors: usize,
    pub lock_rate: f64,
    /// Mean detector SNR after narrowing over frames that reported one.
    pub snr_c_db: Option<f64>,
}

struct Trial {
    errors: usize,
    bits: usize,
    locked: bool,
    snr_c_db: Option<f64>,
}

const TRIAL_STRIDE: u64 = 1 << 32;

fn run_trial(
    power: PowerDbm,
    cfg: &RxConfig,
    setup: &CalibrationSetup,
    sweep: &SweepConfig,
    stream: u64,
) -> Result<Trial> {
    let seed = mix_seed(sweep.seed, stream);
    let mut rng = rng_from_seed(mix_seed(seed, 0));
    let payload = BitStream::from_bools((0..sweep.payload_bits).map(|_| rng.random_bool(0.5)));
    let frame = Frame::new(cfg, payload.clone());
    let rf = frame.to_signal(
        cfg.symbol_rate,
        sweep.cfo_hz,
        power,
        crate::sigcore::DEFAULT_SAMPLE_RATE,
    )?;
    let trial_setup = CalibrationSetup {
        seed: mix_seed(seed, 1),
        true_carrier_hz: Some(setup.rf_center_hz + sweep.cfo_hz),
        ..setup.clone()
    };
    let rx = run_receive(&rf, cfg, &trial_setup)?;
    Ok(Trial {
        errors: rx.count_errors(&payload),
        bits: payload.len(),
        locked: rx.report.locked(),
        snr_c_db: rx.report.snr_step_c_db,
    })
}

/// Monte-Carlo BER over `powers`, with trials spread over the rayon pool.
///
/// Trial `t` at power index `i` draws from seed stream `i * 2^32 + t`, so the
/// result does not depend on the number of workers.
pub fn ber_sweep(
    powers: &[PowerDbm],
    cfg: &RxConfig,
    setup: &CalibrationSetup,
    sweep: &SweepConfig,
) -> Result<Vec<SweepRecord>> {
    ensure(sweep.trials >= 1, "trials", "must be at least 1")?;
    ensure(sweep.payload_bits >= 1, "payload_bits", "must be at least 1")?;
    cfg.validate()?;
    setup.validate()?;
    let jobs: Vec<(usize, usize)> = (0..powers.len())
        .flat_map(|i| (0..sweep.trials).map(move |t| (i, t)))
        .collect();
    let results: Vec<Trial> = jobs
        .par_iter()
        .map(|&(i, t)| {
            run_trial(
                powers[i],
                cfg,
                setup,
                sweep,
                i as u64 * TRIAL_STRIDE + t as u64,
            )
        })
        .collect::<Result<_>>()?;
    Ok(powers
        .iter()
        .zip(results.chunks(sweep.trials))
        .map(|(p, trials)| {
            let n_bits: usize = trials.iter().map(|t| t.bits).sum();
            let n_errors: usize = trials.iter().map(|t| t.errors).sum();
            let (ci_low, ci_high) = wilson_interval(n_errors, n_bits);
            let snrs: Vec<f64> = trials.iter().filter_map(|t| t.snr_c_db).collect();
            SweepRecord {
                power_dbm: p.0,
                ber: n_errors as f64 / n_bits as f64,
                ci_low,
                ci_high,
                n_bits,
                n_errors,
                lock_rate: trials.iter().filter(|t| t.locked).count() as f64 / trials.len() as f64,
                snr_c_db: (!snrs.is_empty()).then(|| snrs.iter().sum::<f64>() / snrs.len() as f64),
            }
        })
        .collect())
}

pub const SWEEP_CSV_HEADER: &str = "power_dbm,ber,ci_low,ci_high,n_bits,n_errors,lock_rate,snr_c_db";

/// Writes sweep records as CSV with header [`SWEEP_CSV_HEADER`]. A missing
/// SNR is an empty field.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut out: W) -> Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in records {
        let snr = r.snr_c_db.map(sig12).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            sig12(r.power_dbm),
            sig12(r.ber),
            sig12(r.ci_low),
            sig12(r.ci_high),
            r.n_bits,
            r.n_errors,
            sig12(r.lock_rate),
            csv_field(&snr)
        )?;
    }
    Ok(())
}
