use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::demod::{symbol_means, threshold_decide, ThresholdMode};
use super::filter::{if_filter, if_filter_group_delay};
use super::{LinkReport, Recenter, RxConfig, RxMode};
use crate::error::{ensure, Result};
use crate::linecodec::BitStream;
use crate::loloop::{run_calibration_from, CalibrationSetup, LoopState};
use crate::rffe::{downconvert, frontend_chain};
use crate::sigcore::{make_ook_carrier, PowerDbm, SampledSignal, REF_IMPEDANCE_OHMS};
use crate::util::{mix_seed, rng_from_seed};

/// Energy detector window.
const ONSET_WINDOW_S: f64 = 2e-6;
/// Consecutive windows that must clear the threshold to declare onset.
const ONSET_CONFIRM: usize = 8;
/// Filter settling time skipped before any power measurement.
const SETTLE_S: f64 = 10e-6;
/// Shortest preamble tail usable for the residual IF estimate.
const MIN_TAIL_S: f64 = 20e-6;

/// A downlink burst: carrier-off lead-in, carrier-on preamble, OOK payload
/// and a short carrier-off guard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub lead_in_symbols: usize,
    pub preamble_symbols: usize,
    pub payload: BitStream,
}

impl Frame {
    pub fn new(cfg: &RxConfig, payload: BitStream) -> Self {
        Frame {
            lead_in_symbols: cfg.lead_in_symbols,
            preamble_symbols: cfg.preamble_symbols,
            payload,
        }
    }

    /// The full symbol sequence, without the guard.
    pub fn symbols(&self) -> BitStream {
        let mut v = vec![0u8; self.lead_in_symbols];
        v.extend(std::iter::repeat_n(1u8, self.preamble_symbols));
        v.extend_from_slice(self.payload.as_slice());
        BitStream::from_bools(v.into_iter().map(|b| b == 1))
    }

    /// RF envelope of the frame at `power` with carrier offset `cfo`. A guard
    /// of one tenth of a symbol follows the payload.
    pub fn to_signal(
        &self,
        symbol_rate: f64,
        cfo: f64,
        power: PowerDbm,
        sample_rate: f64,
    ) -> Result<SampledSignal> {
        let body = make_ook_carrier(
            &self.symbols(),
            symbol_rate,
            cfo,
            power,
            sample_rate,
            REF_IMPEDANCE_OHMS,
        )?;
        let guard = ((0.1 * sample_rate / symbol_rate).round() as usize).max(1);
        body.concat(&SampledSignal::zeros(guard, sample_rate, 0.0)?)
    }
}

/// Result of [`run_receive`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reception {
    pub report: LinkReport,
    /// Decoded payload. Erased positions read as 0.
    pub bits: BitStream,
    /// Payload indices that were not demodulated, either because the loop
    /// was recalibrating or because it never locked.
    pub erasures: Vec<usize>,
}

impl Reception {
    /// Bit errors against `reference`, counting erasures and missing bits as
    /// errors.
    pub fn count_errors(&self, reference: &BitStream) -> usize {
        let got = self.bits.as_slice();
        let mut erased = vec![false; got.len()];
        for &i in &self.erasures {
            if i < erased.len() {
                erased[i] = true;
            }
        }
        let compared = reference
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(i, b)| i >= got.len() || erased[i] || got[i] != *b)
            .count();
        compared + got.len().saturating_sub(reference.len())
    }
}

fn mean_sq(z: &[Complex64]) -> Option<f64> {
    if z.is_empty() {
        None
    } else {
        Some(z.iter().map(|v| v.norm_sqr()).sum::<f64>() / z.len() as f64)
    }
}

fn snr_db(on: Option<f64>, off: Option<f64>) -> Option<f64> {
    match (on, off) {
        (Some(p1), Some(p0)) if p0 > 0.0 && p1 > p0 => Some(10.0 * ((p1 - p0) / p0).log10()),
        _ => None,
    }
}

/// Ratio of median window power to the noise floor required to declare a
/// carrier present.
const ONSET_CONTRAST: f64 = 10.0;

/// First time the windowed power stays above the geometric mean of the noise
/// floor and the median for [`ONSET_CONFIRM`] windows. The floor is the mean
/// of the quietest 2% of windows, so the search span must be mostly carrier.
fn detect_onset(z: &SampledSignal) -> Option<f64> {
    let w = ((ONSET_WINDOW_S * z.sample_rate()).round() as usize).max(1);
    let powers: Vec<f64> = z
        .samples()
        .chunks_exact(w)
        .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>() / w as f64)
        .collect();
    if powers.len() < ONSET_CONFIRM + 1 {
        return None;
    }
    let mut sorted = powers.clone();
    sorted.sort_by(f64::total_cmp);
    let quiet = (sorted.len() / 50).max(1);
    let floor = sorted[..quiet].iter().sum::<f64>() / quiet as f64;
    let median = sorted[sorted.len() / 2];
    if !(median > ONSET_CONTRAST * floor) {
        return None;
    }
    let thr = (floor * median).sqrt();
    (0..powers.len() - ONSET_CONFIRM)
        .find(|&i| powers[i..i + ONSET_CONFIRM].iter().all(|&p| p > thr))
        .map(|i| z.time_of(i * w))
}

/// Frequency of the dominant tone in `z` from the mean lag-one phase step.
fn phase_step_frequency(z: &[Complex64], fs: f64) -> Option<f64> {
    if z.len() < 2 {
        return None;
    }
    let acc: Complex64 = z.windows(2).map(|p| p[1] * p[0].conj()).sum();
    (acc.norm() > 0.0).then(|| acc.arg() * fs / std::f64::consts::TAU)
}

fn range_of(s: &SampledSignal, t0: f64, t1: f64) -> std::ops::Range<usize> {
    s.index_at(t0)..s.index_at(t1)
}

struct Receiver<'a> {
    rf: &'a SampledSignal,
    cfg: &'a RxConfig,
    setup: &'a CalibrationSetup,
    report: LinkReport,
}

/// Runs the three-step receiver on an RF envelope holding one [`Frame`].
///
/// The payload is taken to be every whole symbol between the end of the
/// preamble and the end of `rf`. Failing to detect the preamble or to lock
/// is not an error: the report's mode history shows where reception stopped
/// and the payload is fully erased.
pub fn run_receive(
    rf: &SampledSignal,
    cfg: &RxConfig,
    setup: &CalibrationSetup,
) -> Result<Reception> {
    cfg.validate()?;
    setup.validate()?;
    ensure(
        (setup.loop_params.f_ref - cfg.f_if_target).abs() < 1.0,
        "f_ref",
        "reference clock must equal the target IF",
    )?;
    ensure(!rf.is_empty(), "rf", "signal is empty")?;
    let rx = Receiver {
        rf,
        cfg,
        setup,
        report: LinkReport {
            sensitivity_dbm: cfg.sensitivity(setup.rffe.nf_db)?,
            ber: None,
            snr_step_a_db: None,
            snr_step_c_db: None,
            lock_time_s: None,
            lock_cycles: None,
            residual_if_hz: None,
            mode_history: vec![RxMode::UncertainIf],
        },
    };
    rx.run()
}

impl Receiver<'_> {
    fn symbol(&self) -> f64 {
        1.0 / self.cfg.symbol_rate
    }

    fn lo_offset(&self, f_lo: f64) -> f64 {
        f_lo - self.setup.rf_center_hz
    }

    fn erased(self, n_payload: usize) -> Reception {
        Reception {
            report: self.report,
            bits: BitStream::from_bools(std::iter::repeat_n(false, n_payload)),
            erasures: (0..n_payload).collect(),
        }
    }

    fn payload_len(&self, t_payload: f64, delay: f64) -> usize {
        let t_end = self.rf.time_of(self.rf.len());
        (((t_end - t_payload - delay) / self.symbol()).floor()).max(0.0) as usize
    }

    fn run(mut self) -> Result<Reception> {
        let cfg = self.cfg;
        let setup = self.setup;
        let fs = self.rf.sample_rate();
        let t_sym = self.symbol();
        let p = setup.loop_params;
        let gd_c = if_filter_group_delay(cfg.bw_step_c);

        // Step A: free-running LO, wide IF filter.
        let f_lo0 = setup.vco.frequency(p.v_mid, p.k_vco, p.v_mid, 0.0);
        let search_end = self.rf.epoch()
            + (cfg.lead_in_symbols + cfg.preamble_symbols + 4) as f64 * t_sym;
        let search = self.rf.slice(0..self.rf.index_at(search_end));
        let y_a = frontend_chain(
            &downconvert(&search, self.lo_offset(f_lo0))?,
            &setup.rffe,
            mix_seed(setup.seed, 10),
        )?;
        let z_a = if_filter(&y_a, cfg.f_if_target, cfg.bw_step_a)?;
        let Some(onset) = detect_onset(&z_a) else {
            let n = self.payload_len(search_end, gd_c);
            return Ok(self.erased(n));
        };
        let onset = (onset - if_filter_group_delay(cfg.bw_step_a)).max(self.rf.epoch());
        let t_pre_end = onset + cfg.preamble_symbols as f64 * t_sym;
        let n_payload = self.payload_len(t_pre_end, gd_c);
        let lead = &z_a.samples()[range_of(&z_a, self.rf.epoch() + SETTLE_S, onset - SETTLE_S)];
        let pre = &z_a.samples()[range_of(&z_a, onset + SETTLE_S, t_pre_end - SETTLE_S)];
        self.report.snr_step_a_db = snr_db(mean_sq(pre), mean_sq(lead));

        // Step B: close the loop on the preamble.
        self.report.mode_history.push(RxMode::Calibrating);
        let b_setup = CalibrationSetup {
            stop_on_lock: true,
            ..setup.clone()
        };
        let state = LoopState {
            time: onset,
            ..LoopState::initial(&p)
        };
        let burst = self.rf.slice(range_of(self.rf, onset, t_pre_end));
        if burst.is_empty() {
            return Ok(self.erased(n_payload));
        }
        let run = run_calibration_from(&burst, &b_setup, burst.duration(), Some(state))?;
        let Some(lock) = run.lock else {
            return Ok(self.erased(n_payload));
        };
        self.report.lock_time_s = Some(lock.t_lock - onset);
        self.report.lock_cycles = Some(lock.cycles);

        // Step C: frozen LO, narrow IF filter.
        self.report.mode_history.push(RxMode::ApproxLowIf);
        let t_c = run.final_state.time;
        let t_end = self.rf.time_of(self.rf.len());
        let blocks = self.lo_schedule(run.final_f_lo, run.final_state, t_c, t_end, t_pre_end)?;

        let seg = self.rf.slice(range_of(self.rf, t_c, t_end));
        let bb = self.downconvert_blocks(&seg, &blocks.freqs, blocks.block_len);
        let y_c = frontend_chain(&bb, &setup.rffe, mix_seed(setup.seed, 11))?;

        let tail_range = range_of(&y_c, t_c + SETTLE_S, t_pre_end - SETTLE_S);
        let residual = if (tail_range.len() as f64) >= MIN_TAIL_S * fs {
            let z_tail = if_filter(&y_c.slice(0..tail_range.end), cfg.f_if_target, cfg.bw_step_a)?;
            phase_step_frequency(&z_tail.samples()[tail_range.clone()], fs)
        } else {
            None
        };
        self.report.residual_if_hz = residual;
        let center = match (cfg.recenter, residual) {
            (Recenter::Measured, Some(f)) if f - cfg.bw_step_c / 2.0 > 0.0 => f,
            _ => cfg.f_if_target,
        };
        let z_c = if_filter(&y_c, center, cfg.bw_step_c)?;
        let mag: Vec<f64> = z_c.samples().iter().map(|z| z.norm()).collect();
        let on_level = {
            let r = range_of(&z_c, t_c + SETTLE_S, t_pre_end - SETTLE_S);
            (!r.is_empty()).then(|| mag[r.clone()].iter().sum::<f64>() / r.len() as f64)
        };
        let mode = match on_level {
            Some(on) => ThresholdMode::AdaptiveWithReference(on),
            None => ThresholdMode::Adaptive,
        };
        let start = (t_pre_end + gd_c - z_c.epoch()) * fs;
        let means = symbol_means(&mag, start, t_sym * fs, n_payload);
        let mut bits = threshold_decide(&means, mode);

        let mut erasures = Vec::new();
        let mut history_tail = Vec::new();
        for &(a, b) in &blocks.erased {
            erasures.extend(a.min(n_payload)..b.min(n_payload));
        }
        erasures.sort_unstable();
        erasures.dedup();
        for _ in 0..blocks.recalibrations {
            history_tail.push(RxMode::Calibrating);
            history_tail.push(RxMode::ApproxLowIf);
        }
        if blocks.lost {
            history_tail.push(RxMode::Calibrating);
        }
        self.report.mode_history.extend(history_tail);
        for &i in &erasures {
            bits[i] = 0;
        }

        // Detector SNR over the central 60% of each demodulated symbol.
        let (mut on, mut off) = (Vec::new(), Vec::new());
        for (k, &b) in bits.iter().enumerate() {
            if erasures.binary_search(&k).is_ok() {
                continue;
            }
            let t0 = t_pre_end + gd_c + (k as f64 + 0.2) * t_sym;
            let r = range_of(&z_c, t0, t0 + 0.6 * t_sym);
            let dst = if b == 1 { &mut on } else { &mut off };
            dst.extend_from_slice(&z_c.samples()[r]);
        }
        self.report.snr_step_c_db = snr_db(mean_sq(&on), mean_sq(&off));

        Ok(Reception {
            report: self.report,
            bits: BitStream::from_bools(bits.into_iter().map(|b| b == 1)),
            erasures,
        })
    }

    fn downconvert_blocks(&self, seg: &SampledSignal, freqs: &[f64], block_len: usize) -> SampledSignal {
        let fs = seg.sample_rate();
        let mut out = Vec::with_capacity(seg.len());
        let mut phase = 0.0f64;
        for (b, chunk) in seg.samples().chunks(block_len.max(1)).enumerate() {
            let f = freqs.get(b).copied().unwrap_or_else(|| *freqs.last().unwrap_or(&0.0));
            let off = self.lo_offset(f);
            let step = Complex64::from_polar(1.0, -std::f64::consts::TAU * off / fs);
            let mut ph = Complex64::from_polar(1.0, -phase);
            for v in chunk {
                out.push(v * ph);
                ph *= step;
            }
            phase = (phase + std::f64::consts::TAU * off * chunk.len() as f64 / fs)
                .rem_euclid(std::f64::consts::TAU);
        }
        SampledSignal::from_parts(out, fs, seg.epoch())
    }

    /// Piecewise-constant LO over monitor blocks from `t_c`, with drift,
    /// lock-loss detection and recalibration.
    fn lo_schedule(
        &self,
        f_lock: f64,
        state: LoopState,
        t_c: f64,
        t_end: f64,
        t_payload: f64,
    ) -> Result<LoSchedule> {
        let cfg = self.cfg;
        let setup = self.setup;
        let p = setup.loop_params;
        let fs = self.rf.sample_rate();
        let t_sym = self.symbol();
        let block_t = cfg.monitor_symbols as f64 * t_sym;
        let block_len = ((block_t * fs).round() as usize).max(1);
        let n_blocks = (((t_end - t_c) * fs).ceil() as usize).div_ceil(block_len);
        let tol = p.lock_tolerance() * cfg.lock_loss_factor;
        let carrier = setup.true_carrier();
        let mut rng = rng_from_seed(mix_seed(setup.seed, 12));
        let sym_index = |t: f64| ((t - t_payload) / t_sym).floor().max(0.0) as usize;

        let mut sched = LoSchedule {
            freqs: Vec::with_capacity(n_blocks),
            block_len,
            erased: Vec::new(),
            recalibrations: 0,
            lost: false,
        };
        let mut f_lo = f_lock;
        let mut drift = state.drift_ppm;
        let mut loop_state = state;
        let mut b = 0;
        while b < n_blocks {
            let t_b = t_c + (b * block_len) as f64 / fs;
            if setup.vco.drift > 0.0 && b > 0 {
                let n: f64 = StandardNormal.sample(&mut rng);
                let d = setup.vco.drift * block_t.sqrt() * n;
                drift += d;
                f_lo += setup.vco.f_nominal * d * 1e-6;
            }
            let err = carrier - f_lo - p.f_ref;
            if err.abs() <= tol || t_b < t_payload {
                sched.freqs.push(f_lo);
                b += 1;
                continue;
            }
            // Lock lost: recalibrate from this block.
            let t_stop = (t_b + cfg.recal_max_symbols as f64 * t_sym).min(t_end);
            let burst = self.rf.slice(range_of(self.rf, t_b, t_stop));
            let mut recal_setup = setup.clone();
            recal_setup.stop_on_lock = true;
            recal_setup.seed = mix_seed(setup.seed, 100 + b as u64);
            recal_setup.vco.init_offset_ppm = setup.vco.init_offset_ppm + drift;
            loop_state.time = t_b;
            loop_state.drift_ppm = 0.0;
            let run = if burst.is_empty() {
                None
            } else {
                Some(run_calibration_from(&burst, &recal_setup, burst.duration(), Some(loop_state))?)
            };
            let first_erased = sym_index(t_b);
            match run.filter(|r| r.locked()) {
                Some(r) => {
                    let t_relock = r.final_state.time;
                    let resume = b + ((t_relock - t_b) * fs / block_len as f64).ceil() as usize;
                    let resume = resume.max(b + 1);
                    let until = t_c + ((resume + 1) * block_len) as f64 / fs;
                    sched.erased.push((first_erased, sym_index(until) + 1));
                    f_lo = r.final_f_lo;
                    drift += r.final_state.drift_ppm;
                    loop_state = r.final_state;
                    loop_state.drift_ppm = 0.0;
                    while sched.freqs.len() < resume.min(n_blocks) {
                        sched.freqs.push(f_lo);
                    }
                    b = resume;
                    sched.recalibrations += 1;
                }
                None => {
                    sched.erased.push((first_erased, usize::MAX));
                    sched.lost = true;
                    while sched.freqs.len() < n_blocks {
                        sched.freqs.push(f_lo);
                    }
                    break;
                }
            }
        }
        sched.erased.sort_unstable();
        Ok(sched)
    }
}

struct LoSchedule {
    freqs: Vec<f64>,
    block_len: usize,
    /// Half-open payload symbol ranges left undecoded.
    erased: Vec<(usize, usize)>,
    recalibrations: usize,
    /// Recalibration failed and reception stopped in the calibrating step.
    lost: bool,
}
