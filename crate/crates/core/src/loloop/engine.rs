use std::collections::VecDeque;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::trajectory::LockMonitor;
use super::{
    rfd_step, ChargePump, LockInfo, LoopParams, LoopTrajectory, RfdEvent, RfdState, RowEvent,
    Schmitt, SchmittConfig, TrajectoryRow, Vco, VcoModel, F_REF_RANGE,
};
use crate::error::{ensure, invalid, Error, Result};
use crate::rffe::{apply_selectivity, downconvert, rotate, RffeConfig};
use crate::sigcore::filter::ComplexBandpass;
use crate::sigcore::{dbm_to_watts, SampledSignal, REF_IMPEDANCE_OHMS, THERMAL_FLOOR_DBM_HZ};
use crate::util::{mix_seed, rng_from_seed};

/// Everything the transient engine needs besides the carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSetup {
    pub rffe: RffeConfig,
    pub loop_params: LoopParams,
    pub vco: VcoModel,
    pub schmitt: SchmittConfig,
    /// Width of the wide IF filter in front of the Schmitt triggers. It is
    /// centered on `loop_params.f_ref`.
    pub if_bw_hz: f64,
    /// Add front-end noise at `rffe.nf_db`.
    pub noise: bool,
    /// Freeze the detector while the IF envelope is low. The envelope is the
    /// smaller of the instantaneous magnitude and its moving average.
    pub gating: bool,
    /// Envelope moving-average window.
    pub gate_window_s: f64,
    /// Nominal carrier the baseband signals are referenced to.
    pub rf_center_hz: f64,
    /// Actual carrier frequency, used for the reported `f_if`. Defaults to
    /// `rf_center_hz`.
    pub true_carrier_hz: Option<f64>,
    pub seed: u64,
    pub stop_on_lock: bool,
    pub lock_hold_cycles: usize,
}

impl Default for CalibrationSetup {
    fn default() -> Self {
        CalibrationSetup {
            rffe: RffeConfig::default(),
            loop_params: LoopParams::default(),
            vco: VcoModel::default(),
            schmitt: SchmittConfig::default(),
            if_bw_hz: 1.2e6,
            noise: true,
            gating: true,
            gate_window_s: 0.5e-6,
            rf_center_hz: 900e6,
            true_carrier_hz: None,
            seed: 0,
            stop_on_lock: false,
            lock_hold_cycles: 2,
        }
    }
}

impl CalibrationSetup {
    pub fn validate(&self) -> Result<()> {
        self.rffe.validate()?;
        self.loop_params.validate()?;
        self.vco.validate()?;
        self.schmitt.validate()?;
        let f_ref = self.loop_params.f_ref;
        ensure(
            (F_REF_RANGE.0..=F_REF_RANGE.1).contains(&f_ref),
            "f_ref",
            format!(
                "must lie in the synthesizer range {}..{} Hz",
                F_REF_RANGE.0, F_REF_RANGE.1
            ),
        )?;
        ensure(self.if_bw_hz > 0.0, "if_bw_hz", "must be positive")?;
        ensure(
            self.gate_window_s > 0.0,
            "gate_window_s",
            "must be positive",
        )?;
        ensure(self.rf_center_hz > 0.0, "rf_center_hz", "must be positive")?;
        ensure(
            self.lock_hold_cycles >= 1,
            "lock_hold_cycles",
            "must be at least 1",
        )
    }

    pub fn true_carrier(&self) -> f64 {
        self.true_carrier_hz.unwrap_or(self.rf_center_hz)
    }

    /// LO frequency that puts the carrier exactly on `f_ref`.
    pub fn target_lo(&self) -> f64 {
        self.true_carrier() - self.loop_params.f_ref
    }
}

/// Loop memory carried between runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopState {
    pub v_cap: f64,
    /// LO phase relative to the nominal carrier.
    pub phase: f64,
    pub drift_ppm: f64,
    /// Absolute time of the next sample.
    pub time: f64,
}

impl LoopState {
    pub fn initial(params: &LoopParams) -> Self {
        LoopState {
            v_cap: params.v_mid,
            phase: 0.0,
            drift_ppm: 0.0,
            time: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRun {
    pub trajectory: LoopTrajectory,
    pub lock: Option<LockInfo>,
    pub final_state: LoopState,
    /// LO frequency when the run ended.
    pub final_f_lo: f64,
    pub up_pulses: usize,
    pub dn_pulses: usize,
    /// Fraction of detector clocks suppressed by the envelope gate.
    pub gated_fraction: f64,
}

impl CalibrationRun {
    pub fn locked(&self) -> bool {
        self.lock.is_some()
    }

    /// Mean IF error over the final `window` seconds.
    pub fn mean_residual(&self, window: f64) -> Option<f64> {
        self.trajectory.mean_error(window)
    }
}

/// Simulates the closed loop on `carrier` for up to `duration` seconds,
/// starting from the VCO's free-running frequency.
///
/// Failure to lock is not an error: the returned run has `lock == None`.
pub fn run_calibration(
    carrier: &SampledSignal,
    setup: &CalibrationSetup,
    duration: f64,
) -> Result<CalibrationRun> {
    run_calibration_from(carrier, setup, duration, None)
}

/// Moving average of `|z|` over a fixed number of samples.
struct EnvelopeAverage {
    buf: VecDeque<f64>,
    len: usize,
    sum: f64,
}

impl EnvelopeAverage {
    fn new(len: usize) -> Self {
        EnvelopeAverage {
            buf: VecDeque::with_capacity(len),
            len,
            sum: 0.0,
        }
    }

    #[inline]
    fn push(&mut self, x: f64) -> f64 {
        if self.buf.len() == self.len {
            self.sum -= self.buf.pop_front().unwrap_or(0.0);
        }
        self.buf.push_back(x);
        self.sum += x;
        self.sum.max(0.0) / self.buf.len() as f64
    }
}

struct Noise {
    rng: ChaCha8Rng,
    sigma: f64,
}

impl Noise {
    #[inline]
    fn sample(&mut self) -> Complex64 {
        if self.sigma == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let re: f64 = StandardNormal.sample(&mut self.rng);
        let im: f64 = StandardNormal.sample(&mut self.rng);
        Complex64::new(re, im) * self.sigma
    }
}

/// As [`run_calibration`], resuming from `state` when given. The carrier's
/// first sample is taken to sit at `state.time`.
pub fn run_calibration_from(
    carrier: &SampledSignal,
    setup: &CalibrationSetup,
    duration: f64,
    state: Option<LoopState>,
) -> Result<CalibrationRun> {
    setup.validate()?;
    ensure(
        duration.is_finite() && duration > 0.0,
        "duration",
        "must be positive",
    )?;
    if carrier.is_empty() {
        return Err(Error::EmptySignal);
    }
    let fs = carrier.sample_rate();
    let p = setup.loop_params;
    let required = 8.0 * (p.f_ref + setup.if_bw_hz);
    if fs < required {
        return Err(Error::SampleRateTooLow {
            sample_rate: fs,
            required,
        });
    }
    let n = ((duration * fs).round() as usize).min(carrier.len());
    if n == 0 {
        return Err(invalid("duration", "shorter than one sample"));
    }
    let state = state.unwrap_or_else(|| LoopState::initial(&p));
    let dt = 1.0 / fs;
    let t0 = state.time;

    let mut vco = Vco::new(setup.vco, p.k_vco, p.v_mid, setup.rf_center_hz, setup.seed)
        .with_state(state.phase, state.drift_ppm);
    let mut cp = ChargePump::new(p, state.v_cap);
    let lo0 = vco.step(cp.v_ctrl(), 0.0);
    let lo0_off = lo0 - setup.rf_center_hz;

    // Front-end selectivity relative to the starting LO, mapped back to RF.
    let seg = SampledSignal::from_parts(carrier.samples()[..n].to_vec(), fs, 0.0);
    let shaped = apply_selectivity(&downconvert(&seg, lo0_off)?, &setup.rffe)?;
    let rf = rotate(shaped.samples(), lo0_off, fs, 0.0);

    let fe_gain = 10f64.powf(setup.rffe.gain_db / 20.0);
    let sigma = if setup.noise {
        let var = dbm_to_watts(THERMAL_FLOOR_DBM_HZ + setup.rffe.nf_db) * REF_IMPEDANCE_OHMS * fs;
        (var / 2.0).sqrt()
    } else {
        0.0
    };
    let gate_len = ((setup.gate_window_s * fs).round() as usize).max(1);

    // Gain normalization from a pass with the LO frozen at its start value.
    let pga = {
        let mut bpf = ComplexBandpass::new(p.f_ref, setup.if_bw_hz, fs)?;
        let mut env = EnvelopeAverage::new(gate_len);
        let mut noise = Noise {
            rng: rng_from_seed(mix_seed(setup.seed, 1)),
            sigma,
        };
        let mut peak = 0.0f64;
        // `shaped` is the carrier seen through the frozen starting LO
        for y in shaped.samples() {
            let z = bpf.process(y + noise.sample()) * fe_gain;
            peak = peak.max(env.push(z.norm()));
        }
        if peak > 0.0 {
            fe_gain / peak
        } else {
            0.0
        }
    };

    let mut bpf = ComplexBandpass::new(p.f_ref, setup.if_bw_hz, fs)?;
    let mut env = EnvelopeAverage::new(gate_len);
    let mut noise = Noise {
        rng: rng_from_seed(mix_seed(setup.seed, 2)),
        sigma,
    };
    let mut si = Schmitt::new(setup.schmitt, false);
    let mut sq = Schmitt::new(setup.schmitt, false);
    let mut rfd = RfdState::default();
    let gate_threshold = setup.schmitt.window() / 2.0;
    let true_carrier = setup.true_carrier();
    let quarter = 1.0 / (4.0 * p.f_ref);

    let mut traj = LoopTrajectory::new(p.f_ref);
    let mut monitor = LockMonitor::new(p.lock_tolerance(), setup.lock_hold_cycles);
    let mut lock = None;
    let push_row = |traj: &mut LoopTrajectory, t: f64, v: f64, f_lo: f64, ev: RowEvent| {
        traj.push(TrajectoryRow {
            t,
            v_ctrl: v,
            f_lo,
            f_if: true_carrier - f_lo,
            event: ev,
        })
    };
    push_row(&mut traj, t0, cp.v_ctrl(), lo0, RowEvent::None)?;
    monitor.update(true_carrier - lo0 - p.f_ref);

    let mut edge = 1usize;
    let (mut cyc_up, mut cyc_dn) = (0usize, 0usize);
    let (mut up_total, mut dn_total) = (0usize, 0usize);
    let (mut clocks, mut gated_clocks) = (0usize, 0usize);
    let mut processed = 0usize;
    let mut v_ctrl = cp.v_ctrl();
    let mut z_prev = Complex64::new(0.0, 0.0);

    for (k, x) in rf.iter().enumerate() {
        let t_rel = k as f64 * dt;
        let y = x * vco.iq().conj() + noise.sample();
        let z = bpf.process(y) * pga;
        let mag = z.norm();
        let level = env.push(mag).min(mag);

        // Edges in (t_{k-1}, t_k] latch the Schmitt outputs at the edge time.
        while edge as f64 * quarter <= t_rel {
            let alpha = 1.0 - (t_rel - edge as f64 * quarter) / dt;
            let ze = z_prev + (z - z_prev) * alpha;
            let i_bit = u8::from(si.step(ze.re));
            let q_bit = u8::from(sq.step(ze.im));
            clocks += 1;
            if setup.gating && level < gate_threshold {
                gated_clocks += 1;
                rfd.resync();
                rfd.ref_quadrant = (rfd.ref_quadrant + 1) % 4;
            } else {
                let (ev, next) = rfd_step(i_bit, q_bit, rfd);
                rfd = next;
                cp.trigger(ev);
                match ev {
                    RfdEvent::Up => cyc_up += 1,
                    RfdEvent::Dn => cyc_dn += 1,
                    RfdEvent::None => {}
                }
            }
            vco.drift_step(quarter);
            if edge % 4 == 0 {
                let t_row = t0 + edge as f64 * quarter;
                let ev = RowEvent::from_counts(cyc_up, cyc_dn);
                push_row(&mut traj, t_row, v_ctrl, vco.f_lo(), ev)?;
                up_total += cyc_up;
                dn_total += cyc_dn;
                cyc_up = 0;
                cyc_dn = 0;
                if lock.is_none() && monitor.update(true_carrier - vco.f_lo() - p.f_ref) {
                    let row = traj.len() - 1;
                    lock = Some(LockInfo {
                        t_lock: t_row,
                        cycles: edge / 4,
                        row,
                    });
                }
            }
            edge += 1;
        }
        si.step(z.re);
        sq.step(z.im);
        z_prev = z;
        if lock.is_some() && setup.stop_on_lock {
            break;
        }
        v_ctrl = cp.advance(dt);
        vco.step(v_ctrl, dt);
        processed = k + 1;
    }

    Ok(CalibrationRun {
        trajectory: traj,
        lock,
        final_state: LoopState {
            v_cap: cp.v_cap(),
            phase: vco.phase(),
            drift_ppm: vco.drift_ppm(),
            time: t0 + processed as f64 * dt,
        },
        final_f_lo: vco.f_lo(),
        up_pulses: up_total + cyc_up,
        dn_pulses: dn_total + cyc_dn,
        gated_fraction: if clocks == 0 {
            0.0
        } else {
            gated_clocks as f64 / clocks as f64
        },
    })
}
