use std::io::Write;
use std::path::PathBuf;

use aiot_rx::linecodec::{
    fm0_decode, fm0_encode, manchester_decode, manchester_encode, miller_decode, miller_encode,
    pie_decode, pie_encode, BitStream, ChipStream, MillerM,
};
use aiot_rx::loloop::run_calibration;
use aiot_rx::rffe::{selectivity_response, write_response_csv};
use aiot_rx::rxctrl::{
    ber_sweep, plan_if as plan, run_receive, sensitivity_estimate, write_sweep_csv, Frame,
};
use aiot_rx::sigcore::{make_ook_carrier, PowerDbm, DEFAULT_SAMPLE_RATE, REF_IMPEDANCE_OHMS};
use aiot_rx::util::{csv_field, mix_seed, rng_from_seed, sig12};
use clap::{Args, ValueEnum};
use rand::Rng;
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::output::{io_err, open_out, opt, write_jsonl, Format};
use crate::{CliError, Common};

fn load(common: &Common) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::load(common.config.as_deref())?;
    if let Some(s) = common.seed {
        cfg.run.seed = s;
    }
    if let Some(f) = common.format {
        cfg.output.format = Some(f);
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct PlanRow {
    n: u64,
    f_if_hz: f64,
    image_offset_hz: f64,
}

pub fn plan_if(cbw: f64, format: Format) -> Result<(), CliError> {
    let p = plan(cbw)?;
    let rows: Vec<PlanRow> = p
        .candidates
        .iter()
        .map(|c| PlanRow {
            n: c.n,
            f_if_hz: c.f_if,
            image_offset_hz: c.image_offset,
        })
        .collect();
    let mut out = open_out(None)?;
    match format {
        Format::Csv => {
            writeln!(out, "n,f_if_hz,image_offset_hz").map_err(io_err)?;
            for r in &rows {
                writeln!(out, "{},{},{}", r.n, r.f_if_hz, r.image_offset_hz).map_err(io_err)?;
            }
        }
        Format::Jsonl => write_jsonl(&rows, &mut out)?,
    }
    out.flush().map_err(io_err)?;
    eprintln!(
        "lower_bound_hz={} chosen_f_if_hz={} rationale=\"{}\"",
        p.lower_bound, p.chosen.f_if, p.rationale
    );
    Ok(())
}

pub fn sim_loop(
    common: &Common,
    offset_ppm: Option<f64>,
    duration: Option<f64>,
    power: Option<f64>,
) -> Result<(), CliError> {
    let mut cfg = load(common)?;
    if let Some(v) = offset_ppm {
        cfg.run.offset_ppm = v;
    }
    if let Some(v) = duration {
        cfg.run.duration_s = v;
    }
    if let Some(v) = power {
        cfg.run.power_dbm = v;
    }
    cfg.validate()?;
    let setup = cfg.setup();
    let d = cfg.run.duration_s;
    let carrier = make_ook_carrier(
        &BitStream::new(vec![1])?,
        1.0 / d,
        cfg.run.cfo_hz,
        PowerDbm(cfg.run.power_dbm),
        DEFAULT_SAMPLE_RATE,
        REF_IMPEDANCE_OHMS,
    )?;
    let run = run_calibration(&carrier, &setup, d)?;

    let path = common.out.clone().or(cfg.output.trajectory.clone());
    let to_file = path.is_some();
    let mut out = open_out(path.as_deref())?;
    match cfg.output.format.unwrap_or_default() {
        Format::Csv => run.trajectory.write_csv(&mut out)?,
        Format::Jsonl => write_jsonl(run.trajectory.rows(), &mut out)?,
    }
    out.flush().map_err(io_err)?;
    drop(out);

    let residual = run.mean_residual(d / 4.0);
    let summary = format!(
        "locked={} t_lock_s={} cycles={} residual_hz={}",
        run.locked(),
        opt(run.lock.map(|l| sig12(l.t_lock))),
        opt(run.lock.map(|l| l.cycles)),
        opt(residual.map(sig12)),
    );
    if to_file {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

pub fn sensitivity(bw: f64, snr: f64, nf: f64, margin: f64) -> Result<(), CliError> {
    let p = sensitivity_estimate(bw, snr, nf, margin)?;
    println!("{:.2} dBm", p.0);
    Ok(())
}

pub struct SweepFlags {
    pub pmin: Option<f64>,
    pub pmax: Option<f64>,
    pub step: Option<f64>,
    pub trials: Option<usize>,
    pub bits: Option<usize>,
    pub offset_ppm: Option<f64>,
}

pub fn sweep_ber(common: &Common, f: SweepFlags) -> Result<(), CliError> {
    let mut cfg = load(common)?;
    let s = &mut cfg.sweep;
    if let Some(v) = f.pmin {
        s.pmin_dbm = v;
    }
    if let Some(v) = f.pmax {
        s.pmax_dbm = v;
    }
    if let Some(v) = f.step {
        s.step_db = v;
    }
    if let Some(v) = f.trials {
        s.trials = v;
    }
    if let Some(v) = f.bits {
        s.payload_bits = v;
    }
    if let Some(v) = f.offset_ppm {
        cfg.run.offset_ppm = v;
    }
    cfg.validate()?;
    if cfg.sweep.trials == 0 || cfg.sweep.payload_bits == 0 {
        return Err(CliError::Usage("trials and bits must be at least 1".into()));
    }
    let grid: Vec<PowerDbm> = cfg.power_grid()?.into_iter().map(PowerDbm).collect();
    let records = ber_sweep(&grid, &cfg.rx, &cfg.setup(), &cfg.sweep_config())?;
    let path = common.out.clone().or(cfg.output.sweep.clone());
    let mut out = open_out(path.as_deref())?;
    match cfg.output.format.unwrap_or_default() {
        Format::Csv => write_sweep_csv(&records, &mut out)?,
        Format::Jsonl => write_jsonl(&records, &mut out)?,
    }
    out.flush().map_err(io_err)
}

#[derive(Serialize)]
struct ReceiveRecord {
    power_dbm: f64,
    offset_ppm: f64,
    locked: bool,
    lock_time_s: Option<f64>,
    lock_cycles: Option<usize>,
    residual_if_hz: Option<f64>,
    snr_step_a_db: Option<f64>,
    snr_step_c_db: Option<f64>,
    sensitivity_dbm: f64,
    n_bits: usize,
    n_errors: usize,
    n_erased: usize,
    ber: f64,
    mode_history: String,
}

const RECEIVE_CSV_HEADER: &str = "power_dbm,offset_ppm,locked,lock_time_s,lock_cycles,residual_if_hz,snr_step_a_db,snr_step_c_db,sensitivity_dbm,n_bits,n_errors,n_erased,ber,mode_history";

pub fn receive(
    common: &Common,
    power: Option<f64>,
    offset_ppm: Option<f64>,
    bits: Option<usize>,
) -> Result<(), CliError> {
    let mut cfg = load(common)?;
    if let Some(v) = power {
        cfg.run.power_dbm = v;
    }
    if let Some(v) = offset_ppm {
        cfg.run.offset_ppm = v;
    }
    if let Some(v) = bits {
        cfg.run.payload_bits = v;
    }
    cfg.validate()?;
    let mut rng = rng_from_seed(mix_seed(cfg.run.seed, 0));
    let payload = BitStream::from_bools((0..cfg.run.payload_bits).map(|_| rng.random_bool(0.5)));
    let rf = Frame::new(&cfg.rx, payload.clone()).to_signal(
        cfg.rx.symbol_rate,
        cfg.run.cfo_hz,
        PowerDbm(cfg.run.power_dbm),
        DEFAULT_SAMPLE_RATE,
    )?;
    let mut setup = cfg.setup();
    setup.seed = mix_seed(cfg.run.seed, 1);
    let rx = run_receive(&rf, &cfg.rx, &setup)?;
    let errors = rx.count_errors(&payload);
    let r = &rx.report;
    let rec = ReceiveRecord {
        power_dbm: cfg.run.power_dbm,
        offset_ppm: cfg.run.offset_ppm,
        locked: r.locked(),
        lock_time_s: r.lock_time_s,
        lock_cycles: r.lock_cycles,
        residual_if_hz: r.residual_if_hz,
        snr_step_a_db: r.snr_step_a_db,
        snr_step_c_db: r.snr_step_c_db,
        sensitivity_dbm: r.sensitivity_dbm,
        n_bits: payload.len(),
        n_errors: errors,
        n_erased: rx.erasures.len(),
        ber: errors as f64 / payload.len().max(1) as f64,
        mode_history: r.history_string(),
    };
    let path = common.out.clone().or(cfg.output.report.clone());
    let mut out = open_out(path.as_deref())?;
    match cfg.output.format.unwrap_or_default() {
        Format::Csv => {
            let f = |v: Option<f64>| v.map(sig12).unwrap_or_default();
            writeln!(out, "{RECEIVE_CSV_HEADER}").map_err(io_err)?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                sig12(rec.power_dbm),
                sig12(rec.offset_ppm),
                rec.locked,
                f(rec.lock_time_s),
                rec.lock_cycles.map(|c| c.to_string()).unwrap_or_default(),
                f(rec.residual_if_hz),
                f(rec.snr_step_a_db),
                f(rec.snr_step_c_db),
                sig12(rec.sensitivity_dbm),
                rec.n_bits,
                rec.n_errors,
                rec.n_erased,
                sig12(rec.ber),
                csv_field(&rec.mode_history),
            )
            .map_err(io_err)?;
        }
        Format::Jsonl => write_jsonl(&[rec], &mut out)?,
    }
    out.flush().map_err(io_err)
}

#[derive(Serialize)]
struct ResponseRow {
    offset_hz: f64,
    gain_db: f64,
}

pub fn response(common: &Common, fmin: f64, fmax: f64, points: usize) -> Result<(), CliError> {
    let cfg = load(common)?;
    cfg.validate()?;
    if !(points >= 2 && fmin < fmax) {
        return Err(CliError::Usage("need points >= 2 and fmin < fmax".into()));
    }
    let offsets: Vec<f64> = (0..points)
        .map(|k| fmin + (fmax - fmin) * k as f64 / (points - 1) as f64)
        .collect();
    let mut out = open_out(common.out.as_deref())?;
    match cfg.output.format.unwrap_or_default() {
        Format::Csv => write_response_csv(&cfg.rffe, &offsets, &mut out)?,
        Format::Jsonl => {
            let rows: Vec<ResponseRow> = offsets
                .iter()
                .map(|&f| ResponseRow {
                    offset_hz: f,
                    gain_db: selectivity_response(f, &cfg.rffe),
                })
                .collect();
            write_jsonl(&rows, &mut out)?
        }
    }
    out.flush().map_err(io_err)
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Scheme {
    Manchester,
    Pie,
    Fm0,
    Miller,
}

#[derive(Args, Debug)]
#[group(id = "direction", required = true, multiple = false)]
pub struct Direction {
    #[arg(long)]
    encode: bool,
    #[arg(long)]
    decode: bool,
}

#[derive(Args, Debug)]
pub struct CodecArgs {
    #[arg(long, value_enum)]
    scheme: Scheme,
    #[command(flatten)]
    direction: Direction,
    /// Input text of 0/1 characters; whitespace is ignored.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output file. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 40e3)]
    bit_rate: f64,
    /// PIE reference interval.
    #[arg(long, default_value_t = 25e-6)]
    tari: f64,
    /// Miller subcarrier cycles per bit: 2, 4 or 8.
    #[arg(long, default_value_t = 4)]
    miller_m: u32,
    /// FM0 level of the first chip.
    #[arg(long, default_value_t = 1)]
    start_level: u8,
}

pub fn codec(a: &CodecArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| {
        CliError::Run(aiot_rx::Error::Io(format!("{}: {e}", a.input.display())))
    })?;
    let symbols = BitStream::parse(&text)?;
    let m = MillerM::try_from(a.miller_m)?;
    let out_text = if a.direction.encode {
        let chips = match a.scheme {
            Scheme::Manchester => manchester_encode(&symbols, a.bit_rate)?,
            Scheme::Pie => pie_encode(&symbols, a.tari)?,
            Scheme::Fm0 => fm0_encode(&symbols, a.bit_rate, a.start_level)?,
            Scheme::Miller => miller_encode(&symbols, m, a.bit_rate)?,
        };
        chips.to_bits().to_text()
    } else {
        let rate = match a.scheme {
            Scheme::Manchester | Scheme::Fm0 => 2.0 * a.bit_rate,
            Scheme::Pie => 2.0 / a.tari,
            Scheme::Miller => a.bit_rate * m.chips_per_bit() as f64,
        };
        let chips = ChipStream::new(symbols.into_vec(), rate)?;
        let bits = match a.scheme {
            Scheme::Manchester => manchester_decode(&chips)?,
            Scheme::Pie => pie_decode(&chips)?,
            Scheme::Fm0 => fm0_decode(&chips)?,
            Scheme::Miller => miller_decode(&chips, m)?,
        };
        bits.to_text()
    };
    let mut out = open_out(a.out.as_deref())?;
    writeln!(out, "{out_text}").map_err(io_err)?;
    out.flush().map_err(io_err)
}
