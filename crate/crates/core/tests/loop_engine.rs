use aiot_rx::linecodec::BitStream;
use aiot_rx::loloop::{
    analytic_pole, detector_gain, lock_detect, rise_time_10_90, run_calibration, CalibrationSetup,
    LoopParams, LoopTrajectory, RowEvent, VcoModel,
};
use aiot_rx::sigcore::{
    make_ook_carrier, PowerDbm, SampledSignal, DEFAULT_SAMPLE_RATE, REF_IMPEDANCE_OHMS,
};
use proptest::prelude::*;

fn ook(bits: Vec<u8>, rate: f64, power: f64) -> SampledSignal {
    make_ook_carrier(
        &BitStream::new(bits).unwrap(),
        rate,
        0.0,
        PowerDbm(power),
        DEFAULT_SAMPLE_RATE,
        REF_IMPEDANCE_OHMS,
    )
    .unwrap()
}

fn carrier(duration: f64) -> SampledSignal {
    ook(vec![1; (duration * 10e3).ceil() as usize], 10e3, -60.0)
}

fn setup(ppm: f64, seed: u64) -> CalibrationSetup {
    CalibrationSetup {
        vco: VcoModel {
            init_offset_ppm: ppm,
            ..Default::default()
        },
        seed,
        ..Default::default()
    }
}

/// Before the error first enters the `quantum` band around its final value it
/// keeps one sign; afterwards it never leaves the band.
fn first_order(traj: &LoopTrajectory, quantum: f64) -> bool {
    let e = traj.errors();
    let tail = &e[e.len() / 2..];
    let fin = tail.iter().sum::<f64>() / tail.len() as f64;
    let Some(enter) = e.iter().position(|x| (x - fin).abs() <= quantum) else {
        return false;
    };
    let sign = (e[0] - fin).signum();
    e[..enter].iter().all(|x| (x - fin).signum() == sign)
        && e[enter..].iter().all(|x| (x - fin).abs() <= quantum)
}

#[test]
fn plus_500_ppm_locks_in_about_twelve_cycles() {
    let c = carrier(1e-3);
    let s = setup(500.0, 1);
    let run = run_calibration(&c, &s, 1e-3).unwrap();
    let lock = run.lock.expect("locked");
    assert!((6..=30).contains(&lock.cycles), "{}", lock.cycles);
    let q = s.loop_params.cp_quantum();
    assert!(first_order(&run.trajectory, q));
    let last = run.trajectory.last().unwrap();
    assert!((last.f_if - s.loop_params.f_ref).abs() <= s.loop_params.lock_tolerance());
    let offline = lock_detect(&run.trajectory, s.loop_params.lock_tolerance(), 2).unwrap();
    assert_eq!(offline, lock);
}

#[test]
fn minus_500_ppm_mirrors() {
    let c = carrier(1e-3);
    let plus = run_calibration(&c, &setup(500.0, 1), 1e-3).unwrap();
    let minus = run_calibration(&c, &setup(-500.0, 1), 1e-3).unwrap();
    let pre = |r: &aiot_rx::loloop::CalibrationRun| {
        let n = r.lock.unwrap().row;
        r.trajectory.rows()[..n]
            .iter()
            .map(|row| row.event)
            .filter(|e| *e != RowEvent::None)
            .collect::<Vec<_>>()
    };
    assert!(pre(&plus).iter().all(|e| *e == RowEvent::Dn));
    assert!(pre(&minus).iter().all(|e| *e == RowEvent::Up));
    let (a, b) = (plus.lock.unwrap().cycles, minus.lock.unwrap().cycles);
    assert!((a as i64 - b as i64).abs() <= 6, "{a} vs {b}");
    let (e0p, e0m) = (plus.trajectory.errors()[0], minus.trajectory.errors()[0]);
    assert!((e0p + e0m).abs() < 1.0);
}

#[test]
fn zero_offset_stays_put() {
    let s = setup(0.0, 3);
    let run = run_calibration(&carrier(0.5e-3), &s, 0.5e-3).unwrap();
    let p = s.loop_params;
    let dv = p.cp_quantum() / p.k_vco;
    let lock = run.lock.unwrap();
    assert_eq!(lock.cycles, s.lock_hold_cycles);
    assert!(run
        .trajectory
        .rows()
        .iter()
        .all(|r| (r.v_ctrl - p.v_mid).abs() <= dv + 1e-12));
}

#[test]
fn absent_carrier_reports_no_lock() {
    let s = CalibrationSetup {
        noise: false,
        ..setup(500.0, 0)
    };
    let silent = SampledSignal::zeros(32768, DEFAULT_SAMPLE_RATE, 0.0).unwrap();
    let run = run_calibration(&silent, &s, 1e-3).unwrap();
    assert!(run.lock.is_none());
    assert_eq!(run.up_pulses + run.dn_pulses, 0);
}

#[test]
fn rejects_reference_outside_synthesizer_range() {
    let mut s = setup(0.0, 0);
    s.loop_params.f_ref = 2e6;
    assert!(run_calibration(&carrier(1e-4), &s, 1e-4).is_err());
}

#[test]
fn small_step_matches_analytic_pole() {
    let params = LoopParams {
        c_loop: 640e-12,
        ..Default::default()
    };
    let q = params.cp_quantum();
    let step_ppm = 20.0 * q / VcoModel::default().f_nominal * 1e6;
    let s = CalibrationSetup {
        loop_params: params,
        ..setup(step_ppm, 5)
    };
    let run = run_calibration(&carrier(1.2e-3), &s, 1.2e-3).unwrap();
    let measured = run.trajectory.rise_time_10_90().unwrap();
    let pole = analytic_pole(&params, detector_gain(params.f_ref)).unwrap();
    let predicted = rise_time_10_90(pole);
    let ratio = measured / predicted;
    assert!((0.65..=1.35).contains(&ratio), "{measured} vs {predicted}");
}

#[test]
fn zero_runs_do_not_move_lock_point() {
    let mut bits = Vec::new();
    while bits.len() < 120 {
        bits.extend([1u8; 8]);
        bits.extend([0u8; 32]);
    }
    let gappy = ook(bits, 10e3, -60.0);
    let dur = gappy.duration();
    let steady = carrier(dur);
    let s = setup(500.0, 2);
    let q = s.loop_params.cp_quantum();
    let a = run_calibration(&gappy, &s, dur).unwrap();
    let b = run_calibration(&steady, &s, dur).unwrap();
    assert!(a.lock.is_some() && b.lock.is_some());
    let fa = a.trajectory.last().unwrap().f_if;
    let fb = b.mean_residual(dur / 2.0).unwrap() + s.loop_params.f_ref;
    assert!((fa - fb).abs() <= q, "{fa} vs {fb}");
}

#[test]
fn trajectory_csv_rows() {
    let run = run_calibration(&carrier(0.1e-3), &setup(100.0, 0), 0.1e-3).unwrap();
    let mut buf = Vec::new();
    run.trajectory.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), run.trajectory.len() + 1);
    let t: Vec<f64> = run.trajectory.rows().iter().map(|r| r.t).collect();
    assert!(t.windows(2).all(|w| w[1] > w[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn charge_has_corrective_sign(ppm in prop_oneof![-900.0f64..-150.0, 150.0f64..900.0], seed in 0u64..1000) {
        let c = carrier(40e-6);
        let run = run_calibration(&c, &setup(ppm, seed), 40e-6).unwrap();
        let net = run.up_pulses as i64 - run.dn_pulses as i64;
        // positive ppm puts the IF below the reference: the LO must come down
        if ppm > 0.0 {
            prop_assert!(net < 0, "net {net}");
        } else {
            prop_assert!(net > 0, "net {net}");
        }
    }
}
