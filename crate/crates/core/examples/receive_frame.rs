//! Receives one OOK frame through a +500 ppm LO and prints the link report.

use aiot_rx::linecodec::BitStream;
use aiot_rx::loloop::CalibrationSetup;
use aiot_rx::rxctrl::{run_receive, Frame, RxConfig};
use aiot_rx::sigcore::{PowerDbm, DEFAULT_SAMPLE_RATE};

fn main() -> aiot_rx::Result<()> {
    let cfg = RxConfig::default();
    let mut setup = CalibrationSetup::default();
    setup.vco.init_offset_ppm = 500.0;
    setup.seed = 3;
    let payload = BitStream::from_bools((0..200).map(|k| (k * 7919 % 13) % 2 == 0));
    for power in [-88.0, -60.0] {
        let rf = Frame::new(&cfg, payload.clone()).to_signal(
            cfg.symbol_rate,
            0.0,
            PowerDbm(power),
            DEFAULT_SAMPLE_RATE,
        )?;
        let rx = run_receive(&rf, &cfg, &setup)?;
        let r = &rx.report;
        println!(
            "{power} dBm: modes {}, lock after {:?} cycles, SNR A {:.1?} dB, SNR C {:.1?} dB, {} errors",
            r.history_string(),
            r.lock_cycles,
            r.snr_step_a_db,
            r.snr_step_c_db,
            rx.count_errors(&payload)
        );
    }
    Ok(())
}
