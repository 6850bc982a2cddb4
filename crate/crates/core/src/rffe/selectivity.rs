use std::f64::consts::FRAC_PI_2;
use std::io::Write;

use super::RffeConfig;
use crate::error::Result;
use crate::util::sig12;

/// Rejection difference between 40 MHz and 4 MHz for the default profile.
const OOB_DECADE_DB: f64 = 17.0;
const ANCHOR_HZ: [f64; 7] = [2e6, 4e6, 10e6, 20e6, 40e6, 100e6, 400e6];

/// First-order roll-off anchors starting at the passband edge `if + cbw/2`.
///
/// The corner is chosen so the curve drops exactly 17 dB from 4 MHz to
/// 40 MHz.
pub fn default_oob_profile(if_hz: f64, cbw_hz: f64) -> Vec<(f64, f64)> {
    let r = 10f64.powf(OOB_DECADE_DB / 10.0);
    let x = (r - 1.0) / (100.0 - r);
    let fc = 4e6 / x.sqrt();
    let f_pb = if_hz + cbw_hz / 2.0;
    let curve = |f: f64| 10.0 * ((1.0 + (f / fc).powi(2)) / (1.0 + (f_pb / fc).powi(2))).log10();
    std::iter::once(f_pb)
        .chain(ANCHOR_HZ.into_iter().filter(|&f| f > f_pb))
        .map(|f| (f, curve(f)))
        .collect()
}

fn oob_rejection(anchors: &[(f64, f64)], f: f64) -> f64 {
    let f = f.abs();
    let (f0, r0) = anchors[0];
    if f <= f0 {
        return 0.0;
    }
    let lf = f.ln();
    for w in anchors.windows(2) {
        let ((fa, ra), (fb, rb)) = (w[0], w[1]);
        if f <= fb {
            return ra + (rb - ra) * (lf - fa.ln()) / (fb.ln() - fa.ln());
        }
    }
    match anchors {
        [.., (fa, ra), (fb, rb)] => rb + (rb - ra) * (lf - fb.ln()) / (fb.ln() - fa.ln()),
        _ => r0,
    }
}

fn image_rejection(cfg: &RffeConfig, f: f64) -> f64 {
    let shift = cfg.shift_hz();
    if shift == 0.0 || f * shift >= 0.0 {
        return 0.0;
    }
    let edge = cfg.if_hz - cfg.cbw_hz / 2.0;
    let u = (f.abs() / edge).min(1.0);
    cfg.irr_db * (FRAC_PI_2 * u).sin().powi(2)
}

/// Gain in dB at down-converted offset `offset`.
///
/// Flat at `gain_db` out to the passband edge, rolling off through the OOB
/// anchors beyond it. The side opposite the gyrator shift is additionally
/// attenuated by up to `irr_db`, reaching it at the image channel.
pub fn selectivity_response(offset: f64, cfg: &RffeConfig) -> f64 {
    response_with(&cfg.oob_anchors(), cfg, offset)
}

/// [`selectivity_response`] with the OOB anchors already resolved.
pub(crate) fn response_with(anchors: &[(f64, f64)], cfg: &RffeConfig, offset: f64) -> f64 {
    cfg.gain_db - oob_rejection(anchors, offset) - image_rejection(cfg, offset)
}

/// Writes `offset_hz,gain_db` rows for each offset.
pub fn write_response_csv<W: Write>(cfg: &RffeConfig, offsets: &[f64], mut out: W) -> Result<()> {
    cfg.validate()?;
    writeln!(out, "offset_hz,gain_db")?;
    for &f in offsets {
        writeln!(out, "{},{}", sig12(f), sig12(selectivity_response(f, cfg)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passband_and_image() {
        let cfg = RffeConfig::default();
        assert_eq!(selectivity_response(0.0, &cfg), cfg.gain_db);
        assert_eq!(selectivity_response(cfg.if_hz, &cfg), cfg.gain_db);
        let img = selectivity_response(-cfg.if_hz, &cfg);
        assert!((img - (cfg.gain_db - 16.7)).abs() < 1e-9, "{img}");
    }

    #[test]
    fn seventeen_db_decade() {
        let cfg = RffeConfig::default();
        let d = selectivity_response(4e6, &cfg) - selectivity_response(40e6, &cfg);
        assert!((d - 17.0).abs() < 1e-9, "{d}");
    }

    #[test]
    fn symmetric_without_image_rejection() {
        let cfg = RffeConfig {
            irr_db: 0.0,
            ..Default::default()
        };
        for f in [1e5, 1.035e6, 3e6, 5e7] {
            assert_eq!(selectivity_response(f, &cfg), selectivity_response(-f, &cfg));
        }
    }

    #[test]
    fn monotone_beyond_passband() {
        let cfg = RffeConfig::default();
        let mut prev = f64::INFINITY;
        let mut f = 1.2e6;
        while f < 1e9 {
            let g = selectivity_response(f, &cfg);
            assert!(g <= prev + 1e-12);
            prev = g;
            f *= 1.1;
        }
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        write_response_csv(&RffeConfig::default(), &[0.0, 4e6], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("offset_hz,gain_db\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
