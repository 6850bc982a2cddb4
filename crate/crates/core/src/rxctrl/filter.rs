use crate::error::{ensure, Result};
use crate::sigcore::filter::ComplexBandpass;
use crate::sigcore::SampledSignal;

/// Complex 4th-order Butterworth band-pass around `+center` with -3 dB width
/// `bw`. Negative frequencies, including the image, are rejected.
///
/// Group delay at the center is [`if_filter_group_delay`].
pub fn if_filter(iq: &SampledSignal, center: f64, bw: f64) -> Result<SampledSignal> {
    ensure(bw > 0.0, "bw", "must be positive")?;
    ensure(
        center - bw / 2.0 > 0.0,
        "center",
        "pass band must lie above DC",
    )?;
    ComplexBandpass::new(center, bw, iq.sample_rate())?.filter(iq)
}

/// Center-frequency group delay of [`if_filter`], about `0.83 / bw`.
pub fn if_filter_group_delay(bw: f64) -> f64 {
    2.613_125_929_752_753 / (std::f64::consts::PI * bw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigcore::filter::ComplexBandpass;
    use crate::sigcore::{add_awgn, NoiseSpec};

    const FS: f64 = 32.768e6;

    fn tone_gain_db(f: f64, center: f64, bw: f64) -> f64 {
        let x = SampledSignal::tone(1.0, f, 60000, FS, 0.0).unwrap();
        let y = if_filter(&x, center, bw).unwrap();
        let tail = y.slice(30000..60000);
        10.0 * tail.mean_square().unwrap().log10()
    }

    #[test]
    fn passband_and_stopband() {
        assert!(tone_gain_db(1.035e6, 1.035e6, 180e3).abs() < 1.0);
        assert!(tone_gain_db(1.035e6 + 5.0 * 180e3, 1.035e6, 180e3) < -30.0);
        assert!(tone_gain_db(1.035e6 + 2.0 * 180e3, 1.035e6, 180e3) < -30.0);
        assert!(tone_gain_db(-1.035e6, 1.035e6, 180e3) < -60.0);
    }

    #[test]
    fn white_noise_power_scales_with_bandwidth() {
        let z = SampledSignal::zeros(1 << 20, FS, 0.0).unwrap();
        let n = add_awgn(&z, &NoiseSpec::default(), 1e6, 4).unwrap();
        let y = if_filter(&n, 1.035e6, 180e3).unwrap();
        let ratio = 10.0 * (n.mean_square().unwrap() / y.mean_square().unwrap()).log10();
        let f = ComplexBandpass::new(1.035e6, 180e3, FS).unwrap();
        let expect = 10.0 * (FS / f.noise_bandwidth()).log10();
        assert!((ratio - expect).abs() < 0.2, "{ratio} vs {expect}");
    }

    #[test]
    fn group_delay_value() {
        assert!((if_filter_group_delay(180e3) - 4.621e-6).abs() < 1e-8);
        let x = SampledSignal::zeros(10, FS, 0.0).unwrap();
        assert!(if_filter(&x, 50e3, 180e3).is_err());
    }
}
