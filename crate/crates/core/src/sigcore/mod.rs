//! Signal representation, sources, channel impairments and power arithmetic.
//!
//! Every signal is a complex envelope around the nominal RF carrier, sampled
//! at [`SampledSignal::sample_rate`]. A tone at `+f` in a signal means an RF
//! component `f` Hz above the nominal carrier.

mod dump;
pub mod filter;
mod noise;
mod power;
mod signal;
mod source;
pub mod spectrum;

pub use dump::{read_dump, write_csv, write_dump, DumpHeader};
pub use noise::{add_awgn, noise_power, NoiseSpec};
pub use power::{dbm_to_watts, measure_power, watts_to_dbm, PowerDbm};
pub use signal::SampledSignal;
pub use source::make_ook_carrier;

pub use num_complex::Complex64;

/// Reference impedance for every power conversion.
pub const REF_IMPEDANCE_OHMS: f64 = 50.0;

/// Default simulation sample rate.
pub const DEFAULT_SAMPLE_RATE: f64 = 32.768e6;

/// Thermal noise floor at 290 K.
pub const THERMAL_FLOOR_DBM_HZ: f64 = -174.0;
