//! Baseband-equivalent simulator of a crystal-less ambient-IoT receiver.
//!
//! The receiver down-converts an OOK carrier with a free-running ring VCO,
//! calibrates that VCO against a low-frequency reference by closing a loop
//! through the IF (Schmitt trigger, rotational frequency detector, charge
//! pump), and then narrows its IF bandwidth once the LO is calibrated.
//!
//! Modules:
//!
//! - [`sigcore`]: sampled complex signals, sources, AWGN and power arithmetic.
//! - [`linecodec`]: Manchester, PIE, FM0 and Miller line codes.
//! - [`rffe`]: behavioral mixer-first front-end (selectivity, image rejection, NF).
//! - [`loloop`]: the LO calibration loop and its digital alternatives (SAR, DFLL).
//! - [`rxctrl`]: IF planning, IF filtering, OOK demodulation, the three-step
//!   receiver and the sensitivity / BER harness.
//!
//! All frequencies are in Hz, times in seconds, powers in dBm into
//! [`sigcore::REF_IMPEDANCE_OHMS`]. The RF carrier is never sampled: every RF
//! frequency appears as an offset from the nominal carrier.

pub mod error;
pub mod linecodec;
pub mod loloop;
pub mod rffe;
pub mod rxctrl;
pub mod sigcore;
pub mod util;

pub use error::{Error, Result};
