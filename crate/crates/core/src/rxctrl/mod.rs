//! Receiver orchestration and link evaluation.
//!
//! The receiver works in three steps. In the uncertain-IF step it listens
//! through a wide IF filter with a free-running LO and detects the preamble.
//! In the calibration step the IF feedback loop pulls the LO until the
//! preamble lands on the reference frequency. In the approximate low-IF step
//! the LO is frozen, the IF filter narrows to the channel and the payload is
//! envelope-demodulated.

mod demod;
mod filter;
mod plan;
mod receiver;
mod sweep;

pub use demod::{envelope_demod, symbol_means, threshold_decide, ThresholdMode};
pub use filter::{if_filter, if_filter_group_delay};
pub use plan::{plan_if, IfCandidate, IfPlan};
pub use receiver::{run_receive, Frame, Reception};
pub use sweep::{
    ber_sweep, sensitivity_estimate, wilson_interval, write_sweep_csv, SweepConfig, SweepRecord,
    SWEEP_CSV_HEADER,
};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Which IF the narrow filter is centered on after calibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recenter {
    /// The residual IF measured on the preamble after lock.
    #[default]
    Measured,
    /// The nominal target IF.
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RxConfig {
    pub f_carrier: f64,
    /// Channel bandwidth.
    pub cbw: f64,
    pub f_if_target: f64,
    /// Wide IF bandwidth used before calibration.
    pub bw_step_a: f64,
    /// Narrow IF bandwidth used after calibration.
    pub bw_step_c: f64,
    pub snr_min_db: f64,
    pub margin_db: f64,
    pub symbol_rate: f64,
    /// Carrier-off symbols before the preamble.
    pub lead_in_symbols: usize,
    /// Carrier-on symbols used for detection and calibration.
    pub preamble_symbols: usize,
    pub recenter: Recenter,
    /// Lock is lost when the IF error exceeds this multiple of the lock
    /// tolerance over one monitor block.
    pub lock_loss_factor: f64,
    /// Symbols per lock monitor block.
    pub monitor_symbols: usize,
    /// Longest recalibration attempt after a lock loss, in symbols.
    pub recal_max_symbols: usize,
}

impl Default for RxConfig {
    fn default() -> Self {
        RxConfig {
            f_carrier: 900e6,
            cbw: 180e3,
            f_if_target: 1.035e6,
            bw_step_a: 1.2e6,
            bw_step_c: 180e3,
            snr_min_db: 15.0,
            margin_db: 6.0,
            symbol_rate: 10e3,
            lead_in_symbols: 2,
            preamble_symbols: 16,
            recenter: Recenter::Measured,
            lock_loss_factor: 3.0,
            monitor_symbols: 8,
            recal_max_symbols: 64,
        }
    }
}

impl RxConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.cbw > 0.0 && self.cbw.is_finite(), "cbw", "must be positive")?;
        ensure(self.f_carrier > 0.0, "f_carrier", "must be positive")?;
        ensure(
            plan::is_candidate(self.cbw, self.f_if_target),
            "f_if_target",
            format!("{} Hz is not an IF plan candidate", self.f_if_target),
        )?;
        ensure(
            self.bw_step_a > self.bw_step_c && self.bw_step_c >= self.cbw,
            "bw_step_c",
            "bandwidths must satisfy bw_step_a > bw_step_c >= cbw",
        )?;
        ensure(
            self.f_if_target - self.bw_step_c / 2.0 > 0.0,
            "bw_step_c",
            "narrow band must stay above DC",
        )?;
        ensure(
            self.symbol_rate > 0.0 && self.symbol_rate.is_finite(),
            "symbol_rate",
            "must be positive",
        )?;
        ensure(
            self.lead_in_symbols >= 1,
            "lead_in_symbols",
            "onset detection needs at least one carrier-off symbol",
        )?;
        ensure(self.preamble_symbols >= 2, "preamble_symbols", "must be at least 2")?;
        ensure(self.monitor_symbols >= 1, "monitor_symbols", "must be at least 1")?;
        ensure(self.recal_max_symbols >= 1, "recal_max_symbols", "must be at least 1")?;
        ensure(
            self.lock_loss_factor >= 1.0,
            "lock_loss_factor",
            "must be at least 1",
        )
    }

    pub fn sensitivity(&self, nf_db: f64) -> Result<f64> {
        sensitivity_estimate(self.bw_step_c, self.snr_min_db, nf_db, self.margin_db)
            .map(|p| p.0)
    }
}

/// Receiver operating step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RxMode {
    UncertainIf,
    Calibrating,
    ApproxLowIf,
}

impl RxMode {
    pub fn label(self) -> &'static str {
        match self {
            RxMode::UncertainIf => "A",
            RxMode::Calibrating => "B",
            RxMode::ApproxLowIf => "C",
        }
    }
}

/// Outcome of one reception.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    /// Link-budget sensitivity for the configured narrow bandwidth.
    pub sensitivity_dbm: f64,
    /// Payload bit error rate, filled in when a reference is available.
    pub ber: Option<f64>,
    pub snr_step_a_db: Option<f64>,
    pub snr_step_c_db: Option<f64>,
    /// Time from preamble onset to lock.
    pub lock_time_s: Option<f64>,
    pub lock_cycles: Option<usize>,
    /// IF measured after lock.
    pub residual_if_hz: Option<f64>,
    pub mode_history: Vec<RxMode>,
}

impl LinkReport {
    pub fn locked(&self) -> bool {
        self.lock_time_s.is_some()
    }

    pub fn history_string(&self) -> String {
        self.mode_history.iter().map(|m| m.label()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        RxConfig::default().validate().unwrap();
        let s = RxConfig::default().sensitivity(12.0).unwrap();
        assert!((s - (-88.45)).abs() < 0.01);
    }

    #[test]
    fn rejects_off_plan_if_and_bad_bandwidths() {
        let bad = RxConfig {
            f_if_target: 1.0e6,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RxConfig {
            bw_step_c: 100e3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = RxConfig {
            bw_step_a: 150e3,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn history_labels() {
        let r = LinkReport {
            sensitivity_dbm: 0.0,
            ber: None,
            snr_step_a_db: None,
            snr_step_c_db: None,
            lock_time_s: None,
            lock_cycles: None,
            residual_if_hz: None,
            mode_history: vec![RxMode::UncertainIf, RxMode::Calibrating],
        };
        assert_eq!(r.history_string(), "AB");
        assert!(!r.locked());
    }
}
