//! Behavioral model of the mixer-first front-end.
//!
//! The chain is a complex rotation by the LO, a frequency-domain gain mask
//! ([`selectivity_response`]), input-referred noise and a flat gain. Offsets
//! passed to the mask are frequencies after down-conversion, so `+if_hz` is
//! the wanted sideband when the gyrator shifts the passband upward.

mod chain;
mod selectivity;

pub use chain::{
    apply_frontend, apply_selectivity, downconvert, frontend_chain, noise_density_at,
};
pub(crate) use chain::rotate;
pub use selectivity::{default_oob_profile, selectivity_response, write_response_csv};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Front-end parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RffeConfig {
    /// Gyrator transconductance in siemens.
    pub gm: f64,
    /// Gyrator capacitor in farads.
    pub cap: f64,
    /// Shift the passband toward positive offsets.
    pub gyrator_positive: bool,
    /// Flat voltage gain of the TIA stage.
    pub gain_db: f64,
    pub nf_db: f64,
    /// Image rejection ratio.
    pub irr_db: f64,
    /// Intermediate frequency the passband is planned around.
    pub if_hz: f64,
    /// Channel bandwidth.
    pub cbw_hz: f64,
    /// Flicker corner of the noise figure, `None` for a flat NF.
    pub flicker_corner_hz: Option<f64>,
    /// Frequency at which the NF equals `nf_db` when flicker is on.
    pub nf_ref_hz: f64,
    /// `(offset Hz, rejection dB)` anchors beyond the passband. `None` uses
    /// [`default_oob_profile`].
    pub oob_profile: Option<Vec<(f64, f64)>>,
}

impl Default for RffeConfig {
    fn default() -> Self {
        RffeConfig {
            gm: 10.35e-6,
            cap: 20e-12,
            gyrator_positive: true,
            gain_db: 20.0,
            nf_db: 12.0,
            irr_db: 16.7,
            if_hz: 1.035e6,
            cbw_hz: 180e3,
            flicker_corner_hz: Some(200e3),
            nf_ref_hz: 1.035e6,
            oob_profile: None,
        }
    }
}

impl RffeConfig {
    pub fn validate(&self) -> Result<()> {
        gyrator_shift(self.gm, self.cap, self.gyrator_positive)?;
        ensure(self.gm >= 0.0, "gm", "must be non-negative")?;
        ensure(
            self.irr_db.is_finite() && self.irr_db >= 0.0,
            "irr_db",
            "must be non-negative",
        )?;
        ensure(self.gain_db.is_finite(), "gain_db", "must be finite")?;
        ensure(
            self.nf_db.is_finite() && self.nf_db >= 0.0,
            "nf_db",
            "must be non-negative",
        )?;
        ensure(
            self.if_hz.is_finite() && self.if_hz > 0.0,
            "if_hz",
            "must be positive",
        )?;
        ensure(
            self.cbw_hz > 0.0 && self.cbw_hz < 2.0 * self.if_hz,
            "cbw_hz",
            "must be positive and below twice the IF",
        )?;
        ensure(
            self.nf_ref_hz > 0.0,
            "nf_ref_hz",
            "must be positive",
        )?;
        if let Some(fc) = self.flicker_corner_hz {
            ensure(fc.is_finite() && fc >= 0.0, "flicker_corner_hz", "must be non-negative")?;
        }
        if let Some(profile) = &self.oob_profile {
            ensure(!profile.is_empty(), "oob_profile", "needs at least one anchor")?;
            for w in profile.windows(2) {
                ensure(
                    w[1].0 > w[0].0,
                    "oob_profile",
                    "offsets must be strictly increasing",
                )?;
                ensure(
                    w[1].1 >= w[0].1,
                    "oob_profile",
                    "rejection must be non-decreasing with offset",
                )?;
            }
            ensure(
                profile.iter().all(|&(f, r)| f > 0.0 && r.is_finite() && r >= 0.0),
                "oob_profile",
                "offsets must be positive and rejections non-negative",
            )?;
        }
        Ok(())
    }

    /// Signed passband shift of the gyrator.
    pub fn shift_hz(&self) -> f64 {
        2.0 * self.gm / self.cap * if self.gyrator_positive { 1.0 } else { -1.0 }
    }

    pub fn oob_anchors(&self) -> Vec<(f64, f64)> {
        self.oob_profile
            .clone()
            .unwrap_or_else(|| default_oob_profile(self.if_hz, self.cbw_hz))
    }
}

/// Passband shift `2 gm / cap`, negative when `positive` is false.
pub fn gyrator_shift(gm: f64, cap: f64, positive: bool) -> Result<f64> {
    ensure(cap.is_finite() && cap > 0.0, "cap", "must be positive")?;
    ensure(gm.is_finite(), "gm", "must be finite")?;
    let df = 2.0 * gm / cap;
    Ok(if positive { df } else { -df })
}
