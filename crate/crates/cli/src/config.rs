use std::path::{Path, PathBuf};

use aiot_rx::loloop::{CalibrationSetup, LoopParams, SchmittConfig, VcoModel};
use aiot_rx::rffe::RffeConfig;
use aiot_rx::rxctrl::{RxConfig, SweepConfig};
use aiot_rx::sigcore::{NoiseSpec, THERMAL_FLOOR_DBM_HZ};
use serde::{Deserialize, Serialize};

use crate::output::Format;
use crate::CliError;

/// Loop engine settings not covered by the module configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub if_bw_hz: f64,
    pub add_noise: bool,
    pub gating: bool,
    pub gate_window_s: f64,
    pub rf_center_hz: f64,
    pub lock_hold_cycles: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        let s = CalibrationSetup::default();
        EngineConfig {
            if_bw_hz: s.if_bw_hz,
            add_noise: s.noise,
            gating: s.gating,
            gate_window_s: s.gate_window_s,
            rf_center_hz: s.rf_center_hz,
            lock_hold_cycles: s.lock_hold_cycles,
        }
    }
}

/// Stimulus for single runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Initial LO error of the free-running VCO.
    pub offset_ppm: f64,
    /// Carrier offset from the nominal carrier.
    pub cfo_hz: f64,
    pub power_dbm: f64,
    /// Length of a `sim-loop` run.
    pub duration_s: f64,
    /// Payload length of a `receive` run.
    pub payload_bits: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            offset_ppm: 0.0,
            cfo_hz: 0.0,
            power_dbm: -60.0,
            duration_s: 200e-6,
            payload_bits: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub pmin_dbm: f64,
    pub pmax_dbm: f64,
    pub step_db: f64,
    pub trials: usize,
    pub payload_bits: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            pmin_dbm: -96.0,
            pmax_dbm: -84.0,
            step_db: 2.0,
            trials: 4,
            payload_bits: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub trajectory: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

/// Everything a scenario file may set. Missing sections take defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub rx: RxConfig,
    #[serde(rename = "loop")]
    pub loop_params: LoopParams,
    pub vco: VcoModel,
    pub rffe: RffeConfig,
    pub noise: NoiseSpec,
    pub schmitt: SchmittConfig,
    pub engine: EngineConfig,
    pub run: RunConfig,
    pub sweep: SweepSection,
    pub output: OutputConfig,
}

impl ScenarioConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(ScenarioConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Loop engine setup. The noise section adds its excess density and
    /// figure on top of the front-end noise figure.
    pub fn setup(&self) -> CalibrationSetup {
        let mut rffe = self.rffe.clone();
        rffe.nf_db += self.noise.extra_nf + (self.noise.density - THERMAL_FLOOR_DBM_HZ);
        let mut vco = self.vco;
        vco.init_offset_ppm = self.run.offset_ppm;
        let e = &self.engine;
        CalibrationSetup {
            rffe,
            loop_params: self.loop_params,
            vco,
            schmitt: self.schmitt,
            if_bw_hz: e.if_bw_hz,
            noise: e.add_noise,
            gating: e.gating,
            gate_window_s: e.gate_window_s,
            rf_center_hz: e.rf_center_hz,
            true_carrier_hz: Some(e.rf_center_hz + self.run.cfo_hz),
            seed: self.run.seed,
            stop_on_lock: false,
            lock_hold_cycles: e.lock_hold_cycles,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            trials: self.sweep.trials,
            payload_bits: self.sweep.payload_bits,
            cfo_hz: self.run.cfo_hz,
            seed: self.run.seed,
        }
    }

    /// Power grid from `pmin` to `pmax` inclusive.
    pub fn power_grid(&self) -> Result<Vec<f64>, CliError> {
        let s = &self.sweep;
        if !(s.step_db > 0.0 && s.pmin_dbm <= s.pmax_dbm) {
            return Err(CliError::Usage(
                "sweep needs step_db > 0 and pmin_dbm <= pmax_dbm".into(),
            ));
        }
        let n = ((s.pmax_dbm - s.pmin_dbm) / s.step_db + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| s.pmin_dbm + k as f64 * s.step_db).collect())
    }

    /// Checks every child config before any run.
    pub fn validate(&self) -> Result<(), CliError> {
        self.noise.validate()?;
        self.rx.validate()?;
        self.setup().validate()?;
        if (self.rx.f_if_target - self.loop_params.f_ref).abs() >= 1.0 {
            return Err(CliError::Usage(format!(
                "rx.f_if_target {} must equal loop.f_ref {}",
                self.rx.f_if_target, self.loop_params.f_ref
            )));
        }
        if !(self.run.duration_s > 0.0 && self.run.duration_s.is_finite()) {
            return Err(CliError::Usage("run.duration_s must be positive".into()));
        }
        if !self.run.power_dbm.is_finite() && self.run.power_dbm != f64::NEG_INFINITY {
            return Err(CliError::Usage("run.power_dbm must be a number".into()));
        }
        Ok(())
    }
}
