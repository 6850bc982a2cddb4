use super::{LoopParams, RfdEvent};

/// Capacitor voltage after driving `event` for `dt` seconds.
///
/// UP sources `i_cp * cp_mismatch`, DN sinks `i_cp`. The result is clamped to
/// the rails. The series resistor adds no stored charge, so it only shifts
/// the instantaneous `v_ctrl` (see [`ChargePump::v_ctrl`]).
pub fn charge_pump_and_filter(event: RfdEvent, dt: f64, params: &LoopParams, v_cap: f64) -> f64 {
    let i = match event {
        RfdEvent::None => return v_cap,
        RfdEvent::Up => params.i_up(),
        RfdEvent::Dn => -params.i_cp,
    };
    (v_cap + i * dt / params.c_loop).clamp(params.v_min, params.v_max)
}

/// Charge pump with pulse timers for the sample-by-sample engine.
///
/// Each detector event extends the corresponding pulse by one pulse width.
#[derive(Debug, Clone, Copy)]
pub struct ChargePump {
    params: LoopParams,
    up_remaining: f64,
    dn_remaining: f64,
    v_cap: f64,
}

impl ChargePump {
    pub fn new(params: LoopParams, v_cap: f64) -> Self {
        ChargePump {
            params,
            up_remaining: 0.0,
            dn_remaining: 0.0,
            v_cap: v_cap.clamp(params.v_min, params.v_max),
        }
    }

    pub fn trigger(&mut self, event: RfdEvent) {
        match event {
            RfdEvent::Up => self.up_remaining += self.params.pulse_width(),
            RfdEvent::Dn => self.dn_remaining += self.params.pulse_width(),
            RfdEvent::None => {}
        }
    }

    /// Integrates the active currents over `dt` and returns `v_ctrl`.
    #[inline]
    pub fn advance(&mut self, dt: f64) -> f64 {
        let a_up = self.up_remaining.min(dt);
        let a_dn = self.dn_remaining.min(dt);
        if a_up > 0.0 || a_dn > 0.0 {
            let p = &self.params;
            let dq = p.i_up() * a_up - p.i_cp * a_dn;
            self.v_cap = (self.v_cap + dq / p.c_loop).clamp(p.v_min, p.v_max);
            self.up_remaining -= a_up;
            self.dn_remaining -= a_dn;
        }
        self.v_ctrl()
    }

    pub fn v_cap(&self) -> f64 {
        self.v_cap
    }

    /// Capacitor voltage plus the drop across the series resistor.
    pub fn v_ctrl(&self) -> f64 {
        let p = &self.params;
        let mut i = 0.0;
        if self.up_remaining > 0.0 {
            i += p.i_up();
        }
        if self.dn_remaining > 0.0 {
            i -= p.i_cp;
        }
        (self.v_cap + i * p.r_loop).clamp(p.v_min, p.v_max)
    }

    pub fn idle(&self) -> bool {
        self.up_remaining <= 0.0 && self.dn_remaining <= 0.0
    }
}
