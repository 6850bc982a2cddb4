use serde::{Deserialize, Serialize};

/// Detector output for one reference edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RfdEvent {
    None,
    /// `f_if` above `f_ref`: raise the LO.
    Up,
    /// `f_if` below `f_ref`: lower the LO.
    Dn,
}

/// Rotational frequency detector state.
///
/// The detector is clocked on the four quadrature edges of the reference, so
/// `ref_quadrant` advances by one per call and a full reference cycle spans
/// four calls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RfdState {
    pub ref_quadrant: u8,
    /// Relative quadrant at the previous call, `None` after a resync.
    pub last_rel: Option<u8>,
    /// Direction of the last observed rotation, used to resolve half turns.
    pub last_dir: i8,
}

impl RfdState {
    /// Forgets the previous sample so the next call cannot emit.
    pub fn resync(&mut self) {
        self.last_rel = None;
    }
}

/// Quadrant of the I/Q bit pair, counter-clockwise from the first quadrant.
pub fn quadrant(i_bit: u8, q_bit: u8) -> u8 {
    match (i_bit != 0, q_bit != 0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    }
}

/// One detector clock.
///
/// The IF quadrant is compared with the reference quadrant. Rotation of the
/// relative quadrant across the 3 -> 0 boundary emits UP, across 0 -> 3 emits
/// DN, so the pulse rate equals `|f_if - f_ref|`. A jump of two quadrants is
/// taken in the last observed direction.
pub fn rfd_step(i_bit: u8, q_bit: u8, state: RfdState) -> (RfdEvent, RfdState) {
    let rel = (quadrant(i_bit, q_bit) + 4 - state.ref_quadrant) % 4;
    let mut next = RfdState {
        ref_quadrant: (state.ref_quadrant + 1) % 4,
        last_rel: Some(rel),
        last_dir: state.last_dir,
    };
    let Some(prev) = state.last_rel else {
        return (RfdEvent::None, next);
    };
    let (dir, steps) = match (rel + 4 - prev) % 4 {
        0 => return (RfdEvent::None, next),
        1 => (1, 1),
        3 => (-1, 1),
        _ if state.last_dir != 0 => (state.last_dir, 2),
        _ => return (RfdEvent::None, next),
    };
    next.last_dir = dir;
    let crosses = if dir > 0 {
        prev + steps >= 4
    } else {
        prev < steps
    };
    let event = match (crosses, dir > 0) {
        (false, _) => RfdEvent::None,
        (true, true) => RfdEvent::Up,
        (true, false) => RfdEvent::Dn,
    };
    (event, next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    /// Counts pulses for an ideal IF at `f_if` sampled on quadrature edges of
    /// `f_ref` over `cycles` reference periods.
    fn count(f_if: f64, f_ref: f64, cycles: usize, phase: f64) -> (usize, usize) {
        let mut st = RfdState::default();
        let (mut up, mut dn) = (0, 0);
        for k in 0..4 * cycles {
            let t = k as f64 / (4.0 * f_ref);
            let ph = TAU * f_if * t + phase;
            let (i, q) = (u8::from(ph.cos() > 0.0), u8::from(ph.sin() > 0.0));
            let (ev, s) = rfd_step(i, q, st);
            st = s;
            match ev {
                RfdEvent::Up => up += 1,
                RfdEvent::Dn => dn += 1,
                RfdEvent::None => {}
            }
        }
        (up, dn)
    }

    #[test]
    fn quadrant_map() {
        assert_eq!(quadrant(1, 1), 0);
        assert_eq!(quadrant(0, 1), 1);
        assert_eq!(quadrant(0, 0), 2);
        assert_eq!(quadrant(1, 0), 3);
    }

    #[test]
    fn equal_frequencies_are_silent() {
        assert_eq!(count(1.035e6, 1.035e6, 1000, 0.3), (0, 0));
    }

    #[test]
    fn slow_if_gives_dn_only() {
        let (up, dn) = count(0.9 * 1.035e6, 1.035e6, 100, 0.1);
        assert_eq!(up, 0);
        assert!((dn as i64 - 10).abs() <= 2, "{dn}");
    }

    #[test]
    fn fast_if_gives_about_ten_up() {
        let (up, dn) = count(1.1 * 1.035e6, 1.035e6, 100, 0.1);
        assert_eq!(dn, 0);
        assert!((up as i64 - 10).abs() <= 2, "{up}");
    }

    #[test]
    fn resync_suppresses_output() {
        let mut st = RfdState {
            ref_quadrant: 0,
            last_rel: Some(3),
            last_dir: 1,
        };
        st.resync();
        let (ev, _) = rfd_step(1, 1, st);
        assert_eq!(ev, RfdEvent::None);
    }
}
