use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::util::sig12;

/// Detector activity during one reference cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowEvent {
    None,
    Up,
    Dn,
    Both,
}

impl RowEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            RowEvent::None => "NONE",
            RowEvent::Up => "UP",
            RowEvent::Dn => "DN",
            RowEvent::Both => "BOTH",
        }
    }

    pub fn from_counts(up: usize, dn: usize) -> Self {
        match (up > 0, dn > 0) {
            (false, false) => RowEvent::None,
            (true, false) => RowEvent::Up,
            (false, true) => RowEvent::Dn,
            (true, true) => RowEvent::Both,
        }
    }
}

/// Loop state sampled at a reference rising edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub v_ctrl: f64,
    pub f_lo: f64,
    /// True carrier minus LO.
    pub f_if: f64,
    pub event: RowEvent,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoopTrajectory {
    pub f_ref: f64,
    rows: Vec<TrajectoryRow>,
}

/// Where and when the loop was declared locked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LockInfo {
    pub t_lock: f64,
    /// Reference cycles from the first row to `t_lock`.
    pub cycles: usize,
    pub row: usize,
}

impl LoopTrajectory {
    pub fn new(f_ref: f64) -> Self {
        LoopTrajectory {
            f_ref,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: TrajectoryRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            ensure(row.t > last.t, "t", "trajectory time must increase")?;
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[TrajectoryRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectoryRow> {
        self.rows.last()
    }

    /// `f_if - f_ref` of every row.
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.f_if - self.f_ref).collect()
    }

    /// Mean of `f_if - f_ref` over rows in the final `window` seconds.
    pub fn mean_error(&self, window: f64) -> Option<f64> {
        let t_end = self.rows.last()?.t;
        let sel: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.t >= t_end - window)
            .map(|r| r.f_if - self.f_ref)
            .collect();
        Some(sel.iter().sum::<f64>() / sel.len() as f64)
    }

    pub fn count_events(&self) -> (usize, usize) {
        self.rows.iter().fold((0, 0), |(u, d), r| match r.event {
            RowEvent::Up => (u + 1, d),
            RowEvent::Dn => (u, d + 1),
            RowEvent::Both => (u + 1, d + 1),
            RowEvent::None => (u, d),
        })
    }

    /// Time for the error to travel from 10% to 90% of its total change,
    /// where the final value is the mean error over the last quarter.
    pub fn rise_time_10_90(&self) -> Option<f64> {
        let e = self.errors();
        if e.len() < 8 {
            return None;
        }
        let tail = &e[3 * e.len() / 4..];
        let fin = tail.iter().sum::<f64>() / tail.len() as f64;
        let span = fin - e[0];
        if span == 0.0 {
            return None;
        }
        let frac = |x: f64| (x - e[0]) / span;
        let t10 = e.iter().position(|&x| frac(x) >= 0.1)?;
        let t90 = e.iter().position(|&x| frac(x) >= 0.9)?;
        Some(self.rows[t90].t - self.rows[t10].t)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t_s,v_ctrl_v,f_lo_hz,f_if_hz,event")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                sig12(r.t),
                sig12(r.v_ctrl),
                sig12(r.f_lo),
                sig12(r.f_if),
                r.event.as_str()
            )?;
        }
        Ok(())
    }
}

/// First time `|f_if - f_ref| <= tol` holds on `hold + 1` consecutive rows,
/// i.e. for `hold` reference cycles. Returns the time of the last of them.
pub fn lock_detect(traj: &LoopTrajectory, tol: f64, hold: usize) -> Option<LockInfo> {
    let mut monitor = LockMonitor::new(tol, hold.max(1));
    let t0 = traj.rows.first()?.t;
    traj.rows
        .iter()
        .enumerate()
        .find(|(_, r)| monitor.update(r.f_if - traj.f_ref))
        .map(|(i, r)| LockInfo {
            t_lock: r.t,
            cycles: ((r.t - t0) * traj.f_ref).round() as usize,
            row: i,
        })
}

/// Online form of [`lock_detect`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct LockMonitor {
    tol: f64,
    hold: usize,
    run: usize,
}

impl LockMonitor {
    pub(crate) fn new(tol: f64, hold: usize) -> Self {
        LockMonitor { tol, hold, run: 0 }
    }

    pub(crate) fn update(&mut self, err: f64) -> bool {
        if err.abs() <= self.tol {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.run > self.hold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(errs: &[f64]) -> LoopTrajectory {
        let mut t = LoopTrajectory::new(1e6);
        for (i, &e) in errs.iter().enumerate() {
            t.push(TrajectoryRow {
                t: i as f64 * 1e-6,
                v_ctrl: 0.6,
                f_lo: 0.0,
                f_if: 1e6 + e,
                event: RowEvent::None,
            })
            .unwrap();
        }
        t
    }

    #[test]
    fn locked_at_start() {
        let t = traj(&[0.0; 10]);
        let l = lock_detect(&t, 100.0, 3).unwrap();
        assert!((l.t_lock - 3e-6).abs() < 1e-15);
        assert_eq!(l.cycles, 3);
    }

    #[test]
    fn never_locked() {
        assert!(lock_detect(&traj(&[500.0; 10]), 100.0, 2).is_none());
        assert!(lock_detect(&traj(&[0.0, 500.0, 0.0, 500.0]), 100.0, 2).is_none());
    }

    #[test]
    fn late_lock() {
        let t = traj(&[900.0, 700.0, 300.0, 50.0, 20.0, -10.0, 5.0]);
        let l = lock_detect(&t, 100.0, 2).unwrap();
        assert_eq!(l.row, 5);
    }

    #[test]
    fn rejects_non_increasing_time() {
        let mut t = traj(&[0.0]);
        let mut r = t.rows()[0];
        r.t = 0.0;
        assert!(t.push(r).is_err());
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        traj(&[1.0]).write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "t_s,v_ctrl_v,f_lo_hz,f_if_hz,event\n0.00000000000e0,6.00000000000e-1,0.00000000000e0,1.00000100000e6,NONE\n"
        );
    }
}
