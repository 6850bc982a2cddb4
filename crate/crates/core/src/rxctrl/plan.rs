use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Smallest IF the default choice may take, to stay clear of flicker noise
/// and DC offsets.
const MIN_DEFAULT_IF: f64 = 1e6;
const LISTED: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfCandidate {
    /// Index in `cbw/4 + n * cbw/2`.
    pub n: u64,
    pub f_if: f64,
    /// Distance between the wanted channel and its image.
    pub image_offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfPlan {
    pub cbw: f64,
    /// The IF must exceed three channel bandwidths.
    pub lower_bound: f64,
    /// First admissible IFs in increasing order.
    pub candidates: Vec<IfCandidate>,
    pub chosen: IfCandidate,
    pub rationale: &'static str,
}

fn candidate(cbw: f64, n: u64) -> IfCandidate {
    let f_if = cbw / 4.0 + n as f64 * cbw / 2.0;
    IfCandidate {
        n,
        f_if,
        image_offset: 2.0 * f_if,
    }
}

/// Admissible IFs for channel bandwidth `cbw`.
///
/// Candidates sit at `cbw/4 + n * cbw/2`, which places the image channel
/// between channel rasters, and must exceed `3 * cbw`. The default is the
/// first candidate at or above 1 MHz.
pub fn plan_if(cbw: f64) -> Result<IfPlan> {
    ensure(cbw > 0.0 && cbw.is_finite(), "cbw", "must be positive")?;
    let lower_bound = 3.0 * cbw;
    let first = ((lower_bound - cbw / 4.0) / (cbw / 2.0)).floor().max(0.0) as u64;
    let candidates: Vec<IfCandidate> = (first..)
        .map(|n| candidate(cbw, n))
        .filter(|c| c.f_if > lower_bound)
        .take(LISTED)
        .collect();
    let n_chosen = ((MIN_DEFAULT_IF - cbw / 4.0) / (cbw / 2.0)).ceil().max(0.0) as u64;
    let chosen = (n_chosen..)
        .map(|n| candidate(cbw, n))
        .find(|c| c.f_if > lower_bound && c.f_if >= MIN_DEFAULT_IF)
        .expect("sequence is unbounded");
    Ok(IfPlan {
        cbw,
        lower_bound,
        candidates,
        chosen,
        rationale: "flicker/DC avoidance",
    })
}

/// Whether `f_if` lies on the candidate raster for `cbw`.
pub(crate) fn is_candidate(cbw: f64, f_if: f64) -> bool {
    let n = (f_if - cbw / 4.0) / (cbw / 2.0);
    f_if > 3.0 * cbw && n >= -1e-9 && (n - n.round()).abs() < 1e-6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_180k() {
        let p = plan_if(180e3).unwrap();
        let khz: Vec<f64> = p.candidates.iter().take(6).map(|c| c.f_if / 1e3).collect();
        assert_eq!(khz, vec![585.0, 675.0, 765.0, 855.0, 945.0, 1035.0]);
        assert_eq!(p.lower_bound, 540e3);
        assert_eq!(p.chosen.f_if, 1035e3);
        assert_eq!(p.chosen.n, 11);
        assert_eq!(p.candidates[0].image_offset, 1170e3);
    }

    #[test]
    fn toy_scale() {
        let p = plan_if(4.0).unwrap();
        assert_eq!(p.candidates[0].f_if, 13.0);
        assert_eq!(p.candidates[1].f_if, 15.0);
        assert_eq!(p.lower_bound, 12.0);
    }

    #[test]
    fn raster_membership() {
        assert!(is_candidate(180e3, 1.035e6));
        assert!(!is_candidate(180e3, 1.0e6));
        assert!(!is_candidate(180e3, 495e3));
        assert!(plan_if(0.0).is_err());
    }
}
