use super::{BitStream, ChipStream};
use crate::error::{ensure, Error, Result};

const DATA0: [u8; 2] = [1, 0];
const DATA1: [u8; 4] = [1, 1, 1, 0];

/// Pulse-interval encoding with a chip of `tari / 2`.
///
/// Data-0 lasts one Tari (`1 0`), data-1 lasts two (`1 1 1 0`). Every symbol
/// ends in a low pulse of half a Tari.
pub fn pie_encode(bits: &BitStream, tari: f64) -> Result<ChipStream> {
    ensure(tari.is_finite() && tari > 0.0, "tari", "must be positive")?;
    let mut chips = Vec::with_capacity(3 * bits.len());
    for &b in bits.as_slice() {
        if b == 1 {
            chips.extend_from_slice(&DATA1);
        } else {
            chips.extend_from_slice(&DATA0);
        }
    }
    ChipStream::new(chips, 2.0 / tari)
}

pub fn pie_decode(chips: &ChipStream) -> Result<BitStream> {
    let mut bits = Vec::new();
    let mut run = 0usize;
    let mut start = 0usize;
    for (i, &c) in chips.chips().iter().enumerate() {
        if c == 1 {
            if run == 0 {
                start = i;
            }
            run += 1;
            continue;
        }
        match run {
            1 => bits.push(0),
            3 => bits.push(1),
            _ => {
                return Err(Error::Decode {
                    code: "pie",
                    position: if run == 0 { i } else { start },
                    reason: format!("high run of {run} chips"),
                })
            }
        }
        run = 0;
    }
    if run > 0 {
        return Err(Error::Decode {
            code: "pie",
            position: start,
            reason: "symbol without trailing low pulse".into(),
        });
    }
    BitStream::new(bits)
}
