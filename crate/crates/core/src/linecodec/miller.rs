use super::{check_bit_rate, BitStream, ChipStream};
use crate::error::{invalid, Error, Result};

/// Miller subcarrier cycles per bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MillerM {
    M2,
    M4,
    M8,
}

impl MillerM {
    pub fn cycles(self) -> usize {
        match self {
            MillerM::M2 => 2,
            MillerM::M4 => 4,
            MillerM::M8 => 8,
        }
    }

    pub fn chips_per_bit(self) -> usize {
        2 * self.cycles()
    }
}

impl TryFrom<u32> for MillerM {
    type Error = Error;

    fn try_from(m: u32) -> Result<Self> {
        match m {
            2 => Ok(MillerM::M2),
            4 => Ok(MillerM::M4),
            8 => Ok(MillerM::M8),
            _ => Err(invalid("m", format!("must be 2, 4 or 8, got {m}"))),
        }
    }
}

fn subcarrier(j: usize) -> u8 {
    u8::from(j % 2 == 0)
}

/// Miller-modulated subcarrier, `2 m` chips per bit.
///
/// The baseband level starts high, inverts mid-bit for a 1 and at the
/// boundary between two consecutive 0s. Each chip is the XNOR of the baseband
/// level with a square subcarrier of `m` cycles per bit.
pub fn miller_encode(bits: &BitStream, m: MillerM, bit_rate: f64) -> Result<ChipStream> {
    check_bit_rate(bit_rate)?;
    let half = m.cycles();
    let mut chips = Vec::with_capacity(bits.len() * 2 * half);
    let mut level = 1u8;
    let mut prev: Option<u8> = None;
    for &b in bits.as_slice() {
        if b == 0 && prev == Some(0) {
            level = 1 - level;
        }
        let first = level;
        let second = if b == 1 { 1 - level } else { level };
        for j in 0..2 * half {
            let l = if j < half { first } else { second };
            chips.push(1 - (l ^ subcarrier(j)));
        }
        level = second;
        prev = Some(b);
    }
    ChipStream::new(chips, bit_rate * (2 * half) as f64)
}

/// Decodes a chip-aligned Miller stream of either starting level.
pub fn miller_decode(chips: &ChipStream, m: MillerM) -> Result<BitStream> {
    let half = m.cycles();
    let per_bit = 2 * half;
    let c = chips.chips();
    if c.len() % per_bit != 0 {
        return Err(Error::Decode {
            code: "miller",
            position: c.len() - c.len() % per_bit,
            reason: format!("length not a multiple of {per_bit}"),
        });
    }
    let err = |position: usize, reason: &str| Error::Decode {
        code: "miller",
        position,
        reason: reason.into(),
    };
    let mut bits = Vec::with_capacity(c.len() / per_bit);
    let mut last: Option<(u8, u8)> = None;
    for (k, block) in c.chunks_exact(per_bit).enumerate() {
        let base = k * per_bit;
        let levels: Vec<u8> = block
            .iter()
            .enumerate()
            .map(|(j, &x)| 1 - (x ^ subcarrier(j)))
            .collect();
        let (first, second) = (levels[0], levels[half]);
        if let Some(j) = levels[..half].iter().position(|&l| l != first) {
            return Err(err(base + j, "subcarrier phase break"));
        }
        if let Some(j) = levels[half..].iter().position(|&l| l != second) {
            return Err(err(base + half + j, "subcarrier phase break"));
        }
        let bit = u8::from(first != second);
        if let Some((prev_bit, prev_level)) = last {
            let inverted = first != prev_level;
            if inverted != (bit == 0 && prev_bit == 0) {
                return Err(err(base, "boundary transition violates Miller rule"));
            }
        }
        bits.push(bit);
        last = Some((bit, second));
    }
    BitStream::new(bits)
}
