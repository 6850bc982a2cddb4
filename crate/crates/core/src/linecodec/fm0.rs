use super::{check_bit_rate, BitStream, ChipStream};
use crate::error::{Error, Result};

/// FM0 (bi-phase space) with the first chip at `start_level`.
///
/// The level inverts at every bit boundary. A 0 adds a mid-bit inversion.
pub fn fm0_encode(bits: &BitStream, bit_rate: f64, start_level: u8) -> Result<ChipStream> {
    check_bit_rate(bit_rate)?;
    let mut level = start_level.min(1);
    let mut chips = Vec::with_capacity(2 * bits.len());
    for (i, &b) in bits.as_slice().iter().enumerate() {
        if i > 0 {
            level = 1 - level;
        }
        chips.push(level);
        if b == 0 {
            level = 1 - level;
        }
        chips.push(level);
    }
    ChipStream::new(chips, 2.0 * bit_rate)
}

/// Decodes either starting phase.
pub fn fm0_decode(chips: &ChipStream) -> Result<BitStream> {
    let c = chips.chips();
    if c.len() % 2 != 0 {
        return Err(Error::Decode {
            code: "fm0",
            position: c.len() - 1,
            reason: "odd chip count".into(),
        });
    }
    let mut bits = Vec::with_capacity(c.len() / 2);
    for (i, pair) in c.chunks_exact(2).enumerate() {
        if i > 0 && pair[0] == c[2 * i - 1] {
            return Err(Error::Decode {
                code: "fm0",
                position: 2 * i,
                reason: "missing boundary inversion".into(),
            });
        }
        bits.push(u8::from(pair[0] == pair[1]));
    }
    BitStream::new(bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bits_from_high() {
        let zero = fm0_encode(&BitStream::new(vec![0]).unwrap(), 1.0, 1).unwrap();
        assert_eq!(zero.chips(), &[1, 0]);
        let one = fm0_encode(&BitStream::new(vec![1]).unwrap(), 1.0, 1).unwrap();
        assert_eq!(one.chips(), &[1, 1]);
        let seq = fm0_encode(&BitStream::new(vec![1, 0, 0, 1]).unwrap(), 1.0, 1).unwrap();
        assert_eq!(seq.chips(), &[1, 1, 0, 1, 0, 1, 0, 0]);
    }

    #[test]
    fn boundary_violation() {
        let bad = ChipStream::new(vec![1, 1, 1, 0], 2.0).unwrap();
        assert!(matches!(
            fm0_decode(&bad),
            Err(Error::Decode { position: 2, .. })
        ));
    }
}
