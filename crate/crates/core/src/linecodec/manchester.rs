use super::{check_bit_rate, BitStream, ChipStream};
use crate::error::{Error, Result};

/// Bit 1 becomes chips `(1, 0)`, bit 0 becomes `(0, 1)`.
pub fn manchester_encode(bits: &BitStream, bit_rate: f64) -> Result<ChipStream> {
    check_bit_rate(bit_rate)?;
    let chips = bits
        .as_slice()
        .iter()
        .flat_map(|&b| [b, 1 - b])
        .collect();
    ChipStream::new(chips, 2.0 * bit_rate)
}

pub fn manchester_decode(chips: &ChipStream) -> Result<BitStream> {
    let c = chips.chips();
    if c.len() % 2 != 0 {
        return Err(Error::Decode {
            code: "manchester",
            position: c.len() - 1,
            reason: "odd chip count".into(),
        });
    }
    c.chunks_exact(2)
        .enumerate()
        .map(|(i, pair)| match pair {
            [1, 0] => Ok(1),
            [0, 1] => Ok(0),
            _ => Err(Error::Decode {
                code: "manchester",
                position: 2 * i,
                reason: format!("invalid pair ({},{})", pair[0], pair[1]),
            }),
        })
        .collect::<Result<Vec<u8>>>()
        .and_then(BitStream::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_convention() {
        let c = manchester_encode(&BitStream::new(vec![1, 0]).unwrap(), 1e3).unwrap();
        assert_eq!(c.chips(), &[1, 0, 0, 1]);
        assert_eq!(c.chip_rate(), 2e3);
        let e = manchester_encode(&BitStream::default(), 1.0).unwrap();
        assert!(e.is_empty());
    }

    #[test]
    fn invalid_pair_reports_index() {
        let bad = ChipStream::new(vec![1, 1, 1, 0], 2.0).unwrap();
        match manchester_decode(&bad) {
            Err(Error::Decode { position, .. }) => assert_eq!(position, 0),
            other => panic!("{other:?}"),
        }
        let bad = ChipStream::new(vec![1, 0, 0, 0], 2.0).unwrap();
        assert!(matches!(
            manchester_decode(&bad),
            Err(Error::Decode { position: 2, .. })
        ));
        let odd = ChipStream::new(vec![1, 0, 1], 2.0).unwrap();
        assert!(manchester_decode(&odd).is_err());
    }
}
