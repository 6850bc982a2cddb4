//! Reader-to-device and device-to-reader line codes.
//!
//! Encoders map a [`BitStream`] to a [`ChipStream`] of binary chips.
//! Decoders expect clean, chip-aligned input and reject any chip sequence the
//! code cannot produce.

mod fm0;
mod manchester;
mod miller;
mod pie;

pub use fm0::{fm0_decode, fm0_encode};
pub use manchester::{manchester_decode, manchester_encode};
pub use miller::{miller_decode, miller_encode, MillerM};
pub use pie::{pie_decode, pie_encode};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Result};

/// Payload bits, each 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BitStream(Vec<u8>);

impl BitStream {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(invalid("bits", format!("value {} at index {i}", bits[i])));
        }
        Ok(BitStream(bits))
    }

    /// Parses a string of `'0'`/`'1'` characters, ignoring whitespace.
    pub fn parse(text: &str) -> Result<Self> {
        text.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(invalid("bits", format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitStream)
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        BitStream(bits.into_iter().map(u8::from).collect())
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.0.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
    }
}

/// Binary chips emitted at `chip_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipStream {
    chips: Vec<u8>,
    chip_rate: f64,
}

impl ChipStream {
    pub fn new(chips: Vec<u8>, chip_rate: f64) -> Result<Self> {
        ensure(
            chip_rate.is_finite() && chip_rate > 0.0,
            "chip_rate",
            "must be positive",
        )?;
        if let Some(i) = chips.iter().position(|&c| c > 1) {
            return Err(invalid("chips", format!("value {} at index {i}", chips[i])));
        }
        Ok(ChipStream { chips, chip_rate })
    }

    pub fn chips(&self) -> &[u8] {
        &self.chips
    }

    pub fn chip_rate(&self) -> f64 {
        self.chip_rate
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.chips.len() as f64 / self.chip_rate
    }

    /// The chips reinterpreted as bits, e.g. to drive an OOK source.
    pub fn to_bits(&self) -> BitStream {
        BitStream(self.chips.clone())
    }
}

fn check_bit_rate(bit_rate: f64) -> Result<()> {
    ensure(
        bit_rate.is_finite() && bit_rate > 0.0,
        "bit_rate",
        "must be positive",
    )
}
