//! Debug dump of a [`SampledSignal`].
//!
//! Binary layout: one JSON line `{"sample_rate":..,"epoch":..,"len":..}`
//! terminated by `\n`, then `len` pairs of little-endian `f64` (re, im).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{Complex64, SampledSignal};
use crate::error::{Error, Result};
use crate::util::sig12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub sample_rate: f64,
    pub epoch: f64,
    pub len: usize,
}

pub fn write_dump<W: Write>(signal: &SampledSignal, mut out: W) -> Result<()> {
    let header = DumpHeader {
        sample_rate: signal.sample_rate(),
        epoch: signal.epoch(),
        len: signal.len(),
    };
    let line = serde_json::to_string(&header).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out, "{line}")?;
    let mut buf = Vec::with_capacity(16 * signal.len());
    for s in signal.samples() {
        buf.extend_from_slice(&s.re.to_le_bytes());
        buf.extend_from_slice(&s.im.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_dump<R: BufRead>(mut input: R) -> Result<SampledSignal> {
    let mut line = String::new();
    input.read_line(&mut line)?;
    let header: DumpHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Format(e.to_string()))?;
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    if raw.len() != 16 * header.len {
        return Err(Error::Format(format!(
            "expected {} payload bytes, found {}",
            16 * header.len,
            raw.len()
        )));
    }
    let samples = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    SampledSignal::new(samples, header.sample_rate, header.epoch)
}

/// Writes `t_s,re,im` rows.
pub fn write_csv<W: Write>(signal: &SampledSignal, mut out: W) -> Result<()> {
    writeln!(out, "t_s,re,im")?;
    for (i, s) in signal.samples().iter().enumerate() {
        writeln!(
            out,
            "{},{},{}",
            sig12(signal.time_of(i)),
            sig12(s.re),
            sig12(s.im)
        )?;
    }
    Ok(())
}
