//! Synthesis parameter dumps.
//!
//! Binary layout (little-endian):
//!
//! | offset | size | field                       |
//! |--------|------|-----------------------------|
//! | 0      | 4    | magic `EXSP`                |
//! | 4      | 4    | version (1)                 |
//! | 8      | 4    | frame rate (250)            |
//! | 12     | 4    | sample rate (16000)         |
//! | 16     | 4    | frame count `T`             |
//! | 20     | 4    | harmonic count `K`          |
//! | 24     | 4    | noise band count `B`        |
//! | 28     | ...  | f32 streams: f0[T], a[T], h[T·K], η[T·B] |
//!
//! `h` and `η` are frame-major. The text form is JSON with the same header
//! fields and one array per frame for `h` and `η`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::SynthParams;
use crate::{FRAME_RATE, SAMPLE_RATE};

pub const MAGIC: &[u8; 4] = b"EXSP";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 28;

pub fn write_params_binary(p: &SynthParams) -> Vec<u8> {
    let values =
        p.f0.len() + p.amplitude.len() + p.harmonic_distribution.len() + p.noise_magnitudes.len();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * values);
    out.extend_from_slice(MAGIC);
    for v in [
        VERSION,
        FRAME_RATE,
        SAMPLE_RATE,
        p.n_frames() as u32,
        p.n_harmonics as u32,
        p.n_noise_bands as u32,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for stream in [
        &p.f0,
        &p.amplitude,
        &p.harmonic_distribution,
        &p.noise_magnitudes,
    ] {
        for &v in stream.iter() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn read_params_binary(bytes: &[u8]) -> Result<SynthParams> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::Format("params: missing EXSP header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let (version, frame_rate, sample_rate) = (word(0), word(1), word(2));
    let (t, k, b) = (word(3) as usize, word(4) as usize, word(5) as usize);
    if version != VERSION {
        return Err(Error::Format(format!(
            "params: unsupported version {version}"
        )));
    }
    check_rates(frame_rate, sample_rate)?;
    let expected = t
        .checked_mul(2 + k + b)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format("params: header dimensions overflow".into()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != expected {
        return Err(Error::Format(format!(
            "params: expected {expected} data bytes for {t} frames, got {}",
            body.len()
        )));
    }
    let mut values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
    let mut take = |n: usize| values.by_ref().take(n).collect::<Vec<f64>>();
    let p = SynthParams {
        f0: take(t),
        amplitude: take(t),
        harmonic_distribution: take(t * k),
        noise_magnitudes: take(t * b),
        n_harmonics: k,
        n_noise_bands: b,
    };
    p.validate()?;
    Ok(p)
}

fn check_rates(frame_rate: u32, sample_rate: u32) -> Result<()> {
    if frame_rate != FRAME_RATE || sample_rate != SAMPLE_RATE {
        return Err(Error::Format(format!(
            "params: expected frame_rate {FRAME_RATE} and sample_rate {SAMPLE_RATE}, got {frame_rate} and {sample_rate}"
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDocument {
    frame_rate: u32,
    sample_rate: u32,
    n_frames: usize,
    n_harmonics: usize,
    n_noise_bands: usize,
    f0: Vec<f64>,
    amplitude: Vec<f64>,
    harmonic_distribution: Vec<Vec<f64>>,
    noise_magnitudes: Vec<Vec<f64>>,
}

pub fn write_params_text(p: &SynthParams) -> String {
    let doc = ParamsDocument {
        frame_rate: FRAME_RATE,
        sample_rate: SAMPLE_RATE,
        n_frames: p.n_frames(),
        n_harmonics: p.n_harmonics,
        n_noise_bands: p.n_noise_bands,
        f0: p.f0.clone(),
        amplitude: p.amplitude.clone(),
        harmonic_distribution: (0..p.n_frames()).map(|t| p.harmonics(t).to_vec()).collect(),
        noise_magnitudes: (0..p.n_frames()).map(|t| p.noise(t).to_vec()).collect(),
    };
    serde_json::to_string(&doc).expect("params serialize")
}

pub fn read_params_text(text: &str) -> Result<SynthParams> {
    let doc: ParamsDocument = super::score_file::from_json_with_path(text)?;
    check_rates(doc.frame_rate, doc.sample_rate)?;
    let rows = |name: &str, rows: &[Vec<f64>], width: usize| -> Result<Vec<f64>> {
        if rows.len() != doc.n_frames {
            return Err(Error::Format(format!(
                "{name}: expected {} frames, got {}",
                doc.n_frames,
                rows.len()
            )));
        }
        if let Some(t) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::Format(format!(
                "{name}[{t}]: expected {width} values, got {}",
                rows[t].len()
            )));
        }
        Ok(rows.concat())
    };
    let harmonic_distribution = rows(
        "harmonic_distribution",
        &doc.harmonic_distribution,
        doc.n_harmonics,
    )?;
    let noise_magnitudes = rows("noise_magnitudes", &doc.noise_magnitudes, doc.n_noise_bands)?;
    for (name, v) in [("f0", &doc.f0), ("amplitude", &doc.amplitude)] {
        if v.len() != doc.n_frames {
            return Err(Error::Format(format!(
                "{name}: expected {} frames, got {}",
                doc.n_frames,
                v.len()
            )));
        }
    }
    let p = SynthParams {
        f0: doc.f0,
        amplitude: doc.amplitude,
        harmonic_distribution,
        noise_magnitudes,
        n_harmonics: doc.n_harmonics,
        n_noise_bands: doc.n_noise_bands,
    };
    p.validate()?;
    Ok(p)
}

/// Reads either encoding, chosen by the leading magic bytes.
pub fn read_params(bytes: &[u8]) -> Result<SynthParams> {
    if bytes.starts_with(MAGIC) {
        read_params_binary(bytes)
    } else {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::Format("params: neither binary nor UTF-8 text".into()))?;
        read_params_text(text)
    }
}
