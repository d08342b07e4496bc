//! RIFF/WAVE encoding and decoding for mono audio.
//!
//! Writing produces a canonical 44-byte header followed by the `data` chunk.
//! 16-bit PCM samples are clamped to `[-1, 1]`, scaled by 32767 and rounded
//! half away from zero. Reading accepts 16-bit PCM and 32-bit float, mono,
//! and skips chunks it does not know.

use crate::error::{Error, Result};
use crate::synth::AudioBuffer;

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleFormat {
    #[default]
    Pcm16,
    Float32,
}

impl SampleFormat {
    fn code(self) -> u16 {
        match self {
            SampleFormat::Pcm16 => FORMAT_PCM,
            SampleFormat::Float32 => FORMAT_IEEE_FLOAT,
        }
    }

    fn bits(self) -> u16 {
        match self {
            SampleFormat::Pcm16 => 16,
            SampleFormat::Float32 => 32,
        }
    }
}

/// Quantizes one sample to 16-bit PCM.
pub fn quantize_pcm16(x: f64) -> i16 {
    let x = if x.is_nan() { 0.0 } else { x.clamp(-1.0, 1.0) };
    (x * 32767.0).round() as i16
}

/// Encodes mono audio as a WAV file.
pub fn write_wav(audio: &AudioBuffer, format: SampleFormat) -> Vec<u8> {
    let bytes_per_sample = (format.bits() / 8) as u32;
    let data_len = audio.len() as u32 * bytes_per_sample;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format.code().to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&audio.sample_rate.to_le_bytes());
    out.extend_from_slice(&(audio.sample_rate * bytes_per_sample).to_le_bytes());
    out.extend_from_slice(&(bytes_per_sample as u16).to_le_bytes());
    out.extend_from_slice(&format.bits().to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    match format {
        SampleFormat::Pcm16 => {
            for &s in &audio.samples {
                out.extend_from_slice(&quantize_pcm16(s).to_le_bytes());
            }
        }
        SampleFormat::Float32 => {
            for &s in &audio.samples {
                out.extend_from_slice(&(s as f32).to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format(format!("unexpected end of {what}")));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

/// Decodes a mono WAV file (16-bit PCM or 32-bit float).
pub fn read_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4, "RIFF header")? != b"RIFF" {
        return Err(Error::Format("malformed RIFF: missing RIFF tag".into()));
    }
    r.u32("RIFF header")?;
    if r.take(4, "RIFF header")? != b"WAVE" {
        return Err(Error::Format("malformed RIFF: missing WAVE tag".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    loop {
        let id: [u8; 4] = r.take(4, "chunk header")?.try_into().unwrap();
        let size = r.u32("chunk header")? as usize;
        match &id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::Format(format!(
                        "malformed RIFF: fmt chunk of {size} bytes"
                    )));
                }
                let body = r.take(size, "fmt chunk")?;
                let mut f = Reader { buf: body, pos: 0 };
                let mut code = f.u16("fmt chunk")?;
                let channels = f.u16("fmt chunk")?;
                let rate = f.u32("fmt chunk")?;
                f.u32("fmt chunk")?;
                f.u16("fmt chunk")?;
                let bits = f.u16("fmt chunk")?;
                if code == FORMAT_EXTENSIBLE && size >= 40 {
                    // sub-format GUID starts with the actual format code
                    code = u16::from_le_bytes([body[24], body[25]]);
                }
                fmt = Some((code, channels, rate, bits));
                if size % 2 == 1 {
                    r.take(1, "fmt chunk").ok();
                }
            }
            b"data" => {
                let (code, channels, rate, bits) = fmt
                    .ok_or_else(|| Error::Format("malformed RIFF: data before fmt chunk".into()))?;
                if channels != 1 {
                    return Err(Error::Format(format!(
                        "unsupported channel count {channels}, expected mono"
                    )));
                }
                let data = r.take(size, "data chunk")?;
                let samples = match (code, bits) {
                    (FORMAT_PCM, 16) => data
                        .chunks_exact(2)
                        .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32767.0)
                        .collect(),
                    (FORMAT_IEEE_FLOAT, 32) => data
                        .chunks_exact(4)
                        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
                        .collect(),
                    _ => {
                        return Err(Error::Format(format!(
                            "unsupported format code {code} with {bits} bits per sample"
                        )))
                    }
                };
                return Ok(AudioBuffer::new(samples, rate));
            }
            _ => {
                r.take(size + size % 2, "chunk")?;
            }
        }
    }
}
