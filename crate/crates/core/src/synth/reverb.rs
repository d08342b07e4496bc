use super::AudioBuffer;
use crate::dsp::fft_convolve;
use crate::error::{Error, Result};
use crate::SAMPLE_RATE;

/// Required impulse response length in samples.
pub const IR_LENGTH: usize = 48_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReverbConfig {
    pub impulse_response: Vec<f64>,
    /// Apply the exponential tail decay.
    pub decay_enabled: bool,
    /// Last sample left untouched by the decay.
    pub decay_onset_sample: usize,
    /// Decay rate per second past the onset.
    pub decay_rate: f64,
    /// Keep the reverb tail instead of truncating to the dry length.
    pub emit_tail: bool,
}

impl ReverbConfig {
    pub fn new(impulse_response: Vec<f64>) -> Self {
        ReverbConfig {
            impulse_response,
            decay_enabled: true,
            decay_onset_sample: 16_000,
            decay_rate: 4.0,
            emit_tail: false,
        }
    }

    /// Dirac impulse at `t = 0`, the identity reverb.
    pub fn unit_impulse() -> Self {
        Self::impulse_at(0)
    }

    pub fn impulse_at(delay: usize) -> Self {
        let mut ir = vec![0.0; IR_LENGTH];
        ir[delay] = 1.0;
        Self::new(ir)
    }

    /// The impulse response with the tail decay applied (if enabled):
    /// `IR(t) · exp(-rate · (t - onset) / sr)` for `t > onset`.
    pub fn decayed_impulse_response(&self) -> Result<Vec<f64>> {
        if self.impulse_response.len() != IR_LENGTH {
            return Err(Error::ImpulseResponseLength {
                expected: IR_LENGTH,
                got: self.impulse_response.len(),
            });
        }
        let onset = self.decay_onset_sample;
        let sr = SAMPLE_RATE as f64;
        Ok(self
            .impulse_response
            .iter()
            .enumerate()
            .map(|(t, &v)| {
                if self.decay_enabled && t > onset {
                    v * (-self.decay_rate * (t - onset) as f64 / sr).exp()
                } else {
                    v
                }
            })
            .collect())
    }
}

/// Frequency-domain convolution of `dry` with the (decayed) impulse response.
pub fn apply_reverb(dry: &AudioBuffer, cfg: &ReverbConfig) -> Result<AudioBuffer> {
    let ir = cfg.decayed_impulse_response()?;
    let out_len = if cfg.emit_tail && !dry.is_empty() {
        dry.len() + ir.len() - 1
    } else {
        dry.len()
    };
    Ok(AudioBuffer::new(
        fft_convolve(&dry.samples, &ir, out_len),
        dry.sample_rate,
    ))
}
