//! Harmonic-plus-noise synthesizer.
//!
//! Audio is the sum of an additive oscillator bank driven by `(f0, a, h)` and
//! uniform noise shaped by per-frame linear-band magnitudes `η`, optionally
//! followed by a convolution reverb.

mod harmonic;
mod noise;
mod reverb;
mod upsample;

pub use harmonic::{fundamental_phase, render_harmonic};
pub use noise::{noise_filter_taps, render_noise, NOISE_FILTER_TAPS};
pub use reverb::{apply_reverb, ReverbConfig, IR_LENGTH};
pub use upsample::{upsample_controls, UpsampleMode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{FRAME_SIZE, N_HARMONICS, N_NOISE_BANDS, SAMPLE_RATE};

/// Smallest value produced by [`exp_sigmoid`]; floor for amplitudes and noise magnitudes.
pub const MAGNITUDE_FLOOR: f64 = 1e-7;

/// `2 · sigmoid(x)^ln(10) + 1e-7`, the positive squashing used for all synthesis magnitudes.
pub fn exp_sigmoid(x: f64) -> f64 {
    // ln(sigmoid(x)) = -softplus(-x), stable for large |x|
    let log_sigmoid = if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    };
    2.0 * (std::f64::consts::LN_10 * log_sigmoid).exp() + MAGNITUDE_FLOOR
}

/// Zeroes harmonics above Nyquist (`k · f0 > sample_rate / 2`, `k` from 1) and
/// rescales the rest to sum to one.
pub fn normalize_harmonics(raw: &[f64], f0: f64, sample_rate: u32) -> Result<Vec<f64>> {
    if let Some(v) = raw.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::InvalidParams(format!(
            "harmonic weights must be non-negative, got {v}"
        )));
    }
    let nyquist = sample_rate as f64 / 2.0;
    let mut out: Vec<f64> = raw
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if (i + 1) as f64 * f0 > nyquist {
                0.0
            } else {
                v
            }
        })
        .collect();
    let total: f64 = out.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoAudibleHarmonics { f0 });
    }
    out.iter_mut().for_each(|v| *v /= total);
    Ok(out)
}

/// Frame-wise synthesis parameters: `f0`, amplitude, harmonic distribution and
/// noise magnitudes. The two vector streams are stored frame-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub f0: Vec<f64>,
    pub amplitude: Vec<f64>,
    pub harmonic_distribution: Vec<f64>,
    pub noise_magnitudes: Vec<f64>,
    pub n_harmonics: usize,
    pub n_noise_bands: usize,
}

impl SynthParams {
    /// Zero-length parameters with the default stream widths.
    pub fn empty() -> Self {
        Self::with_capacity(0)
    }

    pub fn with_capacity(frames: usize) -> Self {
        SynthParams {
            f0: Vec::with_capacity(frames),
            amplitude: Vec::with_capacity(frames),
            harmonic_distribution: Vec::with_capacity(frames * N_HARMONICS),
            noise_magnitudes: Vec::with_capacity(frames * N_NOISE_BANDS),
            n_harmonics: N_HARMONICS,
            n_noise_bands: N_NOISE_BANDS,
        }
    }

    pub fn n_frames(&self) -> usize {
        self.f0.len()
    }

    pub fn harmonics(&self, frame: usize) -> &[f64] {
        let k = self.n_harmonics;
        &self.harmonic_distribution[frame * k..(frame + 1) * k]
    }

    pub fn noise(&self, frame: usize) -> &[f64] {
        let k = self.n_noise_bands;
        &self.noise_magnitudes[frame * k..(frame + 1) * k]
    }

    pub fn push_frame(&mut self, f0: f64, amplitude: f64, harmonics: &[f64], noise: &[f64]) {
        debug_assert_eq!(harmonics.len(), self.n_harmonics);
        debug_assert_eq!(noise.len(), self.n_noise_bands);
        self.f0.push(f0);
        self.amplitude.push(amplitude);
        self.harmonic_distribution.extend_from_slice(harmonics);
        self.noise_magnitudes.extend_from_slice(noise);
    }

    /// Checks stream lengths and the per-frame invariants.
    pub fn validate(&self) -> Result<()> {
        let t = self.n_frames();
        let check_len = |what, expected, got| {
            if expected != got {
                Err(Error::LengthMismatch {
                    what,
                    expected,
                    got,
                })
            } else {
                Ok(())
            }
        };
        if self.n_harmonics == 0 || self.n_noise_bands < 2 {
            return Err(Error::InvalidParams(format!(
                "need at least 1 harmonic and 2 noise bands, got {} and {}",
                self.n_harmonics, self.n_noise_bands
            )));
        }
        check_len("amplitude frames", t, self.amplitude.len())?;
        check_len(
            "harmonic distribution values",
            t * self.n_harmonics,
            self.harmonic_distribution.len(),
        )?;
        check_len(
            "noise magnitude values",
            t * self.n_noise_bands,
            self.noise_magnitudes.len(),
        )?;
        let nyquist = SAMPLE_RATE as f64 / 2.0;
        for i in 0..t {
            let f0 = self.f0[i];
            if !(f0 >= 0.0 && f0.is_finite()) {
                return Err(Error::InvalidParams(format!("f0 at frame {i} is {f0}")));
            }
            let a = self.amplitude[i];
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "amplitude at frame {i} is {a}"
                )));
            }
            let h = self.harmonics(i);
            let mut sum = 0.0;
            for (k, &v) in h.iter().enumerate() {
                if !(v >= 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "harmonic {} at frame {i} is {v}",
                        k + 1
                    )));
                }
                // slack for f32 round trips through parameter dumps
                if v > 0.0 && (k + 1) as f64 * f0 > nyquist * (1.0 + 1e-6) {
                    return Err(Error::InvalidParams(format!(
                        "harmonic {} at frame {i} is above Nyquist but has weight {v}",
                        k + 1
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidParams(format!(
                    "harmonic distribution at frame {i} sums to {sum}"
                )));
            }
            if let Some((k, v)) = self
                .noise(i)
                .iter()
                .enumerate()
                .find(|(_, v)| !(**v >= MAGNITUDE_FLOOR * (1.0 - 1e-6)) || !v.is_finite())
            {
                return Err(Error::InvalidParams(format!(
                    "noise magnitude {k} at frame {i} is {v}, below the {MAGNITUDE_FLOOR} floor"
                )));
            }
        }
        Ok(())
    }
}

/// Mono audio with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        AudioBuffer {
            samples,
            sample_rate,
        }
    }

    pub fn silence(len: usize) -> Self {
        Self::new(vec![0.0; len], SAMPLE_RATE)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        (self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64).sqrt()
    }
}

/// Renders `params` to audio: harmonic plus filtered noise, then the optional reverb.
pub fn synthesize(
    params: &SynthParams,
    noise_seed: u64,
    reverb: Option<&ReverbConfig>,
) -> Result<AudioBuffer> {
    params.validate()?;
    let harmonic = render_harmonic(
        &params.f0,
        &params.amplitude,
        &params.harmonic_distribution,
        params.n_harmonics,
        SAMPLE_RATE,
    )?;
    let noise = render_noise(
        &params.noise_magnitudes,
        params.n_noise_bands,
        SAMPLE_RATE,
        noise_seed,
    )?;
    debug_assert_eq!(harmonic.len(), params.n_frames() * FRAME_SIZE);
    let mixed: Vec<f64> = harmonic
        .samples
        .iter()
        .zip(&noise.samples)
        .map(|(h, n)| h + n)
        .collect();
    let dry = AudioBuffer::new(mixed, SAMPLE_RATE);
    match reverb {
        Some(cfg) => apply_reverb(&dry, cfg),
        None => Ok(dry),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_sigmoid_values() {
        assert_eq!(exp_sigmoid(-1e6), 1e-7);
        assert!((exp_sigmoid(1e6) - (2.0 + 1e-7)).abs() < 1e-15);
        // 2 * 0.5^ln(10) evaluated independently
        let want = 2.0 * 0.5f64.powf(10f64.ln()) + 1e-7;
        assert!((exp_sigmoid(0.0) - want).abs() < 1e-15);
        assert!((exp_sigmoid(0.0) - 0.405399).abs() < 1e-6);
        let xs: Vec<f64> = (-200..=200).map(|i| i as f64 * 0.1).collect();
        assert!(xs
            .windows(2)
            .all(|w| exp_sigmoid(w[0]) <= exp_sigmoid(w[1])));
    }

    #[test]
    fn normalize_uniform_low_f0() {
        let h = normalize_harmonics(&[1.0; 60], 100.0, SAMPLE_RATE).unwrap();
        assert!(h.iter().all(|v| (v - 1.0 / 60.0).abs() < 1e-15));
    }

    #[test]
    fn normalize_masks_above_nyquist() {
        let h = normalize_harmonics(&[0.3; 60], 5000.0, SAMPLE_RATE).unwrap();
        // oracle: enumerate k·f0 <= 8000
        let audible: Vec<usize> = (1..=60).filter(|k| *k as f64 * 5000.0 <= 8000.0).collect();
        assert_eq!(audible, vec![1]);
        assert_eq!(h[0], 1.0);
        assert!(h[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn normalize_rejects_zeros_and_negatives() {
        assert!(matches!(
            normalize_harmonics(&[0.0; 60], 100.0, SAMPLE_RATE),
            Err(Error::NoAudibleHarmonics { .. })
        ));
        assert!(matches!(
            normalize_harmonics(&[1.0; 60], 9000.0, SAMPLE_RATE),
            Err(Error::NoAudibleHarmonics { .. })
        ));
        assert!(normalize_harmonics(&[-1.0, 2.0], 100.0, SAMPLE_RATE).is_err());
    }

    fn steady(frames: usize, f0: f64, a: f64, noise: f64) -> SynthParams {
        let mut h = vec![0.0; N_HARMONICS];
        h[0] = 1.0;
        let mut p = SynthParams::with_capacity(frames);
        for _ in 0..frames {
            p.push_frame(f0, a, &h, &[noise; N_NOISE_BANDS]);
        }
        p
    }

    #[test]
    fn validate_catches_bad_streams() {
        let mut p = steady(4, 400.0, 0.5, 1e-7);
        assert!(p.validate().is_ok());
        p.amplitude.pop();
        assert!(matches!(p.validate(), Err(Error::LengthMismatch { .. })));
        let mut p = steady(4, 400.0, 0.5, 1e-7);
        p.harmonic_distribution[0] = 0.5;
        assert!(p.validate().is_err());
        let mut p = steady(4, 400.0, 0.5, 1e-7);
        p.noise_magnitudes[3] = 0.0;
        assert!(p.validate().is_err());
        let mut p = steady(4, 400.0, 0.5, 1e-7);
        p.f0[2] = -1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn mixer_is_additive() {
        let p = steady(20, 300.0, 0.4, 0.01);
        let both = synthesize(&p, 3, None).unwrap();
        let h = render_harmonic(
            &p.f0,
            &p.amplitude,
            &p.harmonic_distribution,
            60,
            SAMPLE_RATE,
        )
        .unwrap();
        let n = render_noise(&p.noise_magnitudes, 65, SAMPLE_RATE, 3).unwrap();
        for i in 0..both.len() {
            assert!((both.samples[i] - h.samples[i] - n.samples[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn floor_params_are_near_silent() {
        let p = steady(50, 400.0, MAGNITUDE_FLOOR, MAGNITUDE_FLOOR);
        let out = synthesize(&p, 0, None).unwrap();
        assert_eq!(out.len(), 50 * FRAME_SIZE);
        assert!(out.peak() < 1e-4);
    }

    #[test]
    fn synthesis_is_deterministic() {
        let p = steady(30, 220.0, 0.3, 0.05);
        let a = synthesize(&p, 11, None).unwrap();
        let b = synthesize(&p, 11, None).unwrap();
        assert!(a
            .samples
            .iter()
            .zip(&b.samples)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = synthesize(&p, 12, None).unwrap();
        assert_ne!(a.samples, c.samples);
    }
}
