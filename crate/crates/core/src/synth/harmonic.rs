use std::f64::consts::TAU;

use super::upsample::{lerp_positions, upsample_controls, UpsampleMode};
use super::AudioBuffer;
use crate::error::{Error, Result};
use crate::FRAME_SIZE;

/// Unwrapped phase of the fundamental in radians, one value per output sample:
/// `2π Σ_{m≤n} f0(m) / sr` with `f0` linearly upsampled.
pub fn fundamental_phase(f0: &[f64], sample_rate: u32) -> Result<Vec<f64>> {
    if f0.is_empty() {
        return Ok(Vec::new());
    }
    let f0 = upsample_controls(f0, FRAME_SIZE, UpsampleMode::Linear)?;
    let mut acc = 0.0;
    Ok(f0
        .iter()
        .map(|f| {
            acc += f / sample_rate as f64;
            TAU * acc
        })
        .collect())
}

/// Additive oscillator bank.
///
/// `harmonics` holds `n_harmonics` weights per frame, frame-major. Output is
/// `A(n) · Σ_k H_k(n) · sin(k φ(n))` where every control is linearly upsampled
/// to the sample rate and harmonics with `k · f0(n) > sr / 2` are skipped.
pub fn render_harmonic(
    f0: &[f64],
    amplitude: &[f64],
    harmonics: &[f64],
    n_harmonics: usize,
    sample_rate: u32,
) -> Result<AudioBuffer> {
    let frames = f0.len();
    if amplitude.len() != frames {
        return Err(Error::LengthMismatch {
            what: "amplitude frames",
            expected: frames,
            got: amplitude.len(),
        });
    }
    if harmonics.len() != frames * n_harmonics {
        return Err(Error::LengthMismatch {
            what: "harmonic distribution values",
            expected: frames * n_harmonics,
            got: harmonics.len(),
        });
    }
    if let Some((i, f)) = f0.iter().enumerate().find(|(_, f)| !(**f >= 0.0)) {
        return Err(Error::InvalidParams(format!(
            "negative f0 {f} Hz at frame {i}"
        )));
    }
    if frames == 0 {
        return Ok(AudioBuffer::new(Vec::new(), sample_rate));
    }

    let sr = sample_rate as f64;
    let nyquist = sr / 2.0;
    let mut out = Vec::with_capacity(frames * FRAME_SIZE);
    let mut cycles = 0.0f64;
    for pos in lerp_positions(frames, FRAME_SIZE) {
        let f = pos.apply(f0);
        cycles += f / sr;
        cycles -= cycles.floor();
        let a = pos.apply(amplitude);

        let k_max = if f > 0.0 {
            ((nyquist / f).floor() as usize).min(n_harmonics)
        } else {
            n_harmonics
        };
        if a == 0.0 || k_max == 0 {
            out.push(0.0);
            continue;
        }

        let lo = &harmonics[pos.lo * n_harmonics..(pos.lo + 1) * n_harmonics];
        let hi = &harmonics[pos.hi * n_harmonics..(pos.hi + 1) * n_harmonics];
        let (s1, c1) = (TAU * cycles).sin_cos();
        let two_c = 2.0 * c1;
        // sin(kθ) = 2cos(θ)·sin((k-1)θ) - sin((k-2)θ)
        let (mut s_prev, mut s_cur) = (0.0, s1);
        let mut acc = 0.0;
        for k in 0..k_max {
            let w = lo[k] + (hi[k] - lo[k]) * pos.t;
            acc += w * s_cur;
            let s_next = two_c * s_cur - s_prev;
            s_prev = s_cur;
            s_cur = s_next;
        }
        out.push(a * acc);
    }
    Ok(AudioBuffer::new(out, sample_rate))
}
