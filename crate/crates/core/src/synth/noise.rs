use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AudioBuffer;
use crate::dsp::hann_symmetric;
use crate::error::{Error, Result};
use crate::FRAME_SIZE;

/// Length of the per-frame zero-phase noise filter.
pub const NOISE_FILTER_TAPS: usize = 2 * FRAME_SIZE + 1;

/// Zero-phase FIR for one frame of band magnitudes.
///
/// `bands` are magnitudes on `bands.len()` linearly spaced frequencies from DC
/// to Nyquist. The impulse response is the inverse real DFT of that response
/// (size `2 · (bands - 1)`), centered, extended to [`NOISE_FILTER_TAPS`] taps and
/// Hann-windowed. Tap `NOISE_FILTER_TAPS / 2` is time zero.
pub fn noise_filter_taps(bands: &[f64]) -> Vec<f64> {
    let n_bins = bands.len();
    let n_fft = 2 * (n_bins - 1);
    let half = (NOISE_FILTER_TAPS / 2) as isize;
    let window = hann_symmetric(NOISE_FILTER_TAPS);
    (-half..=half)
        .zip(&window)
        .map(|(n, w)| {
            let mut acc = bands[0] + bands[n_bins - 1] * (PI * n as f64).cos();
            for (k, &m) in bands.iter().enumerate().take(n_bins - 1).skip(1) {
                acc += 2.0 * m * (2.0 * PI * (k as isize * n) as f64 / n_fft as f64).cos();
            }
            acc / n_fft as f64 * w
        })
        .collect()
}

/// Crossfade weight of frame `frame` at sample `n`.
///
/// Frames are centered on `i · FRAME_SIZE + FRAME_SIZE / 2`; adjacent frames
/// crossfade with complementary squared-cosine ramps so the weights of all
/// frames sum to one at every sample. Each weight spans two frames (50% overlap).
fn crossfade_weight(frame: usize, frames: usize, n: usize) -> f64 {
    let center = |i: usize| (i * FRAME_SIZE + FRAME_SIZE / 2) as f64;
    let x = n as f64;
    let c = center(frame);
    if x < c {
        if frame == 0 {
            return 1.0;
        }
        let t = (x - center(frame - 1)) / FRAME_SIZE as f64;
        if t <= 0.0 {
            0.0
        } else {
            (0.5 * PI * t).sin().powi(2)
        }
    } else {
        if frame + 1 == frames {
            return 1.0;
        }
        let t = (x - c) / FRAME_SIZE as f64;
        if t >= 1.0 {
            0.0
        } else {
            (0.5 * PI * t).cos().powi(2)
        }
    }
}

/// Filtered-noise synthesizer.
///
/// Uniform noise in `[-1, 1]` from a seeded ChaCha generator is split into
/// overlapping crossfaded segments, each convolved with its frame's zero-phase
/// filter and overlap-added. Output length is `frames · FRAME_SIZE`.
pub fn render_noise(
    noise_magnitudes: &[f64],
    n_bands: usize,
    sample_rate: u32,
    seed: u64,
) -> Result<AudioBuffer> {
    if n_bands < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least 2 noise bands, got {n_bands}"
        )));
    }
    if !noise_magnitudes.len().is_multiple_of(n_bands) {
        return Err(Error::LengthMismatch {
            what: "noise magnitude values (multiple of band count)",
            expected: noise_magnitudes.len() / n_bands * n_bands,
            got: noise_magnitudes.len(),
        });
    }
    if let Some((i, v)) = noise_magnitudes
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v > 0.0))
    {
        return Err(Error::InvalidParams(format!(
            "non-positive noise magnitude {v} at frame {}, band {}",
            i / n_bands,
            i % n_bands
        )));
    }
    let frames = noise_magnitudes.len() / n_bands;
    let len = frames * FRAME_SIZE;
    if frames == 0 {
        return Ok(AudioBuffer::new(Vec::new(), sample_rate));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();

    let half = NOISE_FILTER_TAPS / 2;
    let mut out = vec![0.0; len];
    let mut segment = Vec::with_capacity(3 * FRAME_SIZE);
    for frame in 0..frames {
        let taps = noise_filter_taps(&noise_magnitudes[frame * n_bands..(frame + 1) * n_bands]);
        let start = if frame == 0 {
            0
        } else {
            (frame - 1) * FRAME_SIZE + FRAME_SIZE / 2
        };
        let end = if frame + 1 == frames {
            len
        } else {
            (frame + 1) * FRAME_SIZE + FRAME_SIZE / 2
        };
        segment.clear();
        segment.extend((start..end).map(|n| source[n] * crossfade_weight(frame, frames, n)));

        for (j, &x) in segment.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let n = start + j;
            // y[n + m - half] += taps[m] · x[n]
            let m_lo = half.saturating_sub(n);
            let m_hi = (len + half - n).min(NOISE_FILTER_TAPS);
            for m in m_lo..m_hi {
                out[n + m - half] += taps[m] * x;
            }
        }
    }
    Ok(AudioBuffer::new(out, sample_rate))
}
