//! Per-note expression features measured from synthesis parameters, and
//! A-weighted loudness measured from audio.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp::{hann_periodic, real_fft};
use crate::error::{Error, Result};
use crate::score::{ControlId, ExpressionControls, NormalizationSpec, Note};
use crate::synth::{AudioBuffer, SynthParams, MAGNITUDE_FLOOR};
use crate::FRAME_RATE;

/// Minimum note length for vibrato analysis (200 ms).
pub const VIBRATO_MIN_FRAMES: usize = 50;
/// The f0 sequence is zero-padded to at least this many frames before the DFT.
pub const VIBRATO_DFT_FRAMES: usize = 1000;
/// Accepted vibrato rates, Hz.
pub const VIBRATO_RATE_HZ: (f64, f64) = (3.0, 9.0);
/// Frames averaged for attack noise.
pub const ATTACK_FRAMES: usize = 10;
/// Loudness readings are clamped to this level.
pub const LOUDNESS_FLOOR_DB: f64 = -120.0;
/// Analysis window for loudness.
pub const LOUDNESS_WINDOW: usize = 256;

/// Raw measurement and its normalized value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extracted {
    pub raw: f64,
    pub normalized: f64,
}

fn to_db(x: f64) -> f64 {
    20.0 * x.max(MAGNITUDE_FLOOR).log10()
}

/// Synthesis parameters of one note, with amplitude and noise in dB.
#[derive(Debug, Clone)]
pub struct NoteWindow<'a> {
    params: &'a SynthParams,
    onset: usize,
    len: usize,
    /// `20 log10 a(τ)`, floored at the magnitude floor.
    pub log_amplitude: Vec<f64>,
    /// `20 log10 η(τ)` per band, frame-major.
    pub log_noise: Vec<f64>,
}

impl<'a> NoteWindow<'a> {
    pub fn new(params: &'a SynthParams, note: &Note) -> Result<Self> {
        if note.offset_frame <= note.onset_frame || note.offset_frame > params.n_frames() {
            return Err(Error::InvalidInput(format!(
                "note frames [{}, {}) outside synthesis parameters of {} frames",
                note.onset_frame,
                note.offset_frame,
                params.n_frames()
            )));
        }
        let range = note.frames();
        let bands = params.n_noise_bands;
        Ok(NoteWindow {
            params,
            onset: note.onset_frame,
            len: note.duration(),
            log_amplitude: params.amplitude[range.clone()]
                .iter()
                .map(|&a| to_db(a))
                .collect(),
            log_noise: params.noise_magnitudes[range.start * bands..range.end * bands]
                .iter()
                .map(|&e| to_db(e))
                .collect(),
        })
    }

    /// Number of frames `T_n`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn f0(&self) -> &[f64] {
        &self.params.f0[self.onset..self.onset + self.len]
    }

    pub fn harmonics(&self, i: usize) -> &[f64] {
        self.params.harmonics(self.onset + i)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean log-amplitude over the note.
pub fn extract_volume(w: &NoteWindow, spec: &NormalizationSpec) -> Extracted {
    let raw = mean(&w.log_amplitude);
    Extracted {
        raw,
        normalized: spec.normalize(ControlId::Volume, raw),
    }
}

/// Population standard deviation of log-amplitude over the note.
pub fn extract_volume_fluctuation(w: &NoteWindow, spec: &NormalizationSpec) -> Extracted {
    let m = mean(&w.log_amplitude);
    let var = w.log_amplitude.iter().map(|x| (x - m).powi(2)).sum::<f64>() / w.len() as f64;
    let raw = var.sqrt();
    Extracted {
        raw,
        normalized: spec.normalize(ControlId::VolumeFluctuation, raw),
    }
}

/// Index of the loudest frame divided by `T_n`; the first maximum wins ties.
pub fn extract_volume_peak_position(w: &NoteWindow) -> Extracted {
    let mut best = 0;
    for (i, &v) in w.log_amplitude.iter().enumerate() {
        if v > w.log_amplitude[best] {
            best = i;
        }
    }
    let raw = best as f64 / w.len() as f64;
    Extracted {
        raw,
        normalized: raw.clamp(0.0, 1.0),
    }
}

/// Vibrato depth in semitones.
///
/// f0 is converted to MIDI semitones and mean-subtracted, zero-padded to
/// [`VIBRATO_DFT_FRAMES`] and transformed. The largest non-DC bin counts as
/// vibrato only if it lies within [`VIBRATO_RATE_HZ`]; its magnitude is scaled
/// by `2 / T_n` so a sinusoid of depth `d` semitones reads `d`. Notes shorter
/// than [`VIBRATO_MIN_FRAMES`] read zero.
pub fn extract_vibrato(
    w: &NoteWindow,
    frame_rate: f64,
    spec: &NormalizationSpec,
) -> Result<Extracted> {
    let f0 = w.f0();
    if let Some((i, f)) = f0.iter().enumerate().find(|(_, f)| !(**f > 0.0)) {
        return Err(Error::InvalidParams(format!(
            "vibrato needs positive f0, got {f} at note frame {i}"
        )));
    }
    let zero = Extracted {
        raw: 0.0,
        normalized: spec.normalize(ControlId::Vibrato, 0.0),
    };
    if w.len() < VIBRATO_MIN_FRAMES {
        return Ok(zero);
    }
    let semis: Vec<f64> = f0
        .iter()
        .map(|f| 69.0 + 12.0 * (f / 440.0).log2())
        .collect();
    let m = mean(&semis);
    let centered: Vec<f64> = semis.iter().map(|s| s - m).collect();

    let n = VIBRATO_DFT_FRAMES.max(w.len());
    let spectrum = real_fft(&mut FftPlanner::new(), &centered, n);
    let (peak_bin, peak_mag) = spectrum[1..=n / 2]
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.norm()))
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    let rate = peak_bin as f64 * frame_rate / n as f64;
    if peak_mag <= 0.0 || rate < VIBRATO_RATE_HZ.0 || rate > VIBRATO_RATE_HZ.1 {
        return Ok(zero);
    }
    let raw = peak_mag * 2.0 / w.len() as f64;
    Ok(Extracted {
        raw,
        normalized: spec.normalize(ControlId::Vibrato, raw),
    })
}

/// Mean harmonic centroid `Σ_k k · h_k` over the note (`k` from 1).
pub fn extract_brightness(w: &NoteWindow, spec: &NormalizationSpec) -> Extracted {
    let total: f64 = (0..w.len())
        .map(|i| {
            w.harmonics(i)
                .iter()
                .enumerate()
                .map(|(k, h)| (k + 1) as f64 * h)
                .sum::<f64>()
        })
        .sum();
    let raw = total / w.len() as f64;
    Extracted {
        raw,
        normalized: spec.normalize(ControlId::Brightness, raw),
    }
}

/// Noise level over the first `min(10, T_n)` frames, in dB per band.
///
/// The per-frame band sum of log magnitudes is averaged over the attack frames
/// and then divided by the band count.
pub fn extract_attack_noise(w: &NoteWindow, spec: &NormalizationSpec) -> Extracted {
    let bands = w.params.n_noise_bands;
    let frames = ATTACK_FRAMES.min(w.len());
    let band_sum: f64 = w.log_noise[..frames * bands].iter().sum();
    let raw = band_sum / frames as f64 / bands as f64;
    Extracted {
        raw,
        normalized: spec.normalize(ControlId::AttackNoise, raw),
    }
}

/// All six raw measurements of one note.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoteFeatures {
    pub volume: Extracted,
    pub volume_fluctuation: Extracted,
    pub volume_peak_position: Extracted,
    pub vibrato: Extracted,
    pub brightness: Extracted,
    pub attack_noise: Extracted,
}

impl NoteFeatures {
    pub fn normalized(&self) -> ExpressionControls {
        ExpressionControls {
            volume: self.volume.normalized,
            volume_fluctuation: self.volume_fluctuation.normalized,
            volume_peak_position: self.volume_peak_position.normalized,
            vibrato: self.vibrato.normalized,
            brightness: self.brightness.normalized,
            attack_noise: self.attack_noise.normalized,
        }
    }
}

pub fn extract_note_features(
    params: &SynthParams,
    note: &Note,
    spec: &NormalizationSpec,
) -> Result<NoteFeatures> {
    let w = NoteWindow::new(params, note)?;
    Ok(NoteFeatures {
        volume: extract_volume(&w, spec),
        volume_fluctuation: extract_volume_fluctuation(&w, spec),
        volume_peak_position: extract_volume_peak_position(&w),
        vibrato: extract_vibrato(&w, FRAME_RATE as f64, spec)?,
        brightness: extract_brightness(&w, spec),
        attack_noise: extract_attack_noise(&w, spec),
    })
}

/// The six normalized expression controls of `note`.
pub fn extract_note_expression(
    params: &SynthParams,
    note: &Note,
    spec: &NormalizationSpec,
) -> Result<ExpressionControls> {
    Ok(extract_note_features(params, note, spec)?.normalized())
}

/// A-weighting gain in dB (IEC 61672 analytic curve, 0 dB at 1 kHz).
pub fn a_weighting_db(freq: f64) -> f64 {
    if freq <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let f2 = freq * freq;
    let ra = 12194.0f64.powi(2) * f2 * f2
        / ((f2 + 20.6f64.powi(2))
            * ((f2 + 107.7f64.powi(2)) * (f2 + 737.9f64.powi(2))).sqrt()
            * (f2 + 12194.0f64.powi(2)));
    20.0 * ra.log10() + 2.0
}

/// Per-frame power in dB, optionally A-weighted.
///
/// Frames are Hann windows of [`LOUDNESS_WINDOW`] samples centered on each
/// `frame_size` block (zero-padded at the edges). Power is the window-weighted
/// mean square, so a full-scale sine reads about -3 dB unweighted.
pub fn compute_power_db(audio: &AudioBuffer, frame_size: usize, a_weighted: bool) -> Vec<f64> {
    let n = LOUDNESS_WINDOW;
    let window = hann_periodic(n);
    let norm = n as f64 * window.iter().map(|w| w * w).sum::<f64>();
    let sr = audio.sample_rate as f64;
    let weights: Vec<f64> = (0..=n / 2)
        .map(|k| {
            let g = if a_weighted {
                10f64.powf(a_weighting_db(k as f64 * sr / n as f64) / 10.0)
            } else {
                1.0
            };
            if k == 0 || k == n / 2 {
                g
            } else {
                2.0 * g
            }
        })
        .collect();
    let frames = audio.len().div_ceil(frame_size);
    let mut planner = FftPlanner::new();
    let mut buf = vec![0.0; n];
    (0..frames)
        .map(|i| {
            let center = (i * frame_size + frame_size / 2) as isize;
            for (j, b) in buf.iter_mut().enumerate() {
                let idx = center - (n / 2) as isize + j as isize;
                *b = if idx >= 0 && (idx as usize) < audio.len() {
                    audio.samples[idx as usize] * window[j]
                } else {
                    0.0
                };
            }
            let spec = real_fft(&mut planner, &buf, n);
            let power: f64 = spec[..=n / 2]
                .iter()
                .zip(&weights)
                .map(|(c, w)| c.norm_sqr() * w)
                .sum::<f64>()
                / norm;
            (10.0 * power.log10()).max(LOUDNESS_FLOOR_DB)
        })
        .collect()
}

/// A-weighted loudness per frame in dB, floored at [`LOUDNESS_FLOOR_DB`].
pub fn compute_loudness(audio: &AudioBuffer, frame_size: usize) -> Vec<f64> {
    compute_power_db(audio, frame_size, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{N_HARMONICS, N_NOISE_BANDS, SAMPLE_RATE};
    use std::f64::consts::TAU;

    fn params_with(amplitude: Vec<f64>) -> SynthParams {
        let mut h = vec![0.0; N_HARMONICS];
        h[0] = 1.0;
        let mut p = SynthParams::with_capacity(amplitude.len());
        for a in amplitude {
            p.push_frame(220.0, a, &h, &[1e-3; N_NOISE_BANDS]);
        }
        p
    }

    fn whole(p: &SynthParams) -> Note {
        Note::new(57, 0, p.n_frames())
    }

    #[test]
    fn volume_examples() {
        let spec = NormalizationSpec::default();
        let p = params_with(vec![0.1; 40]);
        let w = NoteWindow::new(&p, &whole(&p)).unwrap();
        let v = extract_volume(&w, &spec);
        assert!((v.raw + 20.0).abs() < 1e-12);
        assert!((v.normalized - 0.75).abs() < 1e-12);

        let p = params_with(vec![1.0; 10]);
        let w = NoteWindow::new(&p, &whole(&p)).unwrap();
        assert_eq!(extract_volume(&w, &spec).normalized, 1.0);

        let p = params_with(vec![0.5, 0.01, 0.2]);
        let w = NoteWindow::new(&p, &Note::new(57, 1, 2)).unwrap();
        assert!((extract_volume(&w, &spec).raw - (-40.0)).abs() < 1e-12);
    }

    #[test]
    fn fluctuation_examples() {
        let spec = NormalizationSpec::default();
        let p = params_with(vec![0.3; 20]);
        let w = NoteWindow::new(&p, &whole(&p)).unwrap();
        assert!(extract_volume_fluctuation(&w, &spec).raw.abs() < 1e-12);

        // -30 / -10 dB alternating
        let a: Vec<f64> = (0..20)
            .map(|i| {
                if i % 2 == 0 {
                    10f64.powf(-1.5)
                } else {
                    10f64.powf(-0.5)
                }
            })
            .collect();
        let p = params_with(a);
        let w = NoteWindow::new(&p, &whole(&p)).unwrap();
        // two-pass oracle
        let m = w.log_amplitude.iter().sum::<f64>() / 20.0;
        let sd = (w.log_amplitude.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 20.0).sqrt();
        let got = extract_volume_fluctuation(&w, &spec);
        assert!((got.raw - sd).abs() < 1e-12);
        assert!((got.raw - 10.0).abs() < 1e-9);
        assert!((got.normalized - 0.5).abs() < 1e-9);

        let p = params_with(vec![0.7]);
        let w = NoteWindow::new(&p, &whole(&p)).unwrap();
        assert_eq!(extract_volume_fluctuation(&w, &spec).raw, 0.0);
    }

    #[test]
    fn peak_position_examples() {
        let up = params_with((1..=50).map(|i| i as f64 / 50.0).collect());
        let w = NoteWindow::new(&up, &whole(&up)).unwrap();
        assert_eq!(extract_volume_peak_position(&w).raw, 49.0 / 50.0);

        let down = params_with((1..=50).rev().map(|i| i as f64 / 50.0).collect());
        let w = NoteWindow::new(&down, &whole(&down)).unwrap();
        assert_eq!(extract_volume_peak_position(&w).raw, 0.0);

        let flat = params_with(vec![0.4; 50]);
        let w = NoteWindow::new(&flat, &whole(&flat)).unwrap();
        assert_eq!(extract_volume_peak_position(&w).raw, 0.0);
    }

    fn vibrato_params(frames: usize, depth: f64, rate: f64, base_midi: f64) -> SynthParams {
        let mut h = vec![0.0; N_HARMONICS];
        h[0] = 1.0;
        let mut p = SynthParams::with_capacity(frames);
        for t in 0..frames {
            let semis = base_midi + depth * (TAU * rate * t as f64 / FRAME_RATE as f64).sin();
            p.push_frame(
                440.0 * 2f64.powf((semis - 69.0) / 12.0),
                0.5,
                &h,
                &[1e-3; 65],
            );
        }
        p
    }

    /// Reference DFT of the exact deviation sequence, peak searched over 3–9 Hz.
    fn reference_vibrato(dev: &[f64]) -> f64 {
        let n = 1000;
        (12..=36)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, d) in dev.iter().enumerate() {
                    let ang = TAU * (k * t) as f64 / n as f64;
                    re += d * ang.cos();
                    im -= d * ang.sin();
                }
                (re * re + im * im).sqrt() * 2.0 / dev.len() as f64
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn vibrato_recovers_depth() {
        let spec = NormalizationSpec::default();
        let p = vibrato_params(250, 0.3, 5.0, 62.0);
        let w = NoteWindow::new(&p, &whole(&p)).unwrap();
        let got = extract_vibrato(&w, 250.0, &spec).unwrap();
        let dev: Vec<f64> = (0..250)
            .map(|t| 0.3 * (TAU * 5.0 * t as f64 / 250.0).sin())
            .collect();
        let want = reference_vibrato(&dev);
        assert!((got.raw - want).abs() < 1e-9, "{} vs {}", got.raw, want);
        assert!((got.raw - 0.3).abs() <= 0.3 * 0.05);
        assert!((got.normalized - 0.3).abs() <= 0.015);
    }

    #[test]
    fn vibrato_gates() {
        let spec = NormalizationSpec::default();
        let short = vibrato_params(40, 0.5, 5.0, 62.0);
        let w = NoteWindow::new(&short, &whole(&short)).unwrap();
        assert_eq!(extract_vibrato(&w, 250.0, &spec).unwrap().raw, 0.0);

        let fast = vibrato_params(250, 0.5, 12.0, 62.0);
        let w = NoteWindow::new(&fast, &whole(&fast)).unwrap();
        assert_eq!(extract_vibrato(&w, 250.0, &spec).unwrap().raw, 0.0);

        let mut bad = vibrato_params(60, 0.5, 5.0, 62.0);
        bad.f0[3] = 0.0;
        let w = NoteWindow::new(&bad, &whole(&bad)).unwrap();
        assert!(extract_vibrato(&w, 250.0, &spec).is_err());
    }

    #[test]
    fn vibrato_ignores_transposition() {
        let spec = NormalizationSpec::default();
        let a = vibrato_params(300, 0.4, 6.0, 50.0);
        let b = vibrato_params(300, 0.4, 6.0, 57.5);
        let ra = extract_vibrato(&NoteWindow::new(&a, &whole(&a)).unwrap(), 250.0, &spec).unwrap();
        let rb = extract_vibrato(&NoteWindow::new(&b, &whole(&b)).unwrap(), 250.0, &spec).unwrap();
        assert!((ra.raw - rb.raw).abs() < 1e-9);
    }

    fn with_harmonics(h: Vec<f64>, frames: usize) -> SynthParams {
        let mut p = SynthParams::with_capacity(frames);
        for _ in 0..frames {
            p.push_frame(100.0, 0.5, &h, &[1e-3; N_NOISE_BANDS]);
        }
        p
    }

    #[test]
    fn brightness_examples() {
        let spec = NormalizationSpec::default();
        let mut h = vec![0.0; 60];
        h[0] = 1.0;
        let p = with_harmonics(h, 5);
        let b = extract_brightness(&NoteWindow::new(&p, &whole(&p)).unwrap(), &spec);
        assert_eq!((b.raw, b.normalized), (1.0, 0.0));

        let p = with_harmonics(vec![1.0 / 60.0; 60], 5);
        let b = extract_brightness(&NoteWindow::new(&p, &whole(&p)).unwrap(), &spec);
        let oracle: f64 = (1..=60).map(|k| k as f64 / 60.0).sum();
        assert!((b.raw - oracle).abs() < 1e-12);
        assert!((b.raw - 30.5).abs() < 1e-12);
        assert!((b.normalized - 0.5).abs() < 1e-12);

        let mut h = vec![0.0; 60];
        h[59] = 1.0;
        let p = with_harmonics(h, 5);
        let b = extract_brightness(&NoteWindow::new(&p, &whole(&p)).unwrap(), &spec);
        assert_eq!(b.normalized, 1.0);
    }

    fn with_noise(noise: Vec<f64>) -> SynthParams {
        let frames = noise.len();
        let mut h = vec![0.0; 60];
        h[0] = 1.0;
        let mut p = SynthParams::with_capacity(frames);
        for e in noise {
            p.push_frame(100.0, 0.5, &h, &[e; N_NOISE_BANDS]);
        }
        p
    }

    #[test]
    fn attack_noise_examples() {
        let spec = NormalizationSpec::default();
        let p = with_noise(vec![1e-3; 30]);
        let w = NoteWindow::new(&p, &whole(&p)).unwrap();
        let got = extract_attack_noise(&w, &spec);
        // oracle: direct double sum over 10 frames x 65 bands / 650
        let mut sum = 0.0;
        for i in 0..10 {
            for k in 0..65 {
                sum += 20.0 * p.noise(i)[k].log10();
            }
        }
        assert!((got.raw - sum / 650.0).abs() < 1e-9);
        assert!((got.normalized - 0.5).abs() < 1e-12);

        let p = with_noise(vec![1.0; 30]);
        let w = NoteWindow::new(&p, &whole(&p)).unwrap();
        assert_eq!(extract_attack_noise(&w, &spec).normalized, 1.0);

        // 4-frame note averages over 4 frames: 0 dB then -120 dB thrice
        let p = with_noise(vec![1.0, 1e-6, 1e-6, 1e-6, 1.0, 1.0]);
        let w = NoteWindow::new(&p, &Note::new(50, 0, 4)).unwrap();
        assert!((extract_attack_noise(&w, &spec).raw - (-90.0)).abs() < 1e-9);
    }

    #[test]
    fn floor_params_map_to_zero() {
        let spec = NormalizationSpec::default();
        let mut h = vec![0.0; 60];
        h[0] = 1.0;
        let mut p = SynthParams::with_capacity(20);
        for _ in 0..20 {
            p.push_frame(200.0, MAGNITUDE_FLOOR, &h, &[MAGNITUDE_FLOOR; 65]);
        }
        let e = extract_note_expression(&p, &Note::new(55, 0, 20), &spec).unwrap();
        assert_eq!(e.volume, 0.0);
        assert_eq!(e.attack_noise, 0.0);
        assert!(e.to_array().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn out_of_range_note_is_an_error() {
        let p = params_with(vec![0.1; 10]);
        assert!(
            extract_note_expression(&p, &Note::new(60, 5, 11), &NormalizationSpec::default())
                .is_err()
        );
    }

    #[test]
    fn extractors_ignore_frames_outside_the_note() {
        let spec = NormalizationSpec::default();
        let mut p = vibrato_params(400, 0.5, 5.5, 60.0);
        let note = Note::new(60, 100, 300);
        let before = extract_note_features(&p, &note, &spec).unwrap();
        for t in (0..100).chain(300..400) {
            p.amplitude[t] = 1.5;
            p.f0[t] = 1000.0;
            for e in &mut p.noise_magnitudes[t * 65..(t + 1) * 65] {
                *e = 0.9;
            }
        }
        assert_eq!(before, extract_note_features(&p, &note, &spec).unwrap());
    }

    fn sine(freq: f64, amp: f64, len: usize) -> AudioBuffer {
        AudioBuffer::new(
            (0..len)
                .map(|n| amp * (TAU * freq * n as f64 / SAMPLE_RATE as f64).sin())
                .collect(),
            SAMPLE_RATE,
        )
    }

    #[test]
    fn a_weighting_curve() {
        assert!(a_weighting_db(1000.0).abs() < 0.01);
        assert!((a_weighting_db(100.0) + 19.1).abs() < 0.05);
    }

    #[test]
    fn loudness_at_reference_frequency() {
        let s = sine(1000.0, 0.3, 16000);
        let a = compute_loudness(&s, 64);
        let u = compute_power_db(&s, 64, false);
        assert_eq!(a.len(), 250);
        for i in 10..240 {
            assert!((a[i] - u[i]).abs() <= 0.2);
        }
        // window-weighted mean square of a sine is amp² / 2
        assert!((u[100] - 10.0 * (0.045f64).log10()).abs() < 0.05);
    }

    #[test]
    fn loudness_at_100_hz_is_about_19_db_lower() {
        let hi = compute_loudness(&sine(1000.0, 0.3, 16000), 64);
        let lo = compute_loudness(&sine(100.0, 0.3, 16000), 64);
        let mid = |v: &[f64]| v[20..230].iter().sum::<f64>() / 210.0;
        let drop = mid(&hi) - mid(&lo);
        assert!((drop - (-a_weighting_db(100.0))).abs() < 1.5, "drop {drop}");
    }

    #[test]
    fn silence_reads_floor() {
        let l = compute_loudness(&AudioBuffer::silence(640), 64);
        assert_eq!(l, vec![LOUDNESS_FLOOR_DB; 10]);
    }

    #[test]
    fn volume_shifts_by_gain_in_db() {
        let spec = NormalizationSpec::default();
        let base: Vec<f64> = (0..60).map(|i| 0.01 + 0.002 * i as f64).collect();
        let g = 3.7;
        let p1 = params_with(base.clone());
        let p2 = params_with(base.iter().map(|a| a * g).collect());
        let v1 = extract_volume(&NoteWindow::new(&p1, &whole(&p1)).unwrap(), &spec).raw;
        let v2 = extract_volume(&NoteWindow::new(&p2, &whole(&p2)).unwrap(), &spec).raw;
        assert!((v2 - v1 - 20.0 * g.log10()).abs() < 1e-9);
        let p1p = extract_volume_peak_position(&NoteWindow::new(&p1, &whole(&p1)).unwrap());
        let p2p = extract_volume_peak_position(&NoteWindow::new(&p2, &whole(&p2)).unwrap());
        assert_eq!(p1p, p2p);
    }
}
