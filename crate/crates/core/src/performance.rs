//! Deterministic performance model: notes plus expression controls in,
//! frame-wise synthesis parameters out.
//!
//! Every generator is shaped so that the matching extractor in
//! [`crate::features`] reads back the requested control. Targets that cannot
//! be realised (a fluctuation that would push the envelope past the amplitude
//! ceiling, vibrato on a note too short to carry it, brightness above the
//! highest audible harmonic) are clamped and listed in the [`GenerationReport`].

use std::collections::HashMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{VIBRATO_DFT_FRAMES, VIBRATO_MIN_FRAMES, VIBRATO_RATE_HZ};
use crate::score::{
    validate_sequence, ControlId, ExpressionControls, NormalizationSpec, Note, NoteSequence,
};
use crate::synth::{SynthParams, MAGNITUDE_FLOOR};
use crate::{FRAME_RATE, N_HARMONICS, N_NOISE_BANDS, SAMPLE_RATE};

/// Lowest log-amplitude the envelope may reach (the magnitude floor).
pub const ENVELOPE_FLOOR_DB: f64 = -140.0;

/// Highest log-amplitude the envelope may reach: the ceiling of `exp_sigmoid`, 20·log10(2).
pub fn envelope_ceiling_db() -> f64 {
    20.0 * 2f64.log10()
}

/// Below this standard deviation (dB) an envelope is treated as flat.
const FLAT_ENVELOPE_DB: f64 = 1e-9;
/// Centroid tolerance for the brightness solver.
const CENTROID_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeShape {
    #[default]
    AsymmetricTriangle,
    RaisedCosine,
}

/// Family of harmonic rolloffs; the rate parameter is solved per note.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rolloff {
    /// `h_k ∝ exp(-ρ k)`
    #[default]
    Exponential,
    /// `h_k ∝ k^(-ρ)`
    Power,
}

impl Rolloff {
    fn log_weight(self, rate: f64, k: usize) -> f64 {
        match self {
            Rolloff::Exponential => -rate * k as f64,
            Rolloff::Power => -rate * (k as f64).ln(),
        }
    }

    /// Bracket for the rate search; wide enough that the centroid saturates at both ends.
    fn rate_bound(self) -> f64 {
        match self {
            Rolloff::Exponential => 60.0,
            Rolloff::Power => 3000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerformanceModelConfig {
    pub vibrato_rate_hz: f64,
    /// Frames held at the attack noise level.
    pub attack_frames: usize,
    /// Frames over which attack noise decays (linearly in dB) to the floor.
    pub attack_release_frames: usize,
    pub envelope_shape: EnvelopeShape,
    pub rolloff: Rolloff,
    pub noise_floor_db: f64,
    /// Length of the pitch glide from the previous note, 0 disables it.
    pub transition_smoothing_frames: usize,
    /// Expression used for notes that carry none.
    pub default_expression: ExpressionControls,
}

impl Default for PerformanceModelConfig {
    fn default() -> Self {
        PerformanceModelConfig {
            vibrato_rate_hz: 5.5,
            attack_frames: 10,
            attack_release_frames: 10,
            envelope_shape: EnvelopeShape::AsymmetricTriangle,
            rolloff: Rolloff::Exponential,
            noise_floor_db: -120.0,
            transition_smoothing_frames: 0,
            default_expression: ExpressionControls::splat(0.5),
        }
    }
}

impl PerformanceModelConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = VIBRATO_RATE_HZ;
        if !(self.vibrato_rate_hz >= lo && self.vibrato_rate_hz <= hi) {
            return Err(Error::InvalidInput(format!(
                "vibrato_rate_hz must be within [{lo}, {hi}], got {}",
                self.vibrato_rate_hz
            )));
        }
        if self.attack_frames == 0 {
            return Err(Error::InvalidInput(
                "attack_frames must be at least 1".into(),
            ));
        }
        if !(self.noise_floor_db >= ENVELOPE_FLOOR_DB && self.noise_floor_db <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise_floor_db must be within [{ENVELOPE_FLOOR_DB}, 0], got {}",
                self.noise_floor_db
            )));
        }
        if let Some((c, v)) = self.default_expression.out_of_range() {
            return Err(Error::InvalidInput(format!(
                "default_expression.{c} out of [0,1]: {v}"
            )));
        }
        Ok(())
    }
}

/// One frame of the conditioning sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditioningRow {
    pub expression: [f64; 6],
    /// MIDI pitch, 0 on rests.
    pub pitch: f64,
    pub onset: bool,
    pub offset: bool,
    /// 0 → 1 across each note, 0 on rests.
    pub position_code: f64,
}

impl ConditioningRow {
    const REST: ConditioningRow = ConditioningRow {
        expression: [0.0; 6],
        pitch: 0.0,
        onset: false,
        offset: false,
        position_code: 0.0,
    };

    /// Flattened as `[expression.., pitch, onset, offset, position]`.
    pub fn to_vec(&self) -> [f64; 10] {
        let e = self.expression;
        [
            e[0],
            e[1],
            e[2],
            e[3],
            e[4],
            e[5],
            self.pitch,
            self.onset as u8 as f64,
            self.offset as u8 as f64,
            self.position_code,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditioningSequence {
    pub rows: Vec<ConditioningRow>,
}

impl ConditioningSequence {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn check_counts(seq: &NoteSequence, expr: &[ExpressionControls]) -> Result<()> {
    if seq.len() != expr.len() {
        return Err(Error::LengthMismatch {
            what: "expression controls per note",
            expected: seq.len(),
            got: expr.len(),
        });
    }
    Ok(())
}

/// Frame-wise conditioning: expression and pitch repeated over each note,
/// onset/offset flags on the first/last frame, and a linear position ramp.
pub fn build_conditioning(
    seq: &NoteSequence,
    expr: &[ExpressionControls],
) -> Result<ConditioningSequence> {
    check_counts(seq, expr)?;
    let mut rows = vec![ConditioningRow::REST; seq.total_frames];
    for (note, e) in seq.notes.iter().zip(expr) {
        let n = note.duration();
        for (j, t) in note.frames().enumerate() {
            rows[t] = ConditioningRow {
                expression: e.to_array(),
                pitch: note.pitch as f64,
                onset: j == 0,
                offset: j + 1 == n,
                position_code: if n > 1 {
                    j as f64 / (n - 1) as f64
                } else {
                    0.0
                },
            };
        }
    }
    Ok(ConditioningSequence { rows })
}

/// A control the generator could not realise exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clamp {
    pub note: usize,
    pub control: ControlId,
    /// Normalized value asked for.
    pub requested: f64,
    /// Normalized value the extractor will read.
    pub achieved: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GenerationReport {
    pub clamps: Vec<Clamp>,
}

impl GenerationReport {
    pub fn is_clamped(&self, note: usize, control: ControlId) -> bool {
        self.clamps
            .iter()
            .any(|c| c.note == note && c.control == control)
    }
}

/// Generator output for one note along with any clamps (note index unset).
#[derive(Debug, Clone, PartialEq)]
pub struct Generated<T> {
    pub value: T,
    pub clamps: Vec<Clamp>,
}

fn clamp_of(control: ControlId, requested: f64, achieved: f64, reason: impl Into<String>) -> Clamp {
    Clamp {
        note: 0,
        control,
        requested,
        achieved,
        reason: reason.into(),
    }
}

pub fn midi_to_hz(pitch: f64) -> f64 {
    440.0 * 2f64.powf((pitch - 69.0) / 12.0)
}

fn peak_index(position: f64, len: usize) -> usize {
    ((position * len as f64).round() as usize).min(len - 1)
}

fn envelope_shape(shape: EnvelopeShape, peak: usize, len: usize) -> Vec<f64> {
    let rise = |i: usize| -> f64 {
        let x = i as f64 / peak as f64;
        match shape {
            EnvelopeShape::AsymmetricTriangle => x,
            EnvelopeShape::RaisedCosine => 0.5 - 0.5 * (std::f64::consts::PI * x).cos(),
        }
    };
    let tail = len - 1 - peak;
    let fall = |i: usize| -> f64 {
        let x = (i - peak) as f64 / tail as f64;
        match shape {
            EnvelopeShape::AsymmetricTriangle => 1.0 - x,
            EnvelopeShape::RaisedCosine => 0.5 + 0.5 * (std::f64::consts::PI * x).cos(),
        }
    };
    (0..len)
        .map(|i| {
            if i == peak {
                1.0
            } else if i < peak {
                rise(i)
            } else {
                fall(i)
            }
        })
        .collect()
}

/// Log-amplitude envelope (dB) of a `len`-frame note.
///
/// A shape peaking at frame `round(peak_position · len)` is standardised and
/// scaled so its mean is the target volume and its population standard
/// deviation is the target fluctuation. The deviation is capped so the
/// envelope stays within [`ENVELOPE_FLOOR_DB`] and [`envelope_ceiling_db`].
pub fn generate_amplitude_envelope(
    e: &ExpressionControls,
    len: usize,
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
) -> Generated<Vec<f64>> {
    assert!(len >= 1, "note must span at least one frame");
    let mean_db = spec.denormalize(ControlId::Volume, e.volume);
    let target_sd = spec.denormalize(ControlId::VolumeFluctuation, e.volume_fluctuation);
    let peak = peak_index(e.volume_peak_position, len);
    let mut clamps = Vec::new();

    let shape = envelope_shape(cfg.envelope_shape, peak, len);
    let m = shape.iter().sum::<f64>() / len as f64;
    let sd = (shape.iter().map(|s| (s - m).powi(2)).sum::<f64>() / len as f64).sqrt();
    let z: Vec<f64> = if sd > 0.0 {
        shape.iter().map(|s| (s - m) / sd).collect()
    } else {
        vec![0.0; len]
    };
    let z_max = z.iter().cloned().fold(0.0, f64::max);
    let z_min = z.iter().cloned().fold(0.0, f64::min);
    let mut max_sd = f64::INFINITY;
    if z_max > 0.0 {
        max_sd = max_sd.min((envelope_ceiling_db() - mean_db) / z_max);
    }
    if z_min < 0.0 {
        max_sd = max_sd.min((mean_db - ENVELOPE_FLOOR_DB) / -z_min);
    }
    if sd == 0.0 {
        max_sd = 0.0;
    }
    let fluct_range = spec.range(ControlId::VolumeFluctuation);
    let mut applied_sd = target_sd;
    if target_sd > max_sd + 1e-12 {
        applied_sd = max_sd.max(0.0);
        clamps.push(clamp_of(
            ControlId::VolumeFluctuation,
            e.volume_fluctuation,
            fluct_range.normalize(applied_sd),
            format!("fluctuation capped at {applied_sd:.3} dB by the envelope range"),
        ));
    }
    // the normalized range may start above zero; the envelope cannot go below 0 dB spread
    applied_sd = applied_sd.max(0.0);

    if applied_sd <= FLAT_ENVELOPE_DB {
        if peak != 0 {
            clamps.push(clamp_of(
                ControlId::VolumePeakPosition,
                e.volume_peak_position,
                0.0,
                "a flat envelope has its peak at the first frame",
            ));
        }
        return Generated {
            value: vec![mean_db; len],
            clamps,
        };
    }
    Generated {
        value: z.iter().map(|z| mean_db + applied_sd * z).collect(),
        clamps,
    }
}

/// Extractor reading for a unit-depth vibrato template of `len` frames at
/// `rate` Hz, or `None` when its spectral peak falls outside the vibrato band.
///
/// Uses a direct DFT so it stays independent of the extractor's FFT path.
fn vibrato_gain(len: usize, rate: f64) -> Option<f64> {
    let n = VIBRATO_DFT_FRAMES.max(len);
    let template: Vec<f64> = (0..len)
        .map(|t| (TAU * rate * t as f64 / FRAME_RATE as f64).sin())
        .collect();
    let m = template.iter().sum::<f64>() / len as f64;
    let centered: Vec<f64> = template.iter().map(|x| x - m).collect();
    let cos_table: Vec<f64> = (0..n).map(|i| (TAU * i as f64 / n as f64).cos()).collect();
    let sin_table: Vec<f64> = (0..n).map(|i| (TAU * i as f64 / n as f64).sin()).collect();
    let (mut best_bin, mut best_mag) = (0, f64::NEG_INFINITY);
    for k in 1..=n / 2 {
        let (mut re, mut im) = (0.0, 0.0);
        let mut idx = 0;
        for x in &centered {
            re += x * cos_table[idx];
            im -= x * sin_table[idx];
            idx += k;
            if idx >= n {
                idx -= n;
            }
        }
        let mag = (re * re + im * im).sqrt();
        if mag > best_mag {
            best_mag = mag;
            best_bin = k;
        }
    }
    let hz = best_bin as f64 * FRAME_RATE as f64 / n as f64;
    if hz < VIBRATO_RATE_HZ.0 || hz > VIBRATO_RATE_HZ.1 || best_mag <= 0.0 {
        None
    } else {
        Some(best_mag * 2.0 / len as f64)
    }
}

#[derive(Default)]
struct VibratoCache(HashMap<(usize, u64), Option<f64>>);

impl VibratoCache {
    fn gain(&mut self, len: usize, rate: f64) -> Option<f64> {
        *self
            .0
            .entry((len, rate.to_bits()))
            .or_insert_with(|| vibrato_gain(len, rate))
    }
}

/// f0 contour (Hz) of `note`.
///
/// Notes of at least [`VIBRATO_MIN_FRAMES`] carry a sinusoidal vibrato in the
/// semitone domain at `cfg.vibrato_rate_hz`, its depth calibrated so the
/// vibrato extractor reads the target. `previous_pitch` feeds the optional
/// glide; vibrato calibration assumes no glide.
pub fn generate_f0_contour(
    e: &ExpressionControls,
    note: &Note,
    previous_pitch: Option<u8>,
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
) -> Generated<Vec<f64>> {
    generate_f0_with(
        e,
        note,
        previous_pitch,
        cfg,
        spec,
        &mut VibratoCache::default(),
    )
}

fn generate_f0_with(
    e: &ExpressionControls,
    note: &Note,
    previous_pitch: Option<u8>,
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
    cache: &mut VibratoCache,
) -> Generated<Vec<f64>> {
    let len = note.duration();
    let pitch = note.pitch as f64;
    let target = spec.denormalize(ControlId::Vibrato, e.vibrato);
    let mut clamps = Vec::new();

    let depth = if len < VIBRATO_MIN_FRAMES {
        if target > 0.0 {
            clamps.push(clamp_of(
                ControlId::Vibrato,
                e.vibrato,
                spec.normalize(ControlId::Vibrato, 0.0),
                format!("notes shorter than {VIBRATO_MIN_FRAMES} frames carry no vibrato"),
            ));
        }
        0.0
    } else {
        match cache.gain(len, cfg.vibrato_rate_hz) {
            Some(g) => target / g,
            None => {
                if target > 0.0 {
                    clamps.push(clamp_of(
                        ControlId::Vibrato,
                        e.vibrato,
                        spec.normalize(ControlId::Vibrato, 0.0),
                        "vibrato peak falls outside the detectable rate band for this length",
                    ));
                }
                target
            }
        }
    };

    let glide = match previous_pitch {
        Some(p) if cfg.transition_smoothing_frames > 0 => {
            Some((p as f64, cfg.transition_smoothing_frames))
        }
        _ => None,
    };
    let value = (0..len)
        .map(|t| {
            let base = match glide {
                Some((from, n)) if t < n => from + (pitch - from) * (t + 1) as f64 / (n + 1) as f64,
                _ => pitch,
            };
            let vib = depth * (TAU * cfg.vibrato_rate_hz * t as f64 / FRAME_RATE as f64).sin();
            midi_to_hz(base + vib)
        })
        .collect();
    Generated { value, clamps }
}

/// Highest harmonic `k` with `k · f0 <= sr / 2`, capped at the bank size.
fn audible_harmonics(f0: f64) -> usize {
    let nyquist = SAMPLE_RATE as f64 / 2.0;
    (1..=N_HARMONICS)
        .take_while(|&k| k as f64 * f0 <= nyquist)
        .count()
}

fn rolloff_distribution(rolloff: Rolloff, rate: f64, audible: usize, out: &mut [f64]) {
    let logs: Vec<f64> = (1..=audible).map(|k| rolloff.log_weight(rate, k)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut total = 0.0;
    for (v, l) in out.iter_mut().zip(&logs) {
        *v = (l - top).exp();
        total += *v;
    }
    out[..audible].iter_mut().for_each(|v| *v /= total);
}

fn centroid_of(rolloff: Rolloff, rate: f64, audible: usize) -> f64 {
    let mut h = vec![0.0; audible];
    rolloff_distribution(rolloff, rate, audible, &mut h);
    h.iter().enumerate().map(|(k, v)| (k + 1) as f64 * v).sum()
}

/// Harmonic distribution for every frame of a note, frame-major.
///
/// The rolloff rate is shared by all frames and found by bisection so the
/// note's mean harmonic centroid, after masking harmonics above Nyquist frame
/// by frame, equals the target brightness.
pub fn generate_harmonic_distribution(
    e: &ExpressionControls,
    f0_contour: &[f64],
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
) -> Result<Generated<Vec<f64>>> {
    let mut counts = [0usize; N_HARMONICS + 1];
    let mut audible = Vec::with_capacity(f0_contour.len());
    for &f in f0_contour {
        let k = audible_harmonics(f);
        if k == 0 {
            return Err(Error::NoAudibleHarmonics { f0: f });
        }
        counts[k] += 1;
        audible.push(k);
    }
    if audible.is_empty() {
        return Ok(Generated {
            value: Vec::new(),
            clamps: Vec::new(),
        });
    }
    let frames = audible.len() as f64;
    let mean_centroid = |rate: f64| -> f64 {
        counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(k, &c)| c as f64 * centroid_of(cfg.rolloff, rate, k))
            .sum::<f64>()
            / frames
    };

    let target = spec.denormalize(ControlId::Brightness, e.brightness);
    let bound = cfg.rolloff.rate_bound();
    let (lowest, highest) = (mean_centroid(bound), mean_centroid(-bound));
    let mut clamps = Vec::new();
    let rate = if target >= highest - CENTROID_TOLERANCE {
        if target > highest + CENTROID_TOLERANCE {
            clamps.push(clamp_of(
                ControlId::Brightness,
                e.brightness,
                spec.normalize(ControlId::Brightness, highest),
                format!("centroid capped at {highest:.3} by harmonics below Nyquist"),
            ));
        }
        -bound
    } else if target <= lowest + CENTROID_TOLERANCE {
        bound
    } else {
        // centroid decreases with rate
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let c = mean_centroid(mid);
            if (c - target).abs() <= CENTROID_TOLERANCE * 1e-3 {
                lo = mid;
                hi = mid;
                break;
            }
            if c > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let mut value = vec![0.0; audible.len() * N_HARMONICS];
    for (row, &k) in value.chunks_mut(N_HARMONICS).zip(&audible) {
        rolloff_distribution(cfg.rolloff, rate, k, row);
    }
    Ok(Generated { value, clamps })
}

/// Noise band magnitudes (linear) for every frame of a note, frame-major.
///
/// The first `min(attack_frames, len)` frames sit at the attack level, the next
/// `attack_release_frames` fall linearly in dB to the floor, the rest stay at
/// the floor. All bands share one level.
pub fn generate_noise_envelope(
    e: &ExpressionControls,
    len: usize,
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
) -> Vec<f64> {
    let attack_db = spec.denormalize(ControlId::AttackNoise, e.attack_noise);
    let floor = cfg.noise_floor_db;
    let hold = cfg.attack_frames.min(len);
    let release = cfg.attack_release_frames;
    let mut out = Vec::with_capacity(len * N_NOISE_BANDS);
    for t in 0..len {
        let db = if t < hold {
            attack_db
        } else if t - hold < release {
            attack_db + (floor - attack_db) * (t - hold + 1) as f64 / release as f64
        } else {
            floor
        };
        let mag = 10f64.powf(db / 20.0).max(MAGNITUDE_FLOOR);
        out.extend(std::iter::repeat_n(mag, N_NOISE_BANDS));
    }
    out
}

/// Synthesis parameters for a whole sequence.
///
/// Rest frames hold the previous note's nominal pitch (the first note's
/// before it starts) at floor amplitude, with all harmonic weight on the
/// fundamental and noise at the configured floor.
pub fn generate_synth_params(
    seq: &NoteSequence,
    expr: &[ExpressionControls],
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
) -> Result<(SynthParams, GenerationReport)> {
    let violations = validate_sequence(seq);
    if !violations.is_empty() {
        return Err(Error::InvalidSequence(violations));
    }
    check_counts(seq, expr)?;
    cfg.validate()?;
    spec.validate()?;
    if let Some((i, (c, v))) = expr
        .iter()
        .enumerate()
        .find_map(|(i, e)| e.out_of_range().map(|x| (i, x)))
    {
        return Err(Error::InvalidInput(format!(
            "expression.{c} out of [0,1] at notes[{i}]: {v}"
        )));
    }

    let mut params = SynthParams::with_capacity(seq.total_frames);
    let mut report = GenerationReport::default();
    let mut cache = VibratoCache::default();
    let rest_floor = 10f64.powf(cfg.noise_floor_db / 20.0).max(MAGNITUDE_FLOOR);
    let rest_noise = [rest_floor; N_NOISE_BANDS];
    let mut rest_h = [0.0; N_HARMONICS];
    rest_h[0] = 1.0;

    let mut held_pitch = seq.notes.first().map(|n| n.pitch).unwrap_or(69);
    let mut previous: Option<u8> = None;
    let mut cursor = 0;
    for (i, (note, e)) in seq.notes.iter().zip(expr).enumerate() {
        let rest_hz = midi_to_hz(held_pitch as f64);
        while cursor < note.onset_frame {
            params.push_frame(rest_hz, MAGNITUDE_FLOOR, &rest_h, &rest_noise);
            cursor += 1;
        }
        let len = note.duration();
        let amp = generate_amplitude_envelope(e, len, cfg, spec);
        let f0 = generate_f0_with(e, note, previous, cfg, spec, &mut cache);
        let h = generate_harmonic_distribution(e, &f0.value, cfg, spec)?;
        let noise = generate_noise_envelope(e, len, cfg, spec);
        for t in 0..len {
            params.push_frame(
                f0.value[t],
                10f64.powf(amp.value[t] / 20.0),
                &h.value[t * N_HARMONICS..(t + 1) * N_HARMONICS],
                &noise[t * N_NOISE_BANDS..(t + 1) * N_NOISE_BANDS],
            );
        }
        report.clamps.extend(
            amp.clamps
                .into_iter()
                .chain(f0.clamps)
                .chain(h.clamps)
                .map(|c| Clamp { note: i, ..c }),
        );
        cursor = note.offset_frame;
        held_pitch = note.pitch;
        previous = Some(note.pitch);
    }
    let rest_hz = midi_to_hz(held_pitch as f64);
    while cursor < seq.total_frames {
        params.push_frame(rest_hz, MAGNITUDE_FLOOR, &rest_h, &rest_noise);
        cursor += 1;
    }
    Ok((params, report))
}
