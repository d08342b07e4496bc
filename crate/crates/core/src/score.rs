//! Notes, note sequences and the six per-note expression controls.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single monophonic note on the frame grid. `offset_frame` is exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Note {
    pub pitch: u8,
    pub onset_frame: usize,
    pub offset_frame: usize,
}

impl Note {
    pub fn new(pitch: u8, onset_frame: usize, offset_frame: usize) -> Self {
        Note {
            pitch,
            onset_frame,
            offset_frame,
        }
    }

    /// Frame count of the note. Zero for malformed notes.
    pub fn duration(&self) -> usize {
        self.offset_frame.saturating_sub(self.onset_frame)
    }

    pub fn frames(&self) -> std::ops::Range<usize> {
        self.onset_frame..self.offset_frame
    }
}

/// Ordered, non-overlapping notes on a grid of `total_frames` frames.
/// Frames not covered by any note are rests.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NoteSequence {
    pub notes: Vec<Note>,
    pub total_frames: usize,
}

impl NoteSequence {
    /// Builds a sequence and rejects it if [`validate_sequence`] reports anything.
    pub fn try_new(notes: Vec<Note>, total_frames: usize) -> Result<Self> {
        let seq = NoteSequence {
            notes,
            total_frames,
        };
        let violations = validate_sequence(&seq);
        if violations.is_empty() {
            Ok(seq)
        } else {
            Err(Error::InvalidSequence(violations))
        }
    }

    /// Lays notes end to end, separated by `gap` rest frames.
    pub fn from_durations(pitches_and_durations: &[(u8, usize)], gap: usize) -> Result<Self> {
        let mut notes = Vec::with_capacity(pitches_and_durations.len());
        let mut cursor = 0;
        for (i, &(pitch, dur)) in pitches_and_durations.iter().enumerate() {
            if i > 0 {
                cursor += gap;
            }
            notes.push(Note::new(pitch, cursor, cursor + dur));
            cursor += dur;
        }
        Self::try_new(notes, cursor)
    }

    pub fn len(&self) -> usize {
        self.notes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.notes.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    ZeroDuration {
        note: usize,
    },
    PitchOutOfRange {
        note: usize,
        pitch: u8,
    },
    Unsorted {
        note: usize,
    },
    Overlap {
        note: usize,
        frame: usize,
    },
    BeyondEnd {
        note: usize,
        offset: usize,
        total_frames: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroDuration { note } => write!(f, "zero duration at notes[{note}]"),
            Violation::PitchOutOfRange { note, pitch } => {
                write!(f, "pitch {pitch} out of range 0..=127 at notes[{note}]")
            }
            Violation::Unsorted { note } => {
                write!(f, "notes[{note}] starts before the previous note")
            }
            Violation::Overlap { note, frame } => {
                write!(f, "overlap at frame {frame} (notes[{note}])")
            }
            Violation::BeyondEnd {
                note,
                offset,
                total_frames,
            } => write!(
                f,
                "notes[{note}] ends at frame {offset}, past total_frames {total_frames}"
            ),
        }
    }
}

/// Lists every invariant violation in `seq`. An empty list means the sequence is valid.
pub fn validate_sequence(seq: &NoteSequence) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, note) in seq.notes.iter().enumerate() {
        if note.offset_frame <= note.onset_frame {
            out.push(Violation::ZeroDuration { note: i });
        }
        if note.pitch > 127 {
            out.push(Violation::PitchOutOfRange {
                note: i,
                pitch: note.pitch,
            });
        }
        if note.offset_frame > seq.total_frames {
            out.push(Violation::BeyondEnd {
                note: i,
                offset: note.offset_frame,
                total_frames: seq.total_frames,
            });
        }
        if i > 0 {
            let prev = &seq.notes[i - 1];
            if note.onset_frame < prev.onset_frame {
                out.push(Violation::Unsorted { note: i });
            } else if note.onset_frame < prev.offset_frame {
                out.push(Violation::Overlap {
                    note: i,
                    frame: note.onset_frame,
                });
            }
        }
    }
    out
}

/// Identifies one of the six expression controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlId {
    Volume,
    VolumeFluctuation,
    VolumePeakPosition,
    Vibrato,
    Brightness,
    AttackNoise,
}

impl ControlId {
    pub const ALL: [ControlId; 6] = [
        ControlId::Volume,
        ControlId::VolumeFluctuation,
        ControlId::VolumePeakPosition,
        ControlId::Vibrato,
        ControlId::Brightness,
        ControlId::AttackNoise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ControlId::Volume => "volume",
            ControlId::VolumeFluctuation => "volume_fluctuation",
            ControlId::VolumePeakPosition => "volume_peak_position",
            ControlId::Vibrato => "vibrato",
            ControlId::Brightness => "brightness",
            ControlId::AttackNoise => "attack_noise",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ControlId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ControlId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ControlId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownControl(s.to_string()))
    }
}

/// Six per-note scalars in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpressionControls {
    pub volume: f64,
    pub volume_fluctuation: f64,
    pub volume_peak_position: f64,
    pub vibrato: f64,
    pub brightness: f64,
    pub attack_noise: f64,
}

impl Default for ExpressionControls {
    fn default() -> Self {
        Self::splat(0.5)
    }
}

impl ExpressionControls {
    pub fn splat(v: f64) -> Self {
        Self::from_array([v; 6])
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        ExpressionControls {
            volume: a[0],
            volume_fluctuation: a[1],
            volume_peak_position: a[2],
            vibrato: a[3],
            brightness: a[4],
            attack_noise: a[5],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.volume,
            self.volume_fluctuation,
            self.volume_peak_position,
            self.vibrato,
            self.brightness,
            self.attack_noise,
        ]
    }

    pub fn get(&self, id: ControlId) -> f64 {
        self.to_array()[id.index()]
    }

    pub fn set(&mut self, id: ControlId, value: f64) {
        let mut a = self.to_array();
        a[id.index()] = value;
        *self = Self::from_array(a);
    }

    pub fn with(mut self, id: ControlId, value: f64) -> Self {
        self.set(id, value);
        self
    }

    /// The first control outside `[0, 1]` (NaN counts as outside).
    pub fn out_of_range(&self) -> Option<(ControlId, f64)> {
        ControlId::ALL
            .into_iter()
            .map(|c| (c, self.get(c)))
            .find(|&(_, v)| !(0.0..=1.0).contains(&v))
    }
}

/// Closed raw-unit interval mapped affinely onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub const fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min < self.max
    }

    pub fn normalize(&self, raw: f64) -> f64 {
        ((raw - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }

    pub fn denormalize(&self, x: f64) -> f64 {
        self.min + x.clamp(0.0, 1.0) * (self.max - self.min)
    }
}

/// Raw-unit ranges for each control. Peak position is already in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormalizationSpec {
    /// Mean log-amplitude, dB.
    pub volume_db: Range,
    /// Standard deviation of log-amplitude, dB.
    pub fluctuation_db: Range,
    /// Vibrato depth, semitones.
    pub vibrato_semitones: Range,
    /// Harmonic centroid, harmonic index.
    pub brightness_centroid: Range,
    /// Per-band noise magnitude averaged over the attack, dB.
    pub attack_db: Range,
}

impl Default for NormalizationSpec {
    fn default() -> Self {
        NormalizationSpec {
            volume_db: Range::new(-80.0, 0.0),
            fluctuation_db: Range::new(0.0, 20.0),
            vibrato_semitones: Range::new(0.0, 1.0),
            brightness_centroid: Range::new(1.0, 60.0),
            attack_db: Range::new(-120.0, 0.0),
        }
    }
}

impl NormalizationSpec {
    pub fn range(&self, id: ControlId) -> Range {
        match id {
            ControlId::Volume => self.volume_db,
            ControlId::VolumeFluctuation => self.fluctuation_db,
            ControlId::VolumePeakPosition => Range::new(0.0, 1.0),
            ControlId::Vibrato => self.vibrato_semitones,
            ControlId::Brightness => self.brightness_centroid,
            ControlId::AttackNoise => self.attack_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for id in ControlId::ALL {
            let r = self.range(id);
            if !r.is_valid() {
                return Err(Error::InvalidInput(format!(
                    "normalization range for {id} must satisfy min < max, got [{}, {}]",
                    r.min, r.max
                )));
            }
        }
        Ok(())
    }

    pub fn normalize(&self, id: ControlId, raw: f64) -> f64 {
        self.range(id).normalize(raw)
    }

    pub fn denormalize(&self, id: ControlId, x: f64) -> f64 {
        self.range(id).denormalize(x)
    }
}

/// Maps a raw extractor value onto `[0, 1]`, looking the control up by name.
pub fn normalize_control(raw: f64, control_id: &str, spec: &NormalizationSpec) -> Result<f64> {
    let id: ControlId = control_id.parse()?;
    Ok(spec.normalize(id, raw))
}

/// Inverse of [`normalize_control`] on `[0, 1]`.
pub fn denormalize_control(x: f64, control_id: &str, spec: &NormalizationSpec) -> Result<f64> {
    let id: ControlId = control_id.parse()?;
    Ok(spec.denormalize(id, x))
}
