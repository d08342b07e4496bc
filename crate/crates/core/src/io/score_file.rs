//! JSON score documents.
//!
//! ```json
//! { "frame_rate": 250, "total_frames": 250,
//!   "notes": [ { "pitch": 60, "onset": 0, "offset": 250,
//!                "expression": { "volume": 0.8 } } ] }
//! ```
//!
//! Expression blocks are optional and may be partial; missing controls take
//! the performance-model default. Pitch 0 marks an explicit rest and is
//! dropped after parsing. Error messages name the offending field path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::{
    validate_sequence, ControlId, ExpressionControls, Note, NoteSequence, Violation,
};
use crate::FRAME_RATE;

/// Expression block as written in a score: every control optional.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpressionBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_fluctuation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_peak_position: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vibrato: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brightness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack_noise: Option<f64>,
}

impl ExpressionBlock {
    fn to_array(self) -> [Option<f64>; 6] {
        [
            self.volume,
            self.volume_fluctuation,
            self.volume_peak_position,
            self.vibrato,
            self.brightness,
            self.attack_noise,
        ]
    }

    /// Fills missing controls from `default`.
    pub fn resolve(&self, default: &ExpressionControls) -> ExpressionControls {
        let d = default.to_array();
        let mut out = [0.0; 6];
        for (i, v) in self.to_array().into_iter().enumerate() {
            out[i] = v.unwrap_or(d[i]);
        }
        ExpressionControls::from_array(out)
    }
}

impl From<ExpressionControls> for ExpressionBlock {
    fn from(e: ExpressionControls) -> Self {
        ExpressionBlock {
            volume: Some(e.volume),
            volume_fluctuation: Some(e.volume_fluctuation),
            volume_peak_position: Some(e.volume_peak_position),
            vibrato: Some(e.vibrato),
            brightness: Some(e.brightness),
            attack_noise: Some(e.attack_noise),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoteEntry {
    pub pitch: u8,
    pub onset: usize,
    pub offset: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<ExpressionBlock>,
}

/// The serialized score document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreDocument {
    pub frame_rate: u32,
    pub total_frames: usize,
    pub notes: Vec<NoteEntry>,
}

/// A parsed and validated score.
#[derive(Debug, Clone, PartialEq)]
pub struct Score {
    pub sequence: NoteSequence,
    /// One entry per note in `sequence` (rests removed).
    pub expression: Vec<Option<ExpressionBlock>>,
}

impl Score {
    /// Per-note controls with missing values taken from `default`.
    pub fn resolved_expression(&self, default: &ExpressionControls) -> Vec<ExpressionControls> {
        self.expression
            .iter()
            .map(|b| b.unwrap_or_default().resolve(default))
            .collect()
    }

    pub fn to_document(&self) -> ScoreDocument {
        ScoreDocument {
            frame_rate: FRAME_RATE,
            total_frames: self.sequence.total_frames,
            notes: self
                .sequence
                .notes
                .iter()
                .zip(&self.expression)
                .map(|(n, e)| NoteEntry {
                    pitch: n.pitch,
                    onset: n.onset_frame,
                    offset: n.offset_frame,
                    expression: *e,
                })
                .collect(),
        }
    }
}

fn remap(v: Violation, index: &[usize]) -> Violation {
    let m = |i: usize| index.get(i).copied().unwrap_or(i);
    match v {
        Violation::ZeroDuration { note } => Violation::ZeroDuration { note: m(note) },
        Violation::PitchOutOfRange { note, pitch } => Violation::PitchOutOfRange {
            note: m(note),
            pitch,
        },
        Violation::Unsorted { note } => Violation::Unsorted { note: m(note) },
        Violation::Overlap { note, frame } => Violation::Overlap {
            note: m(note),
            frame,
        },
        Violation::BeyondEnd {
            note,
            offset,
            total_frames,
        } => Violation::BeyondEnd {
            note: m(note),
            offset,
            total_frames,
        },
    }
}

/// Checks a deserialized document and converts it to a [`Score`].
pub fn score_from_document(doc: ScoreDocument) -> Result<Score> {
    if doc.frame_rate != FRAME_RATE {
        return Err(Error::Format(format!(
            "frame_rate: expected {FRAME_RATE}, got {}",
            doc.frame_rate
        )));
    }
    let mut notes = Vec::with_capacity(doc.notes.len());
    let mut expression = Vec::with_capacity(doc.notes.len());
    let mut index = Vec::with_capacity(doc.notes.len());
    for (i, entry) in doc.notes.into_iter().enumerate() {
        if let Some(block) = &entry.expression {
            for (c, v) in ControlId::ALL.into_iter().zip(block.to_array()) {
                if let Some(v) = v {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::Format(format!(
                            "expression.{c} out of [0,1] at notes[{i}]: {v}"
                        )));
                    }
                }
            }
        }
        if entry.pitch == 0 {
            if entry.expression.is_some() {
                return Err(Error::Format(format!(
                    "notes[{i}]: rest (pitch 0) cannot carry expression"
                )));
            }
            continue;
        }
        notes.push(Note::new(entry.pitch, entry.onset, entry.offset));
        expression.push(entry.expression);
        index.push(i);
    }
    let sequence = NoteSequence {
        notes,
        total_frames: doc.total_frames,
    };
    let violations = validate_sequence(&sequence);
    if !violations.is_empty() {
        return Err(Error::InvalidSequence(
            violations.into_iter().map(|v| remap(v, &index)).collect(),
        ));
    }
    Ok(Score {
        sequence,
        expression,
    })
}

/// Deserializes `T` from JSON, prefixing errors with the failing field path.
pub fn from_json_with_path<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path.is_empty() || path == "." {
            Error::Format(inner.to_string())
        } else {
            Error::Format(format!("{path}: {inner}"))
        }
    })?;
    de.end().map_err(|e| Error::Format(e.to_string()))?;
    Ok(value)
}

/// Parses and validates a score document.
pub fn parse_score(text: &str) -> Result<Score> {
    score_from_document(from_json_with_path(text)?)
}

/// Serializes a score with fully specified expression for every note.
pub fn write_score(seq: &NoteSequence, expression: &[ExpressionControls]) -> String {
    let score = Score {
        sequence: seq.clone(),
        expression: expression.iter().map(|e| Some((*e).into())).collect(),
    };
    serde_json::to_string_pretty(&score.to_document()).expect("score serializes")
}
