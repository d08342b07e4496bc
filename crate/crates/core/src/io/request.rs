//! Render requests and the operations shared by the CLI, the HTTP service and
//! the C interface. Every front end goes through these functions so the same
//! request produces the same bytes everywhere.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::score_file::{from_json_with_path, score_from_document, Score, ScoreDocument};
use super::wav::{write_wav, SampleFormat};
use crate::error::{Error, Result};
use crate::features::{extract_note_features, NoteFeatures};
use crate::metrics::{control_sweep, SweepResult};
use crate::performance::{generate_synth_params, Clamp, GenerationReport, PerformanceModelConfig};
use crate::score::{ControlId, NormalizationSpec};
use crate::synth::{synthesize, AudioBuffer, ReverbConfig, SynthParams, IR_LENGTH};

/// Everything needed to render a score reproducibly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderRequest {
    pub score: ScoreDocument,
    #[serde(default)]
    pub noise_seed: u64,
    /// `"none"` or a path to a raw impulse response file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverb: Option<String>,
    #[serde(default)]
    pub config: PerformanceModelConfig,
    #[serde(default)]
    pub normalization: NormalizationSpec,
    /// Emit 32-bit float samples instead of 16-bit PCM.
    #[serde(default)]
    pub float32: bool,
}

impl RenderRequest {
    pub fn from_score(score: ScoreDocument) -> Self {
        RenderRequest {
            score,
            noise_seed: 0,
            reverb: None,
            config: PerformanceModelConfig::default(),
            normalization: NormalizationSpec::default(),
            float32: false,
        }
    }

    /// Accepts either a full request or a bare score document.
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if value.get("score").is_some() {
            from_json_with_path(text)
        } else {
            Ok(Self::from_score(from_json_with_path(text)?))
        }
    }

    /// The impulse response path, if the request names one.
    pub fn reverb_path(&self) -> Option<&Path> {
        match self.reverb.as_deref() {
            None | Some("none") | Some("") => None,
            Some(p) => Some(Path::new(p)),
        }
    }

    pub fn sample_format(&self) -> SampleFormat {
        if self.float32 {
            SampleFormat::Float32
        } else {
            SampleFormat::Pcm16
        }
    }

    /// Parses the embedded score and checks the overrides.
    pub fn prepare(&self) -> Result<Score> {
        self.config.validate()?;
        self.normalization.validate()?;
        score_from_document(self.score.clone())
    }

    /// Renders with an already loaded impulse response (required iff
    /// [`reverb_path`](Self::reverb_path) is set, unless `ir` comes from elsewhere).
    pub fn render(&self, ir: Option<Vec<f64>>) -> Result<Render> {
        let score = self.prepare()?;
        let reverb = ir.map(ReverbConfig::new);
        render_score(
            &score,
            &self.config,
            &self.normalization,
            self.noise_seed,
            reverb.as_ref(),
        )
    }

    /// Renders, loading the impulse response from the filesystem when named.
    pub fn render_local(&self) -> Result<Render> {
        let ir = match self.reverb_path() {
            Some(p) => Some(load_impulse_response(&std::fs::read(p).map_err(|e| {
                Error::InvalidInput(format!("reverb: cannot read {}: {e}", p.display()))
            })?)?),
            None => None,
        };
        self.render(ir)
    }

    /// Only the parts that determine synthesis parameters.
    pub fn params_request(&self) -> ParamsRequest {
        ParamsRequest {
            score: self.score.clone(),
            config: self.config.clone(),
            normalization: self.normalization,
        }
    }
}

/// Request for synthesis parameters alone (reverb and seed do not affect them).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsRequest {
    pub score: ScoreDocument,
    #[serde(default)]
    pub config: PerformanceModelConfig,
    #[serde(default)]
    pub normalization: NormalizationSpec,
}

impl ParamsRequest {
    pub fn generate(&self) -> Result<(SynthParams, GenerationReport)> {
        self.config.validate()?;
        self.normalization.validate()?;
        let score = score_from_document(self.score.clone())?;
        let expr = score.resolved_expression(&self.config.default_expression);
        generate_synth_params(&score.sequence, &expr, &self.config, &self.normalization)
    }
}

/// Output of a render.
#[derive(Debug, Clone)]
pub struct Render {
    pub params: SynthParams,
    pub report: GenerationReport,
    pub audio: AudioBuffer,
}

impl Render {
    pub fn wav(&self, format: SampleFormat) -> Vec<u8> {
        write_wav(&self.audio, format)
    }
}

pub fn render_score(
    score: &Score,
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
    noise_seed: u64,
    reverb: Option<&ReverbConfig>,
) -> Result<Render> {
    let expr = score.resolved_expression(&cfg.default_expression);
    let (params, report) = generate_synth_params(&score.sequence, &expr, cfg, spec)?;
    let audio = synthesize(&params, noise_seed, reverb)?;
    Ok(Render {
        params,
        report,
        audio,
    })
}

/// Decodes a raw impulse response: 48000 little-endian f32 samples.
pub fn load_impulse_response(bytes: &[u8]) -> Result<Vec<f64>> {
    if bytes.len() != IR_LENGTH * 4 {
        return Err(Error::ImpulseResponseLength {
            expected: IR_LENGTH,
            got: bytes.len() / 4,
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect())
}

/// Per-note raw and normalized measurements for every note of `score`.
pub fn extract_features(
    params: &SynthParams,
    score: &Score,
    spec: &NormalizationSpec,
) -> Result<Vec<NoteFeatures>> {
    params.validate()?;
    score
        .sequence
        .notes
        .iter()
        .map(|n| extract_note_features(params, n, spec))
        .collect()
}

/// The score with every note's expression replaced by the extracted values.
pub fn extract_document(
    params: &SynthParams,
    score: &Score,
    spec: &NormalizationSpec,
) -> Result<ScoreDocument> {
    let features = extract_features(params, score, spec)?;
    let extracted = Score {
        sequence: score.sequence.clone(),
        expression: features
            .iter()
            .map(|f| Some(f.normalized().into()))
            .collect(),
    };
    Ok(extracted.to_document())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlError {
    pub mean_error: f64,
    pub max_error: f64,
    /// Notes compared (clamped notes are excluded).
    pub evaluated: usize,
}

/// Recovery error of extract(generate(score)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub notes: usize,
    pub controls: BTreeMap<String, ControlError>,
    pub max_error: f64,
    pub clamps: Vec<Clamp>,
}

pub fn roundtrip(
    score: &Score,
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
) -> Result<RoundtripReport> {
    let expr = score.resolved_expression(&cfg.default_expression);
    let (params, report) = generate_synth_params(&score.sequence, &expr, cfg, spec)?;
    let features = extract_features(&params, score, spec)?;
    let mut controls = BTreeMap::new();
    let mut max_error: f64 = 0.0;
    for c in ControlId::ALL {
        let errors: Vec<f64> = expr
            .iter()
            .zip(&features)
            .enumerate()
            .filter(|(i, _)| !report.is_clamped(*i, c))
            .map(|(_, (want, got))| (got.normalized().get(c) - want.get(c)).abs())
            .collect();
        let max = errors.iter().fold(0.0f64, |m, e| m.max(*e));
        let mean = if errors.is_empty() {
            0.0
        } else {
            errors.iter().sum::<f64>() / errors.len() as f64
        };
        max_error = max_error.max(max);
        controls.insert(
            c.as_str().to_string(),
            ControlError {
                mean_error: mean,
                max_error: max,
                evaluated: errors.len(),
            },
        );
    }
    Ok(RoundtripReport {
        notes: score.sequence.len(),
        controls,
        max_error,
        clamps: report.clamps,
    })
}

/// Sweeps all six controls over the score.
pub fn sweep_all(
    score: &Score,
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
) -> Result<Vec<SweepResult>> {
    let expr = score.resolved_expression(&cfg.default_expression);
    ControlId::ALL
        .into_iter()
        .map(|c| control_sweep(&score.sequence, &expr, c, cfg, spec))
        .collect()
}
