//! Evaluation metrics: multi-scale spectral loss, expression RMSE, Pearson
//! correlation and the control sweep harness.

use std::collections::BTreeMap;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp::{hann_periodic, real_fft};
use crate::error::{Error, Result};
use crate::features::extract_note_expression;
use crate::performance::{generate_synth_params, GenerationReport, PerformanceModelConfig};
use crate::score::{ControlId, ExpressionControls, NormalizationSpec, NoteSequence};
use crate::synth::AudioBuffer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Hann => hann_periodic(n),
            Window::Rectangular => vec![1.0; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralLossConfig {
    pub fft_sizes: Vec<usize>,
    pub window: Window,
    /// Weight of the log-magnitude term.
    pub beta: f64,
    /// Magnitudes are clamped to at least this value before the log.
    pub log_epsilon: f64,
}

impl Default for SpectralLossConfig {
    fn default() -> Self {
        SpectralLossConfig {
            fft_sizes: vec![2048, 1024, 512, 256, 128, 64],
            window: Window::Hann,
            beta: 1.0,
            log_epsilon: 1e-7,
        }
    }
}

impl SpectralLossConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fft_sizes.is_empty() {
            return Err(Error::InvalidInput(
                "at least one FFT size is required".into(),
            ));
        }
        if let Some(n) = self
            .fft_sizes
            .iter()
            .find(|n| !n.is_power_of_two() || **n < 4)
        {
            return Err(Error::InvalidInput(format!(
                "FFT sizes must be powers of two >= 4, got {n}"
            )));
        }
        if !(self.beta >= 0.0) || !(self.log_epsilon > 0.0) {
            return Err(Error::InvalidInput(
                "beta must be >= 0 and log_epsilon > 0".into(),
            ));
        }
        Ok(())
    }

    /// Hop used for an FFT size: a quarter of it.
    pub fn hop(fft_size: usize) -> usize {
        fft_size / 4
    }
}

/// Magnitude spectrogram, frames × (fft_size / 2 + 1) bins, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    pub frames: usize,
    pub bins: usize,
    pub data: Vec<f64>,
}

impl Spectrogram {
    pub fn frame(&self, i: usize) -> &[f64] {
        &self.data[i * self.bins..(i + 1) * self.bins]
    }
}

/// STFT magnitudes with frames centered on `i · hop` and zero padding at the edges.
pub fn stft_magnitude(
    audio: &[f64],
    fft_size: usize,
    hop: usize,
    window: Window,
) -> Result<Spectrogram> {
    if hop == 0 || fft_size == 0 {
        return Err(Error::InvalidInput(
            "FFT size and hop must be positive".into(),
        ));
    }
    if audio.len() < fft_size {
        return Err(Error::InvalidInput(format!(
            "audio of {} samples is shorter than one {fft_size}-sample frame",
            audio.len()
        )));
    }
    let win = window.coefficients(fft_size);
    let frames = 1 + audio.len() / hop;
    let bins = fft_size / 2 + 1;
    let half = (fft_size / 2) as isize;
    let mut planner = FftPlanner::new();
    let mut buf = vec![0.0; fft_size];
    let mut data = Vec::with_capacity(frames * bins);
    for i in 0..frames {
        let start = (i * hop) as isize - half;
        for (j, b) in buf.iter_mut().enumerate() {
            let idx = start + j as isize;
            *b = if idx >= 0 && (idx as usize) < audio.len() {
                audio[idx as usize] * win[j]
            } else {
                0.0
            };
        }
        let spec = real_fft(&mut planner, &buf, fft_size);
        data.extend(spec[..bins].iter().map(|c| c.norm()));
    }
    Ok(Spectrogram { frames, bins, data })
}

/// Total loss and its contribution per FFT size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralLoss {
    pub spectral_loss: f64,
    pub per_size: BTreeMap<usize, f64>,
}

/// Sum over FFT sizes of `mean|S - Ŝ| + β · mean|log S - log Ŝ|`.
///
/// Inputs of different length are zero-padded to the longer one.
pub fn multi_scale_spectral_loss(
    a: &AudioBuffer,
    b: &AudioBuffer,
    cfg: &SpectralLossConfig,
) -> Result<SpectralLoss> {
    cfg.validate()?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "spectral loss needs non-empty audio".into(),
        ));
    }
    if a.sample_rate != b.sample_rate {
        return Err(Error::InvalidInput(format!(
            "sample rates differ: {} vs {}",
            a.sample_rate, b.sample_rate
        )));
    }
    let len = a.len().max(b.len());
    if a.len() != b.len() {
        log::warn!(
            "zero-padding shorter input ({} vs {} samples)",
            a.len(),
            b.len()
        );
    }
    let pad = |x: &AudioBuffer| {
        let mut v = x.samples.clone();
        v.resize(len, 0.0);
        v
    };
    let (xa, xb) = (pad(a), pad(b));
    let mut per_size = BTreeMap::new();
    let mut total = 0.0;
    for &n in &cfg.fft_sizes {
        let hop = SpectralLossConfig::hop(n);
        let sa = stft_magnitude(&xa, n, hop, cfg.window)?;
        let sb = stft_magnitude(&xb, n, hop, cfg.window)?;
        let count = sa.data.len() as f64;
        let mut lin = 0.0;
        let mut log = 0.0;
        for (x, y) in sa.data.iter().zip(&sb.data) {
            lin += (x - y).abs();
            log += (x.max(cfg.log_epsilon).ln() - y.max(cfg.log_epsilon).ln()).abs();
        }
        let term = lin / count + cfg.beta * log / count;
        per_size.insert(n, term);
        total += term;
    }
    Ok(SpectralLoss {
        spectral_loss: total,
        per_size,
    })
}

/// Root mean square error over all `6 · N` control values.
pub fn expression_rmse(a: &[ExpressionControls], b: &[ExpressionControls]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            what: "expression lists",
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sq: f64 = a
        .iter()
        .zip(b)
        .flat_map(|(x, y)| {
            x.to_array()
                .into_iter()
                .zip(y.to_array())
                .map(|(p, q)| (p - q).powi(2))
        })
        .sum();
    Ok((sq / (6 * a.len()) as f64).sqrt())
}

/// Sample Pearson correlation coefficient.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            what: "correlation series",
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("need at least two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    // relative threshold so round-off on a constant series is not mistaken for variance
    let tiny = |s: f64, m: f64| s <= 1e-24 * n * (1.0 + m * m);
    if tiny(sxx, mx) || tiny(syy, my) {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Paired input/extracted series of one control sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub control: ControlId,
    pub inputs: Vec<f64>,
    /// Mean extracted value over notes, per input.
    pub extracted: Vec<f64>,
    pub reports: Vec<GenerationReport>,
}

impl SweepResult {
    pub fn correlation(&self) -> Result<f64> {
        pearson_correlation(&self.inputs, &self.extracted)
    }
}

/// Sets `control` to 0.0, 0.1, …, 1.0 on every note (others from `base_expr`),
/// generates synthesis parameters and extracts the control back.
pub fn control_sweep(
    seq: &NoteSequence,
    base_expr: &[ExpressionControls],
    control: ControlId,
    cfg: &PerformanceModelConfig,
    spec: &NormalizationSpec,
) -> Result<SweepResult> {
    if seq.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one note".into()));
    }
    let inputs: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let mut extracted = Vec::with_capacity(inputs.len());
    let mut reports = Vec::with_capacity(inputs.len());
    for &v in &inputs {
        let expr: Vec<ExpressionControls> = base_expr.iter().map(|e| e.with(control, v)).collect();
        let (params, report) = generate_synth_params(seq, &expr, cfg, spec)?;
        let mut sum = 0.0;
        for note in &seq.notes {
            sum += extract_note_expression(&params, note, spec)?.get(control);
        }
        extracted.push(sum / seq.len() as f64);
        reports.push(report);
    }
    Ok(SweepResult {
        control,
        inputs,
        extracted,
        reports,
    })
}

/// CSV with header `control,input,extracted_mean,r`; `r` is empty when undefined.
pub fn sweeps_to_csv(results: &[SweepResult]) -> String {
    let mut out = String::from("control,input,extracted_mean,r\n");
    for res in results {
        let r = res
            .correlation()
            .map(|r| format!("{r:.6}"))
            .unwrap_or_default();
        for (x, y) in res.inputs.iter().zip(&res.extracted) {
            out.push_str(&format!("{},{x:.1},{y:.6},{r}\n", res.control));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SAMPLE_RATE;
    use std::f64::consts::TAU;

    fn sine(freq: f64, amp: f64, len: usize) -> AudioBuffer {
        AudioBuffer::new(
            (0..len)
                .map(|n| amp * (TAU * freq * n as f64 / SAMPLE_RATE as f64).sin())
                .collect(),
            SAMPLE_RATE,
        )
    }

    #[test]
    fn sine_peaks_at_analytic_bin() {
        let s = sine(1000.0, 1.0, 16000);
        let spec = stft_magnitude(&s.samples, 2048, 512, Window::Hann).unwrap();
        let row = spec.frame(spec.frames / 2);
        let argmax = (0..row.len())
            .max_by(|&i, &j| row[i].total_cmp(&row[j]))
            .unwrap();
        assert_eq!(argmax, (1000.0f64 * 2048.0 / 16000.0).round() as usize);
        assert_eq!(argmax, 128);
    }

    #[test]
    fn silence_and_dc() {
        let z = stft_magnitude(&[0.0; 4096], 1024, 256, Window::Hann).unwrap();
        assert!(z.data.iter().all(|v| *v == 0.0));
        let dc = stft_magnitude(&[0.5; 4096], 1024, 256, Window::Hann).unwrap();
        // interior frame: all energy in bin 0 (periodic Hann has zero leakage for DC beyond bin 1)
        let row = dc.frame(8);
        assert!(row[0] > 100.0);
        assert!(row[2..].iter().all(|v| *v < 1e-9));
        assert!(stft_magnitude(&[0.0; 100], 1024, 256, Window::Hann).is_err());
    }

    #[test]
    fn loss_identities() {
        let cfg = SpectralLossConfig::default();
        let a = sine(440.0, 1.0, 16000);
        assert_eq!(
            multi_scale_spectral_loss(&a, &a, &cfg)
                .unwrap()
                .spectral_loss,
            0.0
        );
        let z = AudioBuffer::silence(4000);
        assert_eq!(
            multi_scale_spectral_loss(&z, &z, &cfg)
                .unwrap()
                .spectral_loss,
            0.0
        );
        let b = sine(466.16, 1.0, 16000);
        let ab = multi_scale_spectral_loss(&a, &b, &cfg).unwrap();
        let ba = multi_scale_spectral_loss(&b, &a, &cfg).unwrap();
        assert!(ab.spectral_loss > 0.0);
        assert!((ab.spectral_loss - ba.spectral_loss).abs() < 1e-12);
        assert_eq!(ab.per_size.len(), 6);
        assert!(multi_scale_spectral_loss(&AudioBuffer::silence(0), &a, &cfg).is_err());
    }

    #[test]
    fn rmse_examples() {
        let a = vec![
            ExpressionControls::splat(0.3),
            ExpressionControls::splat(0.6),
        ];
        assert_eq!(expression_rmse(&a, &a).unwrap(), 0.0);
        let b: Vec<_> = a
            .iter()
            .map(|e| ExpressionControls::from_array(e.to_array().map(|v| v + 0.1)))
            .collect();
        assert!((expression_rmse(&a, &b).unwrap() - 0.1).abs() < 1e-12);
        assert!(expression_rmse(&a, &b[..1]).is_err());

        let x = vec![
            ExpressionControls::from_array([0.1, 0.9, 0.4, 0.3, 0.7, 0.2]),
            ExpressionControls::from_array([0.5, 0.2, 0.8, 0.6, 0.1, 0.95]),
        ];
        let y = vec![
            ExpressionControls::from_array([0.2, 0.7, 0.45, 0.1, 0.75, 0.0]),
            ExpressionControls::from_array([0.55, 0.3, 0.6, 0.66, 0.3, 0.9]),
        ];
        let mut s = 0.0;
        for i in 0..2 {
            let (p, q) = (x[i].to_array(), y[i].to_array());
            for k in 0..6 {
                s += (p[k] - q[k]) * (p[k] - q[k]);
            }
        }
        assert!((expression_rmse(&x, &y).unwrap() - (s / 12.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pearson_examples() {
        let xs = [1.0, 2.0, 3.0, 4.0, 7.5];
        let lin: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson_correlation(&xs, &lin).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson_correlation(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
        let r = pearson_correlation(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        assert!(matches!(
            pearson_correlation(&xs, &[1.0; 5]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(pearson_correlation(&[1.0], &[1.0]).is_err());
    }

    proptest::proptest! {
        #[test]
        fn pearson_is_affine_invariant(
            pts in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..20),
            a in 0.1f64..10.0,
            b in -5.0f64..5.0,
        ) {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            if let Ok(r) = pearson_correlation(&xs, &ys) {
                let moved: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
                let r2 = pearson_correlation(&moved, &ys).unwrap();
                proptest::prop_assert!((r - r2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_sweeps_surface_errors() {
        let cfg = PerformanceModelConfig::default();
        let spec = NormalizationSpec::default();
        let seq = NoteSequence::from_durations(&[(40, 1), (42, 1), (43, 1)], 2).unwrap();
        let base = vec![ExpressionControls::default(); 3];
        let res = control_sweep(&seq, &base, ControlId::VolumePeakPosition, &cfg, &spec).unwrap();
        assert!(matches!(
            res.correlation(),
            Err(Error::UndefinedCorrelation(_))
        ));

        let seq = NoteSequence::from_durations(&[(40, 40), (42, 40)], 0).unwrap();
        let base = vec![ExpressionControls::default(); 2];
        let res = control_sweep(&seq, &base, ControlId::Vibrato, &cfg, &spec).unwrap();
        assert!(res.extracted.iter().all(|v| *v == 0.0));
        assert!(matches!(
            res.correlation(),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let res = SweepResult {
            control: ControlId::Volume,
            inputs: vec![0.0, 1.0],
            extracted: vec![0.0, 1.0],
            reports: vec![],
        };
        let csv = sweeps_to_csv(&[res]);
        assert_eq!(
            csv,
            "control,input,extracted_mean,r\nvolume,0.0,0.000000,1.000000\nvolume,1.0,1.000000,1.000000\n"
        );
    }
}
