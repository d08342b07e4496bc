use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpsampleMode {
    /// Linear between frame centers, endpoints held.
    #[default]
    Linear,
    /// Each frame value repeated `factor` times.
    Hold,
}

/// Position of one output sample between two input frames.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Lerp {
    pub lo: usize,
    pub hi: usize,
    pub t: f64,
}

impl Lerp {
    #[inline]
    pub fn apply(&self, v: &[f64]) -> f64 {
        v[self.lo] + (v[self.hi] - v[self.lo]) * self.t
    }
}

/// Interpolation positions for `frames * factor` samples, frame `i` centered on
/// sample `i * factor + factor / 2`.
pub(crate) fn lerp_positions(frames: usize, factor: usize) -> impl Iterator<Item = Lerp> {
    let half = factor as f64 / 2.0;
    let last = frames.saturating_sub(1);
    (0..frames * factor).map(move |n| {
        let u = (n as f64 - half) / factor as f64;
        if u <= 0.0 {
            Lerp {
                lo: 0,
                hi: 0,
                t: 0.0,
            }
        } else if u >= last as f64 {
            Lerp {
                lo: last,
                hi: last,
                t: 0.0,
            }
        } else {
            let lo = u.floor() as usize;
            Lerp {
                lo,
                hi: lo + 1,
                t: u - lo as f64,
            }
        }
    })
}

/// Expands a per-frame control stream to one value per sample.
pub fn upsample_controls(frames: &[f64], factor: usize, mode: UpsampleMode) -> Result<Vec<f64>> {
    if frames.is_empty() {
        return Err(Error::InvalidInput(
            "cannot upsample an empty stream".into(),
        ));
    }
    if factor == 0 {
        return Err(Error::InvalidInput(
            "upsampling factor must be at least 1".into(),
        ));
    }
    Ok(match mode {
        UpsampleMode::Hold => frames
            .iter()
            .flat_map(|&v| std::iter::repeat_n(v, factor))
            .collect(),
        UpsampleMode::Linear => lerp_positions(frames.len(), factor)
            .map(|l| l.apply(frames))
            .collect(),
    })
}
