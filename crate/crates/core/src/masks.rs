//! Spectrographic reliability masks.
//!
//! A mask labels each time–frequency cell of a spectrogram with its
//! reliability: 1 means the cell is dominated by speech, 0 means it is
//! dominated by noise. Continuous values in `[0, 1]` are accepted everywhere
//! a mask is consumed and act as soft weights downstream; binary masks are
//! the default and the thoroughly tested mode.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::spectrogram::Spectrogram;

/// Per-cell reliability weights in `[0, 1]`, same shape as the spectrogram
/// they describe. Flattening follows the frame-contiguous spectrogram order.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    values: Array2<f64>,
}

impl Mask {
    pub fn from_array(values: Array2<f64>) -> Result<Self> {
        let (bands, frames) = values.dim();
        if bands == 0 || frames == 0 {
            return Err(Error::InvalidConfig(format!(
                "mask must be non-empty, got {bands}x{frames}"
            )));
        }
        for &v in values.iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite("mask"));
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "mask entry {v} outside [0, 1]"
                )));
            }
        }
        Ok(Self { values })
    }

    /// All-ones (fully reliable) mask of the given shape.
    pub fn ones(bands: usize, frames: usize) -> Self {
        Self {
            values: Array2::from_elem((bands, frames), 1.0),
        }
    }

    /// All-zeros (fully unreliable) mask of the given shape.
    pub fn zeros(bands: usize, frames: usize) -> Self {
        Self {
            values: Array2::zeros((bands, frames)),
        }
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn bands(&self) -> usize {
        self.values.nrows()
    }

    pub fn frames(&self) -> usize {
        self.values.ncols()
    }

    /// True when every entry is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Number of cells counted reliable (value ≥ 0.5).
    pub fn reliable_count(&self) -> usize {
        self.values.iter().filter(|&&v| v >= 0.5).count()
    }

    /// Frame-contiguous flat weights (the diagonal of the row selector).
    pub fn flatten(&self) -> Vec<f64> {
        let (bands, frames) = self.values.dim();
        let mut flat = vec![0.0; bands * frames];
        for t in 0..frames {
            for k in 0..bands {
                flat[t * bands + k] = self.values[(k, t)];
            }
        }
        flat
    }

    pub fn matches_shape(&self, spec: &Spectrogram, context: &'static str) -> Result<()> {
        if self.values.dim() != spec.values().dim() {
            return Err(Error::ShapeMismatch {
                left: format!("{:?}", self.values.dim()),
                right: format!("{:?}", spec.values().dim()),
                context,
            });
        }
        Ok(())
    }

    fn same_shape(&self, other: &Mask, context: &'static str) -> Result<()> {
        if self.values.dim() != other.values.dim() {
            return Err(Error::ShapeMismatch {
                left: format!("{:?}", self.values.dim()),
                right: format!("{:?}", other.values.dim()),
                context,
            });
        }
        Ok(())
    }

    fn require_binary(&self) -> Result<()> {
        match self.values.iter().find(|&&v| v != 0.0 && v != 1.0) {
            Some(&v) => Err(Error::NonBinaryMask(v)),
            None => Ok(()),
        }
    }
}

/// Reliability statistics of an estimated mask against the oracle mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskStats {
    /// Percentage of cells the estimated mask labels reliable (value ≥ 0.5).
    pub reliable_pct: f64,
    /// Percentage of cells labeled reliable by the estimate but unreliable
    /// by the oracle.
    pub false_reliable_pct: f64,
}

/// Oracle mask: a cell is reliable iff clean speech strictly exceeds noise
/// there. Ties are labeled unreliable.
pub fn oracle_mask(speech: &Spectrogram, noise: &Spectrogram) -> Result<Mask> {
    speech.same_shape(noise, "oracle_mask")?;
    let values = ndarray::Zip::from(speech.values())
        .and(noise.values())
        .map_collect(|&s, &n| if s > n { 1.0 } else { 0.0 });
    Ok(Mask { values })
}

/// Estimated mask stand-in: a cell is reliable iff the observed log energy
/// exceeds the noise estimate by more than the threshold.
///
/// The margin is `snr_threshold_db · ln(10) / 10`, the natural-log equivalent
/// of the dB threshold.
pub fn threshold_mask(
    noisy: &Spectrogram,
    noise_estimate: &Spectrogram,
    snr_threshold_db: f64,
) -> Result<Mask> {
    noisy.same_shape(noise_estimate, "threshold_mask")?;
    let margin = snr_threshold_db * std::f64::consts::LN_10 / 10.0;
    let values = ndarray::Zip::from(noisy.values())
        .and(noise_estimate.values())
        .map_collect(|&y, &n| if y - n > margin { 1.0 } else { 0.0 });
    Ok(Mask { values })
}

/// Drop false reliables: keep a cell reliable only where both the estimated
/// and the oracle mask agree. Both masks must be binary.
pub fn remove_false_reliables(estimated: &Mask, oracle: &Mask) -> Result<Mask> {
    estimated.same_shape(oracle, "remove_false_reliables")?;
    estimated.require_binary()?;
    oracle.require_binary()?;
    let values = ndarray::Zip::from(estimated.values())
        .and(oracle.values())
        .map_collect(|&e, &o| e.min(o));
    Ok(Mask { values })
}

/// Reliable percentage of the estimated mask and percentage of false
/// reliables relative to the oracle, over all cells.
pub fn mask_stats(estimated: &Mask, oracle: &Mask) -> Result<MaskStats> {
    estimated.same_shape(oracle, "mask_stats")?;
    let total = (estimated.bands() * estimated.frames()) as f64;
    let mut reliable = 0usize;
    let mut false_reliable = 0usize;
    for (&e, &o) in estimated.values().iter().zip(oracle.values().iter()) {
        if e >= 0.5 {
            reliable += 1;
            if o < 0.5 {
                false_reliable += 1;
            }
        }
    }
    Ok(MaskStats {
        reliable_pct: 100.0 * reliable as f64 / total,
        false_reliable_pct: 100.0 * false_reliable as f64 / total,
    })
}
