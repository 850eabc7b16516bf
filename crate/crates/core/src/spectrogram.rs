use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// A mel log-power spectrogram: a `bands × frames` matrix of natural-log
/// band energies.
///
/// The flattened form concatenates frames, so element `t·K + k` of the flat
/// vector is cell `(k, t)` of the matrix. All fragment and window arithmetic
/// in this crate relies on that frame-contiguous layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    values: Array2<f64>,
}

impl Spectrogram {
    /// Wrap a `bands × frames` matrix, validating shape and finiteness.
    pub fn from_array(values: Array2<f64>) -> Result<Self> {
        let (bands, frames) = values.dim();
        if bands == 0 || frames == 0 {
            return Err(Error::InvalidConfig(format!(
                "spectrogram must be non-empty, got {bands}x{frames}"
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("spectrogram"));
        }
        Ok(Self { values })
    }

    /// Rebuild from the frame-contiguous flat vector.
    pub fn from_flat(bands: usize, frames: usize, flat: &[f64]) -> Result<Self> {
        if flat.len() != bands * frames {
            return Err(Error::InvalidConfig(format!(
                "flat length {} does not match {bands}x{frames}",
                flat.len()
            )));
        }
        let mut values = Array2::zeros((bands, frames));
        for t in 0..frames {
            for k in 0..bands {
                values[(k, t)] = flat[t * bands + k];
            }
        }
        Self::from_array(values)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Number of frequency bands (rows).
    pub fn bands(&self) -> usize {
        self.values.nrows()
    }

    /// Number of time frames (columns).
    pub fn frames(&self) -> usize {
        self.values.ncols()
    }

    /// Flattened length `bands · frames`.
    pub fn flat_len(&self) -> usize {
        self.bands() * self.frames()
    }

    /// Concatenate frames into a single vector (frame-contiguous order).
    pub fn flatten(&self) -> Array1<f64> {
        let (bands, frames) = self.values.dim();
        let mut flat = Array1::zeros(bands * frames);
        for t in 0..frames {
            for k in 0..bands {
                flat[t * bands + k] = self.values[(k, t)];
            }
        }
        flat
    }

    /// Add a constant to every cell (a gain in the log domain).
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            values: &self.values + offset,
        }
    }

    pub(crate) fn same_shape(&self, other: &Spectrogram, context: &'static str) -> Result<()> {
        if self.values.dim() != other.values.dim() {
            return Err(Error::ShapeMismatch {
                left: format!("{:?}", self.values.dim()),
                right: format!("{:?}", other.values.dim()),
                context,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn flatten_is_frame_contiguous() {
        let s = Spectrogram::from_array(array![[1.0, 3.0], [2.0, 4.0]]).unwrap();
        assert_eq!(s.flatten().to_vec(), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn from_flat_round_trips() {
        let s = Spectrogram::from_array(array![[1.0, 3.0, 5.0], [2.0, 4.0, 6.0]]).unwrap();
        let back = Spectrogram::from_flat(2, 3, s.flatten().as_slice().unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn rejects_non_finite() {
        let r = Spectrogram::from_array(array![[1.0, f64::NAN]]);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn rejects_empty() {
        assert!(Spectrogram::from_array(Array2::zeros((0, 3))).is_err());
    }
}
