//! Audio frontend: mel log-power spectrograms and SNR-controlled mixing.
//!
//! Frames are Hamming-windowed, zero-padded to the FFT size, and reduced to
//! mel band energies with triangular filters evaluated at bin frequencies.
//! Band energies are floored before the natural log, so silence maps to
//! `ln(energy_floor)` instead of −∞.

use ndarray::Array2;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::spectrogram::Spectrogram;

/// Default linear-power floor applied before the log.
pub const DEFAULT_ENERGY_FLOOR: f64 = 1e-10;

/// Mono audio at a fixed sample rate, samples in arbitrary real units.
#[derive(Debug, Clone)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientAudio("clip has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidConfig("sample rate must be positive".into()));
        }
        if !samples.iter().all(|s| s.is_finite()) {
            return Err(Error::NonFinite("audio samples"));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Frontend parameters. Defaults: 25 ms frames, 10 ms shift, 23 mel bands,
/// FFT size 256, floor 1e-10 — the usual 8 kHz digit-corpus convention.
/// No pre-emphasis is applied.
#[derive(Debug, Clone)]
pub struct FrontendConfig {
    pub frame_length_ms: f64,
    pub frame_shift_ms: f64,
    pub band_count: usize,
    pub fft_size: usize,
    pub energy_floor: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            frame_length_ms: 25.0,
            frame_shift_ms: 10.0,
            band_count: 23,
            fft_size: 256,
            energy_floor: DEFAULT_ENERGY_FLOOR,
        }
    }
}

impl FrontendConfig {
    fn validate(&self) -> Result<()> {
        if self.frame_shift_ms <= 0.0 || self.frame_length_ms <= 0.0 {
            return Err(Error::InvalidConfig(
                "frame length and shift must be positive".into(),
            ));
        }
        if self.frame_shift_ms > self.frame_length_ms {
            return Err(Error::InvalidConfig(
                "frame shift must not exceed frame length".into(),
            ));
        }
        if self.band_count == 0 {
            return Err(Error::InvalidConfig("band count must be at least 1".into()));
        }
        if !(self.energy_floor > 0.0) {
            return Err(Error::InvalidConfig("energy floor must be positive".into()));
        }
        Ok(())
    }

    fn frame_samples(&self, sample_rate: u32) -> usize {
        (self.frame_length_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    fn shift_samples(&self, sample_rate: u32) -> usize {
        (self.frame_shift_ms * sample_rate as f64 / 1000.0).round() as usize
    }
}

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filterbank evaluated at FFT bin frequencies.
/// Returns a `band_count × (fft_size/2 + 1)` weight matrix (unit peak).
fn mel_filterbank(band_count: usize, fft_size: usize, sample_rate: u32) -> Array2<f64> {
    let n_bins = fft_size / 2 + 1;
    let nyquist = sample_rate as f64 / 2.0;
    let mel_max = hz_to_mel(nyquist);
    // band_count + 2 edge points, uniformly spaced on the mel scale
    let edges: Vec<f64> = (0..band_count + 2)
        .map(|i| mel_to_hz(mel_max * i as f64 / (band_count + 1) as f64))
        .collect();

    let mut filters = Array2::zeros((band_count, n_bins));
    for k in 0..band_count {
        let (lo, center, hi) = (edges[k], edges[k + 1], edges[k + 2]);
        for bin in 0..n_bins {
            let f = bin as f64 * sample_rate as f64 / fft_size as f64;
            let w = if f <= lo || f >= hi {
                0.0
            } else if f <= center {
                (f - lo) / (center - lo)
            } else {
                (hi - f) / (hi - center)
            };
            filters[(k, bin)] = w;
        }
    }
    filters
}

fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64).cos())
        .collect()
}

/// Compute the mel log-power spectrogram of a clip.
///
/// Output is `band_count × T` with `T = floor((n − frame)/shift) + 1`; every
/// cell is at least `ln(energy_floor)`.
pub fn log_mel(clip: &AudioClip, cfg: &FrontendConfig) -> Result<Spectrogram> {
    cfg.validate()?;
    let frame = cfg.frame_samples(clip.sample_rate());
    let shift = cfg.shift_samples(clip.sample_rate());
    if frame == 0 || shift == 0 {
        return Err(Error::InvalidConfig(
            "frame or shift rounds to zero samples at this sample rate".into(),
        ));
    }
    if cfg.fft_size < frame {
        return Err(Error::InvalidConfig(format!(
            "fft_size {} smaller than frame length {} samples",
            cfg.fft_size, frame
        )));
    }
    if clip.len() < frame {
        return Err(Error::InsufficientAudio(format!(
            "{} samples is shorter than one {frame}-sample frame",
            clip.len()
        )));
    }

    let n_frames = (clip.len() - frame) / shift + 1;
    let window = hamming(frame);
    let filters = mel_filterbank(cfg.band_count, cfg.fft_size, clip.sample_rate());
    let n_bins = cfg.fft_size / 2 + 1;

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(cfg.fft_size);
    let mut values = Array2::zeros((cfg.band_count, n_frames));
    let mut buf = vec![Complex::new(0.0, 0.0); cfg.fft_size];

    for t in 0..n_frames {
        let start = t * shift;
        for (i, slot) in buf.iter_mut().enumerate() {
            let s = if i < frame {
                clip.samples()[start + i] * window[i]
            } else {
                0.0
            };
            *slot = Complex::new(s, 0.0);
        }
        fft.process(&mut buf);
        for k in 0..cfg.band_count {
            let mut energy = 0.0;
            for bin in 0..n_bins {
                energy += filters[(k, bin)] * buf[bin].norm_sqr();
            }
            values[(k, t)] = energy.max(cfg.energy_floor).ln();
        }
    }
    Spectrogram::from_array(values)
}

/// Mix speech with noise at a target SNR (dB) in the waveform domain.
///
/// Noise is truncated to the speech length; the returned scale multiplies the
/// noise amplitude so that `10·log10(P_speech / P_scaled_noise) = snr_db`
/// over the mixed region.
pub fn mix_at_snr(speech: &AudioClip, noise: &AudioClip, snr_db: f64) -> Result<(AudioClip, f64)> {
    if speech.sample_rate() != noise.sample_rate() {
        return Err(Error::SampleRateMismatch(
            speech.sample_rate(),
            noise.sample_rate(),
        ));
    }
    if noise.len() < speech.len() {
        return Err(Error::InsufficientAudio(format!(
            "noise ({} samples) shorter than speech ({} samples)",
            noise.len(),
            speech.len()
        )));
    }
    if !snr_db.is_finite() {
        return Err(Error::NonFinite("snr_db"));
    }
    let n = speech.len();
    let p_speech = mean_square(speech.samples());
    let p_noise = mean_square(&noise.samples()[..n]);
    if p_speech <= 0.0 || p_noise <= 0.0 {
        return Err(Error::DegeneratePower(
            "speech or noise has zero power".into(),
        ));
    }
    let scale = (p_speech / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt();
    let mixed: Vec<f64> = speech
        .samples()
        .iter()
        .zip(&noise.samples()[..n])
        .map(|(s, v)| s + scale * v)
        .collect();
    Ok((AudioClip::new(mixed, speech.sample_rate())?, scale))
}

fn mean_square(samples: &[f64]) -> f64 {
    samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64
}

/// Add two log-power spectrograms in the linear power domain:
/// `log(exp(a) + exp(b))` per cell.
pub fn additive_spectrogram_mix(speech: &Spectrogram, noise: &Spectrogram) -> Result<Spectrogram> {
    speech.same_shape(noise, "additive_spectrogram_mix")?;
    let mut values = speech.values().clone();
    for (y, &n) in values.iter_mut().zip(noise.values().iter()) {
        *y = log_add_exp(*y, n);
    }
    Spectrogram::from_array(values)
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Linear power gain `g` such that mixing `exp(S) + g·exp(N)` attains the
/// target SNR (dB) over the whole utterance. The log-domain noise offset is
/// `ln(g)`; used to simulate mixtures when only feature matrices exist.
pub fn noise_power_gain_for_snr(
    speech: &Spectrogram,
    noise: &Spectrogram,
    snr_db: f64,
) -> Result<f64> {
    speech.same_shape(noise, "noise_power_gain_for_snr")?;
    let p_speech: f64 = speech.values().iter().map(|v| v.exp()).sum();
    let p_noise: f64 = noise.values().iter().map(|v| v.exp()).sum();
    if p_speech <= 0.0 || p_noise <= 0.0 {
        return Err(Error::DegeneratePower(
            "speech or noise spectrogram has zero power".into(),
        ));
    }
    Ok(p_speech / (p_noise * 10f64.powf(snr_db / 10.0)))
}
