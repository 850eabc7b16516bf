//! Synthetic corpora for tests, benchmarks, and demos.
//!
//! Utterances are built in the linear power domain as a silence floor plus
//! randomly placed, randomly scaled copies of a small set of shared
//! time–frequency patterns, then logged. Fragments cut from such a corpus
//! make a usable exemplar dictionary, and the shared patterns give windows
//! sparse structure to recover.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::DEFAULT_ENERGY_FLOOR;
use crate::spectrogram::Spectrogram;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub bands: usize,
    pub frames: usize,
    pub utterances: usize,
    /// Number of shared base patterns.
    pub patterns: usize,
    /// Length of each base pattern in frames.
    pub pattern_frames: usize,
    pub seed: u64,
}

/// One smooth positive time–frequency bump.
fn bump(bands: usize, frames: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let center_k = rng.random_range(0.0..bands as f64);
    let center_t = rng.random_range(0.0..frames as f64);
    let width_k = rng.random_range(0.8..(bands as f64 / 2.0).max(1.0));
    let width_t = rng.random_range(1.0..(frames as f64 / 2.0).max(1.2));
    let amplitude = rng.random_range(0.5..4.0);
    Array2::from_shape_fn((bands, frames), |(k, t)| {
        let dk = (k as f64 - center_k) / width_k;
        let dt = (t as f64 - center_t) / width_t;
        amplitude * (-0.5 * (dk * dk + dt * dt)).exp()
    })
}

/// Generate a corpus of log-power utterances sharing a pattern inventory.
pub fn corpus(cfg: &SynthConfig) -> Vec<Spectrogram> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let patterns: Vec<Array2<f64>> = (0..cfg.patterns.max(1))
        .map(|_| {
            let mut p = bump(cfg.bands, cfg.pattern_frames, &mut rng);
            for _ in 0..2 {
                p += &bump(cfg.bands, cfg.pattern_frames, &mut rng);
            }
            p
        })
        .collect();

    (0..cfg.utterances)
        .map(|_| {
            let mut power = Array2::from_elem((cfg.bands, cfg.frames), DEFAULT_ENERGY_FLOOR);
            let mut offset = 0usize;
            while offset < cfg.frames {
                let pattern = &patterns[rng.random_range(0..patterns.len())];
                let gain = rng.random_range(0.3..3.0);
                let span = cfg.pattern_frames.min(cfg.frames - offset);
                for t in 0..span {
                    for k in 0..cfg.bands {
                        power[(k, offset + t)] += gain * pattern[(k, t)];
                    }
                }
                // advance with a little overlap or gap
                let step = (cfg.pattern_frames as i64
                    + rng.random_range(-(cfg.pattern_frames as i64) / 3..=2))
                .max(1) as usize;
                offset += step;
            }
            Spectrogram::from_array(power.mapv(f64::ln)).unwrap()
        })
        .collect()
}

/// Generate log-power noise: a per-band stationary profile with per-cell
/// jitter.
pub fn noise(bands: usize, frames: usize, seed: u64) -> Spectrogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile: Vec<f64> = (0..bands).map(|_| rng.random_range(-2.5..-0.5)).collect();
    let values = Array2::from_shape_fn((bands, frames), |(k, _)| {
        profile[k] + rng.random_range(-1.0..1.0)
    });
    Spectrogram::from_array(values).unwrap()
}
