//! Sparse imputation of noise-corrupted spectrograms.
//!
//! Noisy time–frequency cells are labeled reliable or unreliable by a mask;
//! unreliable cells are replaced by clean-speech estimates obtained from a
//! sparse, non-negative representation of the reliable cells in an
//! overcomplete basis of fixed-length clean-speech fragments. Arbitrary-length
//! utterances are handled by a sliding window over the flattened spectrogram,
//! with overlapping reconstructions combined by averaging.
//!
//! Modules:
//! - [`features`]: mel log-power frontend and SNR-controlled mixing
//! - [`masks`]: oracle and threshold reliability masks
//! - [`dictionary`]: exemplar fragment extraction
//! - [`solver`]: weighted non-negative ℓ¹-regularized least squares
//! - [`imputation`]: whole-utterance and sliding-window reconstruction
//! - [`evaluation`]: reconstruction metrics and experiment sweeps
//! - [`spim`] / [`wav`]: on-disk matrix and audio formats
//! - [`synth`]: deterministic synthetic fixtures

pub mod dictionary;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod imputation;
pub mod masks;
pub mod solver;
pub mod spectrogram;
pub mod spim;
pub mod synth;
pub mod wav;

pub use dictionary::{build_dictionary, flatten_fragment, unflatten_fragment, Dictionary};
pub use error::{Error, Result};
pub use evaluation::{run_sweep, score, ImputationMetrics, MaskKind, SweepConfig, SweepReport};
pub use features::{
    additive_spectrogram_mix, log_mel, mix_at_snr, AudioClip, FrontendConfig,
};
pub use imputation::{
    bounded_clamp, impute_sliding, impute_whole, plan_windows, ImputationResult, ImputeConfig,
    LambdaRule, WindowPlan,
};
pub use masks::{mask_stats, oracle_mask, remove_false_reliables, threshold_mask, Mask, MaskStats};
pub use solver::{kkt_check, lambda_max, solve, solve_path, SolveProblem, SolveResult};
pub use spectrogram::Spectrogram;
