//! Reconstruction metrics and experiment sweeps.
//!
//! Sweeps run the full pipeline per utterance and configuration row:
//! fit noise to the utterance length, scale it to the target SNR in the
//! spectrogram domain, mix, build the mask, impute with sliding windows,
//! and score against the clean truth. Rows aggregate utterance metrics by
//! arithmetic mean and are sorted by (mask, snr, shift, noise).

use ndarray::s;
use rayon::prelude::*;

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::features::{additive_spectrogram_mix, noise_power_gain_for_snr};
use crate::imputation::{bounded_clamp, impute_sliding, ImputeConfig};
use crate::masks::{self, Mask, MaskStats};
use crate::spectrogram::Spectrogram;

/// Reconstruction quality of one imputed utterance.
///
/// `unreliable_rmse` and `imputation_snr_db` are absent when the mask has no
/// unreliable cells. The SNR is computed in the linear power domain over
/// unreliable cells whose true value is above the silence floor, so floor
/// cells cannot dominate the denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImputationMetrics {
    pub unreliable_rmse: Option<f64>,
    pub overall_rmse: f64,
    pub imputation_snr_db: Option<f64>,
    pub total_cells: usize,
    pub unreliable_cells: usize,
}

/// Log-domain threshold below which a cell counts as silence-floor for the
/// linear-domain SNR metric.
fn snr_floor() -> f64 {
    crate::features::DEFAULT_ENERGY_FLOOR.ln() + 1e-9
}

/// Score an imputed spectrogram against the clean truth under a mask.
/// Cells with mask value < 0.5 count as unreliable.
pub fn score(truth: &Spectrogram, imputed: &Spectrogram, mask: &Mask) -> Result<ImputationMetrics> {
    truth.same_shape(imputed, "score")?;
    mask.matches_shape(truth, "score")?;

    let mut overall_sq = 0.0;
    let mut unreliable_sq = 0.0;
    let mut unreliable_cells = 0usize;
    let mut snr_signal = 0.0;
    let mut snr_error = 0.0;
    let mut snr_cells = 0usize;

    let floor = snr_floor();
    for ((&t, &i), &m) in truth
        .values()
        .iter()
        .zip(imputed.values().iter())
        .zip(mask.values().iter())
    {
        let diff = t - i;
        overall_sq += diff * diff;
        if m < 0.5 {
            unreliable_cells += 1;
            unreliable_sq += diff * diff;
            if t > floor {
                let s_lin = t.exp();
                let e = s_lin - i.exp();
                snr_signal += s_lin * s_lin;
                snr_error += e * e;
                snr_cells += 1;
            }
        }
    }

    let total_cells = truth.flat_len();
    let overall_rmse = (overall_sq / total_cells as f64).sqrt();
    let unreliable_rmse = if unreliable_cells > 0 {
        Some((unreliable_sq / unreliable_cells as f64).sqrt())
    } else {
        None
    };
    let imputation_snr_db = if snr_cells > 0 {
        Some(10.0 * (snr_signal / snr_error).log10())
    } else {
        None
    };
    Ok(ImputationMetrics {
        unreliable_rmse,
        overall_rmse,
        imputation_snr_db,
        total_cells,
        unreliable_cells,
    })
}

/// Mask variants a sweep can evaluate.
///
/// `Threshold` compares the mixture against the true scaled noise with the
/// given SNR threshold; `Corrected` additionally removes its false reliables
/// using the oracle mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskKind {
    Oracle,
    Threshold { snr_db: f64 },
    Corrected { snr_db: f64 },
}

impl MaskKind {
    pub fn label(&self) -> &'static str {
        match self {
            MaskKind::Oracle => "oracle",
            MaskKind::Threshold { .. } => "threshold",
            MaskKind::Corrected { .. } => "corrected",
        }
    }
}

/// Full sweep description: corpora, dictionary, and the configuration grid.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Clean utterances: (name, spectrogram).
    pub clean: Vec<(String, Spectrogram)>,
    /// Noise sources: (name, spectrogram); tiled or truncated per utterance.
    pub noise: Vec<(String, Spectrogram)>,
    pub dictionary: Dictionary,
    pub snr_grid_db: Vec<f64>,
    pub shifts: Vec<usize>,
    pub masks: Vec<MaskKind>,
    pub impute: ImputeConfig,
    pub bounded_clamp: bool,
}

/// Utterance-mean metrics for one configuration row.
#[derive(Debug, Clone, Copy)]
pub struct AggregatedMetrics {
    pub unreliable_rmse: Option<f64>,
    pub overall_rmse: f64,
    pub imputation_snr_db: Option<f64>,
    pub unreliable_cells: f64,
    pub total_cells: f64,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub noise: String,
    pub snr_db: f64,
    pub mask: String,
    pub shift: usize,
    pub metrics: AggregatedMetrics,
    pub reliable_pct: f64,
    pub false_reliable_pct: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub const CSV_HEADER: &'static str = "noise,snr_db,mask,shift,unreliable_rmse,overall_rmse,imputation_snr_db,unreliable_cells,total_cells,reliable_pct,false_reliable_pct";

    /// Render the report as CSV: the fixed header plus one row per
    /// configuration, floats with six decimal places.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{},{},{},{:.6},{},{:.6},{:.6},{:.6},{:.6}\n",
                row.noise,
                row.snr_db,
                row.mask,
                row.shift,
                fmt_opt(row.metrics.unreliable_rmse),
                row.metrics.overall_rmse,
                fmt_opt(row.metrics.imputation_snr_db),
                row.metrics.unreliable_cells,
                row.metrics.total_cells,
                row.reliable_pct,
                row.false_reliable_pct,
            ));
        }
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.6}"),
        None => "nan".to_string(),
    }
}

/// Repeat or truncate noise frames to the requested length.
fn fit_noise_frames(noise: &Spectrogram, frames: usize) -> Result<Spectrogram> {
    if noise.frames() >= frames {
        Spectrogram::from_array(noise.values().slice(s![.., ..frames]).to_owned())
    } else {
        let values = ndarray::Array2::from_shape_fn((noise.bands(), frames), |(k, t)| {
            noise.values()[(k, t % noise.frames())]
        });
        Spectrogram::from_array(values)
    }
}

struct UtteranceOutcome {
    metrics: ImputationMetrics,
    stats: MaskStats,
}

fn run_utterance(
    clean: &Spectrogram,
    noise: &Spectrogram,
    snr_db: f64,
    kind: MaskKind,
    shift: usize,
    config: &SweepConfig,
) -> Result<UtteranceOutcome> {
    let fitted = fit_noise_frames(noise, clean.frames())?;
    let gain = noise_power_gain_for_snr(clean, &fitted, snr_db)?;
    let scaled_noise = fitted.shifted(gain.ln());
    let mixture = additive_spectrogram_mix(clean, &scaled_noise)?;
    let oracle = masks::oracle_mask(clean, &scaled_noise)?;
    let mask = match kind {
        MaskKind::Oracle => oracle.clone(),
        MaskKind::Threshold { snr_db } => masks::threshold_mask(&mixture, &scaled_noise, snr_db)?,
        MaskKind::Corrected { snr_db } => {
            let estimated = masks::threshold_mask(&mixture, &scaled_noise, snr_db)?;
            masks::remove_false_reliables(&estimated, &oracle)?
        }
    };
    let stats = masks::mask_stats(&mask, &oracle)?;

    let mut result = impute_sliding(&mixture, &mask, &config.dictionary, shift, &config.impute)?;
    if config.bounded_clamp {
        result = bounded_clamp(result, &mixture, &mask)?;
    }
    let metrics = score(clean, &result.imputed, &mask)?;
    Ok(UtteranceOutcome { metrics, stats })
}

/// Mean per-utterance metrics; optional metrics average over the utterances
/// where they exist.
fn aggregate(outcomes: &[UtteranceOutcome]) -> (AggregatedMetrics, f64, f64) {
    let n = outcomes.len() as f64;
    let mean = |values: Vec<f64>| -> Option<f64> {
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    };
    let metrics = AggregatedMetrics {
        unreliable_rmse: mean(
            outcomes
                .iter()
                .filter_map(|o| o.metrics.unreliable_rmse)
                .collect(),
        ),
        overall_rmse: outcomes.iter().map(|o| o.metrics.overall_rmse).sum::<f64>() / n,
        imputation_snr_db: mean(
            outcomes
                .iter()
                .filter_map(|o| o.metrics.imputation_snr_db)
                .collect(),
        ),
        unreliable_cells: outcomes
            .iter()
            .map(|o| o.metrics.unreliable_cells as f64)
            .sum::<f64>()
            / n,
        total_cells: outcomes
            .iter()
            .map(|o| o.metrics.total_cells as f64)
            .sum::<f64>()
            / n,
    };
    let reliable_pct = outcomes.iter().map(|o| o.stats.reliable_pct).sum::<f64>() / n;
    let false_reliable_pct = outcomes
        .iter()
        .map(|o| o.stats.false_reliable_pct)
        .sum::<f64>()
        / n;
    (metrics, reliable_pct, false_reliable_pct)
}

/// Run the sweep grid. Utterances that fail are skipped with a warning; a
/// row where every utterance failed is an error.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.clean.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if config.noise.is_empty() {
        return Err(Error::InvalidConfig("no noise sources".into()));
    }
    if config.snr_grid_db.is_empty() || config.shifts.is_empty() || config.masks.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep needs at least one SNR, shift, and mask".into(),
        ));
    }

    let mut rows = Vec::new();
    for kind in &config.masks {
        for &snr_db in &config.snr_grid_db {
            for &shift in &config.shifts {
                for (noise_name, noise) in &config.noise {
                    let outcomes: Vec<UtteranceOutcome> = config
                        .clean
                        .par_iter()
                        .filter_map(|(utt_name, clean)| {
                            match run_utterance(clean, noise, snr_db, *kind, shift, config) {
                                Ok(outcome) => Some(outcome),
                                Err(err) => {
                                    log::warn!(
                                        "skipping utterance {utt_name} (noise {noise_name}, \
                                         snr {snr_db}, mask {}, shift {shift}): {err}",
                                        kind.label()
                                    );
                                    None
                                }
                            }
                        })
                        .collect();
                    if outcomes.is_empty() {
                        return Err(Error::SweepAllFailed);
                    }
                    let (metrics, reliable_pct, false_reliable_pct) = aggregate(&outcomes);
                    rows.push(SweepRow {
                        noise: noise_name.clone(),
                        snr_db,
                        mask: kind.label().to_string(),
                        shift,
                        metrics,
                        reliable_pct,
                        false_reliable_pct,
                    });
                }
            }
        }
    }
    rows.sort_by(|a, b| {
        a.mask
            .cmp(&b.mask)
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then(a.shift.cmp(&b.shift))
            .then(a.noise.cmp(&b.noise))
    });
    Ok(SweepReport { rows })
}
