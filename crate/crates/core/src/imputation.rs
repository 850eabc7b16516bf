//! Reconstruction of unreliable spectrogram cells.
//!
//! Whole-vector mode solves one weighted sparse-representation problem over
//! the full flattened utterance (requires the dictionary fragment length to
//! equal the utterance length). Sliding mode slides a fixed-length window
//! over the flattened utterance, solves each window on its reliable cells,
//! and averages the overlapping reconstructions per cell.
//!
//! Composition rule: cells with mask value exactly 1 keep the observed
//! value; all other cells take the averaged reconstruction when at least one
//! non-skipped window covers them and otherwise keep the observation. A
//! window whose mask slice has no positive weight at all is skipped without
//! a solve, and an utterance whose mask is entirely zero is returned
//! unchanged.

use ndarray::{s, Array1, Array2};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::features::DEFAULT_ENERGY_FLOOR;
use crate::masks::Mask;
use crate::solver::{self, SolveProblem};
use crate::spectrogram::Spectrogram;

/// Log-domain value used to pad utterances shorter than one window.
pub fn default_log_floor() -> f64 {
    DEFAULT_ENERGY_FLOOR.ln()
}

/// How the ℓ¹ penalty is chosen per solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaRule {
    /// Use this value directly.
    Fixed(f64),
    /// Use `fraction · max(λ_max, 0)`, computed per window from its own
    /// reliable rows.
    MaxFraction(f64),
}

impl Default for LambdaRule {
    fn default() -> Self {
        LambdaRule::MaxFraction(0.01)
    }
}

/// Solver settings threaded through imputation.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputeConfig {
    pub lambda: LambdaRule,
    /// KKT tolerance per solve.
    pub tol: f64,
    /// Sweep cap per solve is this factor times the atom count.
    pub max_sweep_factor: usize,
}

impl Default for ImputeConfig {
    fn default() -> Self {
        Self {
            lambda: LambdaRule::default(),
            tol: solver::DEFAULT_TOL,
            max_sweep_factor: solver::DEFAULT_SWEEP_FACTOR,
        }
    }
}

/// Window geometry over a flattened utterance of `total_rows` rows.
///
/// Windows are `window_rows` long, start every `shift_rows` rows, and the
/// final window is truncated to the rows that remain. With
/// `total_rows > window_rows` the window count is
/// `ceil((total_rows − window_rows) / shift_rows) + 1`, otherwise 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPlan {
    total_rows: usize,
    window_rows: usize,
    shift_rows: usize,
    starts: Vec<usize>,
}

impl WindowPlan {
    pub fn total_rows(&self) -> usize {
        self.total_rows
    }

    pub fn window_rows(&self) -> usize {
        self.window_rows
    }

    pub fn shift_rows(&self) -> usize {
        self.shift_rows
    }

    pub fn window_count(&self) -> usize {
        self.starts.len()
    }

    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    /// Row span `[start, end)` of the given 0-based window, truncated at the
    /// end of the signal.
    pub fn span(&self, window: usize) -> (usize, usize) {
        let start = self.starts[window];
        (start, (start + self.window_rows).min(self.total_rows))
    }

    /// Number of windows covering each row.
    pub fn coverage_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.total_rows];
        for w in 0..self.window_count() {
            let (start, end) = self.span(w);
            for c in &mut counts[start..end] {
                *c += 1;
            }
        }
        counts
    }

    /// Upper bound on candidates per row: `ceil(window_rows / shift_rows)`.
    pub fn max_candidates(&self) -> usize {
        self.window_rows.div_ceil(self.shift_rows)
    }
}

/// Lay out sliding windows over a flattened utterance.
pub fn plan_windows(total_rows: usize, window_rows: usize, shift_rows: usize) -> Result<WindowPlan> {
    if window_rows == 0 || total_rows == 0 {
        return Err(Error::InvalidPlan(
            "window and signal must be non-empty".into(),
        ));
    }
    if shift_rows == 0 {
        return Err(Error::InvalidPlan("shift must be at least 1 row".into()));
    }
    if window_rows > total_rows {
        return Err(Error::WindowExceedsSignal {
            window_rows,
            total_rows,
        });
    }
    if total_rows > window_rows && shift_rows > window_rows {
        return Err(Error::ShiftTooLarge {
            shift_rows,
            window_rows,
        });
    }
    let count = if total_rows == window_rows {
        1
    } else {
        (total_rows - window_rows).div_ceil(shift_rows) + 1
    };
    let starts = (0..count).map(|i| i * shift_rows).collect();
    Ok(WindowPlan {
        total_rows,
        window_rows,
        shift_rows,
        starts,
    })
}

/// Per-window solver diagnostics. Window numbers are 1-based, matching the
/// diagnostic log.
#[derive(Debug, Clone)]
pub struct WindowDiag {
    pub window: usize,
    /// Row span `[start, end)` in the flattened utterance.
    pub rows: (usize, usize),
    /// Cells with positive mask weight inside the window.
    pub reliable_cells: usize,
    pub lambda: f64,
    pub sparsity: usize,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub converged: bool,
    /// The window's reconstruction (before averaging), `end − start` rows.
    pub reconstruction: Vec<f64>,
}

/// Imputation output and diagnostics.
#[derive(Debug, Clone)]
pub struct ImputationResult {
    pub imputed: Spectrogram,
    /// Non-skipped windows contributing to each cell.
    pub candidate_counts: Array2<usize>,
    /// 1-based indices of windows skipped for lack of reliable cells.
    pub skipped_windows: Vec<usize>,
    pub per_window_diag: Vec<WindowDiag>,
    /// Number of solver calls actually made.
    pub solve_invocations: usize,
}

fn resolve_lambda(rule: LambdaRule, problem_free: &SolveProblem) -> Result<f64> {
    match rule {
        LambdaRule::Fixed(v) => {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("fixed lambda {v} invalid")));
            }
            Ok(v)
        }
        LambdaRule::MaxFraction(f) => {
            if !f.is_finite() || f < 0.0 {
                return Err(Error::InvalidConfig(format!("lambda fraction {f} invalid")));
            }
            let lmax = solver::lambda_max(
                problem_free.atoms,
                problem_free.target,
                problem_free.weights,
            )?;
            Ok(f * lmax.max(0.0))
        }
    }
}

/// Mean the spans into per-row sums and counts (fixed accumulation order).
fn average_candidates(
    total_rows: usize,
    spans: &[(usize, Vec<f64>)],
) -> (Vec<f64>, Vec<usize>) {
    let mut sums = vec![0.0; total_rows];
    let mut counts = vec![0usize; total_rows];
    for (start, values) in spans {
        for (offset, &v) in values.iter().enumerate() {
            sums[start + offset] += v;
            counts[start + offset] += 1;
        }
    }
    (sums, counts)
}

fn impute_with_plan(
    y: &Spectrogram,
    mask: &Mask,
    dict: &Dictionary,
    plan: &WindowPlan,
    cfg: &ImputeConfig,
) -> Result<ImputationResult> {
    let bands = y.bands();
    let frames = y.frames();
    let y_flat = y.flatten();
    let m_flat = Array1::from_vec(mask.flatten());

    let mut skipped = Vec::new();
    let mut diags = Vec::new();
    let mut spans: Vec<(usize, Vec<f64>)> = Vec::new();
    let mut solve_invocations = 0usize;

    for w in 0..plan.window_count() {
        let (start, end) = plan.span(w);
        let weights = m_flat.slice(s![start..end]);
        let reliable_cells = weights.iter().filter(|&&v| v > 0.0).count();
        if reliable_cells == 0 {
            skipped.push(w + 1);
            continue;
        }
        let span_len = end - start;
        let atoms = dict.atoms().slice(s![..span_len, ..]);
        let target = y_flat.slice(s![start..end]);
        let mut problem = SolveProblem::new(atoms, target, weights, 0.0);
        problem.tol = cfg.tol;
        problem.max_iter = cfg.max_sweep_factor * dict.atom_count().max(1);
        problem.lambda = resolve_lambda(cfg.lambda, &problem)?;

        let solved = solver::solve(&problem)?;
        solve_invocations += 1;

        // window reconstruction: sparse combination of atom columns
        let mut gamma = vec![0.0; span_len];
        for (j, &xj) in solved.x.iter().enumerate() {
            if xj != 0.0 {
                let col = dict.atoms().column(j);
                for (g, &a) in gamma.iter_mut().zip(col.iter().take(span_len)) {
                    *g += xj * a;
                }
            }
        }

        diags.push(WindowDiag {
            window: w + 1,
            rows: (start, end),
            reliable_cells,
            lambda: problem.lambda,
            sparsity: solved.sparsity,
            iterations: solved.iterations,
            kkt_residual: solved.kkt_residual,
            converged: solved.converged,
            reconstruction: gamma.clone(),
        });
        spans.push((start, gamma));
    }

    let (sums, counts) = average_candidates(plan.total_rows(), &spans);
    let mut out_flat = y_flat.to_vec();
    for d in 0..plan.total_rows() {
        if m_flat[d] != 1.0 && counts[d] > 0 {
            out_flat[d] = sums[d] / counts[d] as f64;
        }
    }

    let imputed = Spectrogram::from_flat(bands, frames, &out_flat)?;
    let mut candidate_counts = Array2::zeros((bands, frames));
    for t in 0..frames {
        for k in 0..bands {
            candidate_counts[(k, t)] = counts[t * bands + k];
        }
    }
    Ok(ImputationResult {
        imputed,
        candidate_counts,
        skipped_windows: skipped,
        per_window_diag: diags,
        solve_invocations,
    })
}

/// Impute a whole utterance as a single problem. The dictionary fragment
/// length must equal the utterance frame count.
pub fn impute_whole(
    y: &Spectrogram,
    mask: &Mask,
    dict: &Dictionary,
    cfg: &ImputeConfig,
) -> Result<ImputationResult> {
    mask.matches_shape(y, "impute_whole")?;
    if dict.bands() != y.bands() {
        return Err(Error::DictionaryMismatch(format!(
            "dictionary has {} bands, utterance has {}",
            dict.bands(),
            y.bands()
        )));
    }
    if dict.fragment_frames() != y.frames() {
        return Err(Error::DictionaryMismatch(format!(
            "whole-utterance mode needs fragment length {} == utterance frames {}",
            dict.fragment_frames(),
            y.frames()
        )));
    }
    let rows = y.flat_len();
    let plan = plan_windows(rows, rows, y.bands())?;
    impute_with_plan(y, mask, dict, &plan, cfg)
}

/// Impute with sliding windows shifted by `delta_frames` frames, averaging
/// overlapping reconstructions. Utterances shorter than one window are
/// right-padded with floor-energy, zero-mask frames and cropped afterwards.
pub fn impute_sliding(
    y: &Spectrogram,
    mask: &Mask,
    dict: &Dictionary,
    delta_frames: usize,
    cfg: &ImputeConfig,
) -> Result<ImputationResult> {
    mask.matches_shape(y, "impute_sliding")?;
    if dict.bands() != y.bands() {
        return Err(Error::DictionaryMismatch(format!(
            "dictionary has {} bands, utterance has {}",
            dict.bands(),
            y.bands()
        )));
    }
    if delta_frames == 0 {
        return Err(Error::InvalidConfig("shift must be at least 1 frame".into()));
    }

    let bands = y.bands();
    let fragment = dict.fragment_frames();

    if y.frames() < fragment {
        // pad to one full window, impute, crop
        let pad_to = fragment;
        let mut padded_values = Array2::from_elem((bands, pad_to), default_log_floor());
        padded_values
            .slice_mut(s![.., ..y.frames()])
            .assign(y.values());
        let mut padded_mask = Array2::zeros((bands, pad_to));
        padded_mask
            .slice_mut(s![.., ..y.frames()])
            .assign(mask.values());
        let padded_y = Spectrogram::from_array(padded_values)?;
        let padded_m = Mask::from_array(padded_mask)?;
        let rows = padded_y.flat_len();
        let plan = plan_windows(rows, rows, bands)?;
        let result = impute_with_plan(&padded_y, &padded_m, dict, &plan, cfg)?;
        let imputed = Spectrogram::from_array(
            result.imputed.values().slice(s![.., ..y.frames()]).to_owned(),
        )?;
        let candidate_counts = result
            .candidate_counts
            .slice(s![.., ..y.frames()])
            .to_owned();
        return Ok(ImputationResult {
            imputed,
            candidate_counts,
            ..result
        });
    }

    let plan = plan_windows(
        bands * y.frames(),
        bands * fragment,
        bands * delta_frames,
    )?;
    impute_with_plan(y, mask, dict, &plan, cfg)
}

/// Clamp unreliable-cell estimates to the observed energy: clean speech
/// cannot exceed the noisy observation. Off by default; exposed as an
/// optional post-processing step.
pub fn bounded_clamp(
    mut result: ImputationResult,
    y: &Spectrogram,
    mask: &Mask,
) -> Result<ImputationResult> {
    mask.matches_shape(y, "bounded_clamp")?;
    y.same_shape(&result.imputed, "bounded_clamp")?;
    let mut values = result.imputed.values().clone();
    for ((v, &obs), &m) in values
        .iter_mut()
        .zip(y.values().iter())
        .zip(mask.values().iter())
    {
        if m < 1.0 && *v > obs {
            *v = obs;
        }
    }
    result.imputed = Spectrogram::from_array(values)?;
    Ok(result)
}
