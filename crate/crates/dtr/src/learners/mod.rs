//! The four estimation pipelines: Q-learning, backward O-learning, and the
//! simple and efficient AMOL variants, plus pseudo-outcome construction and
//! cost-parameter cross validation.
//!
//! All pipelines run backward from the last stage. At each stage the
//! margin-based learners build weighted samples `(H_k, A_k, W_k)`, select the
//! cost parameter by cross validation, and call the weighted large-margin
//! solver; negative weights are kept through the label-flip transform, never
//! dropped. Backward induction is deterministic: the same data and
//! configuration produce an identical report.

mod amol;
mod cost_cv;
mod design;
mod olearn;
mod pseudo;
mod qchain;
mod qlearn;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{median_pairwise_distance, KernelSpec};
use crate::lasso::{fit_lasso_cv, lambda_grid, DesignMatrix, LassoFit};
use crate::model::{HistoryScheme, HistoryVector, Regimen, Trajectory};
use crate::wsvm::{fit_weighted_svm, SolverConfig, WeightedSample};

pub use amol::{fit_amol_efficient, fit_amol_simple};
pub use cost_cv::{cross_validate_cost, CostScore, CostSelection};
pub use olearn::fit_olearning;
pub use pseudo::{augmented_pseudo_outcome, PseudoOutcome, PseudoOutcomeVariant};
pub use qlearn::fit_qlearning;

pub(crate) use design::{q_design, q_rule, q_value_max};
pub(crate) use qchain::QChain;

/// Estimation method identifiers, also the CLI tokens.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "qlearn")]
    QLearning,
    #[serde(rename = "olearn")]
    OLearning,
    #[serde(rename = "amol")]
    AmolSimple,
    #[serde(rename = "amol-eff")]
    AmolEfficient,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::QLearning,
        Method::OLearning,
        Method::AmolSimple,
        Method::AmolEfficient,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let token = match self {
            Method::QLearning => "qlearn",
            Method::OLearning => "olearn",
            Method::AmolSimple => "amol",
            Method::AmolEfficient => "amol-eff",
        };
        write!(f, "{token}")
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "qlearn" => Ok(Method::QLearning),
            "olearn" => Ok(Method::OLearning),
            "amol" => Ok(Method::AmolSimple),
            "amol-eff" => Ok(Method::AmolEfficient),
            other => Err(format!(
                "unknown method '{other}', expected qlearn|olearn|amol|amol-eff"
            )),
        }
    }
}

/// Kernel choice for the margin-based learners.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelChoice {
    Linear,
    /// Gaussian with a fixed bandwidth, or — when none is given — the median
    /// pairwise distance of the stage's training histories.
    Gaussian {
        bandwidth: Option<f64>,
    },
}

impl KernelChoice {
    pub(crate) fn resolve(&self, histories: &[HistoryVector]) -> KernelSpec {
        match self {
            KernelChoice::Linear => KernelSpec::Linear,
            KernelChoice::Gaussian {
                bandwidth: Some(bw),
            } => KernelSpec::Gaussian { bandwidth: *bw },
            KernelChoice::Gaussian { bandwidth: None } => {
                let points: Vec<&[f64]> = histories.iter().map(|h| h.values.as_slice()).collect();
                KernelSpec::Gaussian {
                    bandwidth: median_pairwise_distance(&points).unwrap_or(1.0),
                }
            }
        }
    }
}

/// Shared configuration for every pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub kernel: KernelChoice,
    /// Cost-parameter grid for the margin solver.
    pub cost_grid: Vec<f64>,
    /// Folds for cost-parameter cross validation.
    pub cost_folds: usize,
    /// Folds for the internal regression cross validations.
    pub lasso_folds: usize,
    pub lasso_grid_len: usize,
    pub lasso_min_ratio: f64,
    pub kkt_tolerance: f64,
    pub max_passes: usize,
    pub scheme: HistoryScheme,
    /// Use the literal stage-boundary compliance indicator `M_{k-1} = 0` in
    /// the efficient pseudo-outcome instead of the vacuous-compliance
    /// convention `M_{k-1} = 1`. Off by default: the literal form zeroes the
    /// own-stage augmentation term and loses the reduction to the simple
    /// variant.
    pub literal_stage_boundary: bool,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            kernel: KernelChoice::Linear,
            // 2^-5, 2^-3, ..., 2^9
            cost_grid: (0..8).map(|i| 2.0f64.powi(2 * i - 5)).collect(),
            cost_folds: 4,
            lasso_folds: 5,
            lasso_grid_len: 50,
            lasso_min_ratio: 1e-3,
            kkt_tolerance: 1e-3,
            max_passes: 100_000,
            scheme: HistoryScheme { interactions: true },
            literal_stage_boundary: false,
        }
    }
}

impl LearnerConfig {
    pub(crate) fn solver_config(&self, kernel: KernelSpec, cost: f64) -> SolverConfig {
        SolverConfig {
            cost,
            kernel,
            kkt_tolerance: self.kkt_tolerance,
            max_passes: self.max_passes,
            track_objective: false,
        }
    }
}

/// Per-stage fitting diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageDiagnostics {
    pub stage: usize,
    pub n_eligible: usize,
    /// Samples handed to the stage fit (followers for O-learning, all
    /// eligible subjects otherwise).
    pub n_used: usize,
    pub selected_cost: Option<f64>,
    pub cost_cv_scores: Vec<CostScore>,
    /// Penalty selected for the weight-recentring regression.
    pub selected_lambda_recentre: Option<f64>,
    /// Penalty selected for the Q-function regression.
    pub selected_lambda_qfn: Option<f64>,
    pub resolved_kernel: Option<KernelSpec>,
    pub support_vectors: Option<usize>,
    pub negative_weight_fraction: Option<f64>,
    pub solver_converged: Option<bool>,
    /// Set when the stage collapsed to a constant rule (all transformed
    /// labels equal).
    pub constant_label: Option<i8>,
}

impl StageDiagnostics {
    pub(crate) fn new(stage: usize) -> Self {
        StageDiagnostics {
            stage,
            n_eligible: 0,
            n_used: 0,
            selected_cost: None,
            cost_cv_scores: Vec::new(),
            selected_lambda_recentre: None,
            selected_lambda_qfn: None,
            resolved_kernel: None,
            support_vectors: None,
            negative_weight_fraction: None,
            solver_converged: None,
            constant_label: None,
        }
    }
}

const REPORT_VERSION: u32 = 1;

/// A fitted regimen plus per-stage diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub regimen: Regimen,
    pub stages: Vec<StageDiagnostics>,
}

#[derive(Serialize, Deserialize)]
struct FitReportDocument {
    version: u32,
    #[serde(flatten)]
    report: FitReport,
}

impl FitReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&FitReportDocument {
            version: REPORT_VERSION,
            report: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: FitReportDocument = serde_json::from_str(text)?;
        if doc.version != REPORT_VERSION {
            return Err(Error::VersionMismatch {
                found: doc.version,
                expected: REPORT_VERSION,
            });
        }
        Ok(doc.report)
    }
}

/// Dispatches to the requested pipeline.
pub fn fit_method(
    method: Method,
    data: &[Trajectory],
    config: &LearnerConfig,
) -> Result<FitReport> {
    match method {
        Method::QLearning => fit_qlearning(data, config),
        Method::OLearning => fit_olearning(data, config),
        Method::AmolSimple => fit_amol_simple(data, config),
        Method::AmolEfficient => fit_amol_efficient(data, config),
    }
}

/// Indices of subjects randomized at stage `k`.
pub(crate) fn eligible_indices(data: &[Trajectory], k: usize) -> Vec<usize> {
    (0..data.len())
        .filter(|&i| data[i].is_eligible(k))
        .collect()
}

/// Cross-validates the cost parameter and fits the stage rule, recording
/// diagnostics along the way.
///
/// The margin problem is invariant to rescaling all weights by a positive
/// constant (with the cost rescaled inversely), so the weights are first
/// normalized to maximum absolute value one; the cost grid then means the
/// same thing at every stage regardless of the raw weight scale.
pub(crate) fn fit_stage_rule(
    samples: &[WeightedSample],
    config: &LearnerConfig,
    diag: &mut StageDiagnostics,
) -> Result<crate::model::DecisionRule> {
    let histories: Vec<HistoryVector> = samples.iter().map(|s| s.history.clone()).collect();
    let kernel = config.kernel.resolve(&histories);
    diag.resolved_kernel = Some(kernel.clone());
    diag.n_used = samples.len();
    diag.negative_weight_fraction = Some(
        samples.iter().filter(|s| s.weight < 0.0).count() as f64 / samples.len().max(1) as f64,
    );
    let scale = samples
        .iter()
        .map(|s| s.weight.abs())
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return Err(Error::AllWeightsZero);
    }
    let normalized: Vec<WeightedSample> = samples
        .iter()
        .map(|s| WeightedSample {
            history: s.history.clone(),
            action: s.action,
            weight: s.weight / scale,
        })
        .collect();
    let base = config.solver_config(kernel, 1.0);
    let selection = cross_validate_cost(&normalized, &base, config.cost_folds, &config.cost_grid)?;
    diag.selected_cost = Some(selection.cost);
    diag.cost_cv_scores = selection.scores;
    let fit = fit_weighted_svm(
        &normalized,
        &SolverConfig {
            cost: selection.cost,
            ..base
        },
    )?;
    diag.support_vectors = Some(fit.n_support);
    diag.solver_converged = Some(fit.converged);
    diag.constant_label = fit.single_class;
    Ok(fit.rule)
}

/// Lasso with an internally constructed penalty path and cross-validated
/// selection; the workhorse for every regression in the pipelines.
pub(crate) fn lasso_cv_fit(
    x: &DesignMatrix,
    y: &[f64],
    config: &LearnerConfig,
) -> Result<LassoFit> {
    let grid = lambda_grid(x, y, config.lasso_grid_len, config.lasso_min_ratio)?;
    fit_lasso_cv(x, y, config.lasso_folds, &grid)
}

/// Design matrix whose columns are the history coordinates.
pub(crate) fn history_design(histories: &[HistoryVector]) -> Result<DesignMatrix> {
    let n = histories.len();
    let dim = histories.first().map(|h| h.values.len()).unwrap_or(0);
    let mut cols = vec![Vec::with_capacity(n); dim];
    for h in histories {
        for (j, v) in h.values.iter().enumerate() {
            cols[j].push(*v);
        }
    }
    let mut m = DesignMatrix::new(n);
    for c in cols {
        m.push_column(c)?;
    }
    Ok(m)
}
