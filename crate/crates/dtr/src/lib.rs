//! Estimation of optimal dynamic treatment regimes (DTRs) from sequential
//! randomized trial data.
//!
//! A DTR is a sequence of per-stage decision rules mapping a patient's
//! accumulated history to a treatment in `{-1, +1}`. This crate fits such
//! regimes from trajectories collected under known randomization
//! probabilities, using four estimators:
//!
//! * **Q-learning** — backward-induction lasso regression of
//!   (reward + estimated future optimum) on history, treatment, and their
//!   interactions.
//! * **O-learning** — backward outcome-weighted learning: value maximization
//!   cast as a weighted large-margin classification problem, restricted at
//!   each stage to subjects who followed the estimated optimal rules
//!   afterwards.
//! * **AMOL** (simple and efficient variants) — augmented multistage
//!   outcome-weighted learning: O-learning with recentred weights and doubly
//!   robust pseudo-outcomes that impute the future value of non-compliant
//!   subjects from the Q-learning regressions.
//!
//! The crate also ships the weighted large-margin solver, the penalized
//! regression routines, inverse-probability-weighted value estimation, and a
//! replicated simulation benchmark harness with two built-in four-stage
//! scenario generators.

pub mod error;
pub mod kernel;
pub mod lasso;
pub mod learners;
pub mod model;
pub mod sim;
pub mod value;
pub mod wsvm;

pub use error::{Error, Result};
pub use kernel::{gram, kernel_eval, median_pairwise_distance, Gram, KernelSpec};
pub use lasso::{fit_lasso, lambda_grid, select_lambda_cv, DesignMatrix, LassoFit};
pub use learners::{
    augmented_pseudo_outcome, cross_validate_cost, fit_amol_efficient, fit_amol_simple, fit_method,
    fit_olearning, fit_qlearning, FitReport, KernelChoice, LearnerConfig, Method, PseudoOutcome,
    PseudoOutcomeVariant, StageDiagnostics,
};
pub use model::{
    build_history, dataset_shape, decide, decision_value, sign_pos, DatasetShape, DecisionRule,
    HistoryScheme, HistoryVector, Regimen, StageObservation, Trajectory,
};
pub use sim::{
    derive_seed, gen_setting1, gen_setting2, generate, rollout_value, run_benchmark,
    BenchmarkReport, MethodSummary, Population, ReplicateRecord, RolloutPolicy, ScenarioSpec,
    SettingKind,
};
pub use value::{estimate_value, stage_value, true_value_mc, ValueEstimate};
pub use wsvm::{check_kkt, fit_weighted_svm, DualSolution, SolverConfig, WeightedSample, WsvmFit};
