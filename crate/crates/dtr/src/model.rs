//! Domain types: per-stage observations, trajectories, history vectors,
//! decision rules, and fitted regimens.
//!
//! Stage indices are 1-based everywhere in the public API (`k` in `1..=K`),
//! matching the usual trial notation; internal storage is 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_eval_unchecked, KernelSpec};

/// `sign` with the fixed tie-break `sign(0) = +1`, used for rule decisions
/// and weight signs so results are reproducible bit for bit.
#[inline]
pub fn sign_pos(v: f64) -> i8 {
    if v < 0.0 {
        -1
    } else {
        1
    }
}

/// One stage of one subject's record: covariates observed just before the
/// treatment decision, the assigned treatment, the post-treatment reward, and
/// the randomization probability of the treatment actually received.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageObservation {
    pub features: Vec<f64>,
    pub action: i8,
    pub reward: f64,
    pub propensity: f64,
}

/// A subject's complete K-stage record.
///
/// `eligible[k-1]` records whether the subject was randomized at stage `k`.
/// An ineligible stage (e.g. a responder who simply continues the current
/// treatment) is treated everywhere as trivially optimal: the follow-the-rule
/// indicator is 1 and the effective propensity is 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub stages: Vec<StageObservation>,
    pub eligible: Vec<bool>,
}

impl Trajectory {
    pub fn new(stages: Vec<StageObservation>, eligible: Vec<bool>) -> Result<Self> {
        let t = Trajectory { stages, eligible };
        t.validate()?;
        Ok(t)
    }

    /// Trajectory with every stage randomized.
    pub fn all_eligible(stages: Vec<StageObservation>) -> Result<Self> {
        let n = stages.len();
        Self::new(stages, vec![true; n])
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn is_eligible(&self, k: usize) -> bool {
        self.eligible[k - 1]
    }

    pub fn stage(&self, k: usize) -> &StageObservation {
        &self.stages[k - 1]
    }

    /// Propensity of the action actually received; 1 at ineligible stages.
    pub fn effective_propensity(&self, k: usize) -> f64 {
        if self.is_eligible(k) {
            self.stage(k).propensity
        } else {
            1.0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if self.eligible.len() != self.stages.len() {
            return Err(Error::DimensionMismatch {
                context: "eligibility vector".into(),
                expected: self.stages.len(),
                got: self.eligible.len(),
            });
        }
        for (idx, s) in self.stages.iter().enumerate() {
            let k = idx + 1;
            if s.action != 1 && s.action != -1 {
                return Err(Error::InvalidAction {
                    value: s.action as f64,
                    context: format!("stage {k}"),
                });
            }
            if !s.reward.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("reward at stage {k}"),
                });
            }
            if s.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("features at stage {k}"),
                });
            }
            if self.eligible[idx] && !(s.propensity > 0.0 && s.propensity < 1.0) {
                return Err(Error::InvalidPropensity {
                    value: s.propensity,
                    context: format!("stage {k}"),
                });
            }
        }
        Ok(())
    }
}

/// Common shape of a dataset: number of stages and per-stage feature
/// dimensions, identical across trajectories.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetShape {
    pub n_stages: usize,
    pub feature_dims: Vec<usize>,
}

/// Validates every trajectory and that all of them agree on the number of
/// stages and per-stage feature dimensions.
pub fn dataset_shape(data: &[Trajectory]) -> Result<DatasetShape> {
    let first = data.first().ok_or(Error::EmptyDataset)?;
    first.validate()?;
    let shape = DatasetShape {
        n_stages: first.n_stages(),
        feature_dims: first.stages.iter().map(|s| s.features.len()).collect(),
    };
    for (i, t) in data.iter().enumerate().skip(1) {
        t.validate()?;
        if t.n_stages() != shape.n_stages {
            return Err(Error::RaggedDataset(format!(
                "subject {i} has {} stages, expected {}",
                t.n_stages(),
                shape.n_stages
            )));
        }
        for (idx, s) in t.stages.iter().enumerate() {
            if s.features.len() != shape.feature_dims[idx] {
                return Err(Error::RaggedDataset(format!(
                    "subject {i} has {} features at stage {}, expected {}",
                    s.features.len(),
                    idx + 1,
                    shape.feature_dims[idx]
                )));
            }
        }
    }
    Ok(shape)
}

/// How history vectors are assembled from a trajectory prefix.
///
/// The layout is fixed: stage-`k` history is the concatenation of all
/// features observed so far `(X_1, ..., X_k)`, prior actions
/// `(A_1, ..., A_{k-1})`, prior rewards `(R_1, ..., R_{k-1})`, and — when
/// `interactions` is set — prior action-by-feature products
/// `(A_1 X_1, ..., A_{k-1} X_{k-1})`, in that order. The scheme is stored
/// with a fitted regimen so evaluation reconstructs histories exactly as at
/// training time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryScheme {
    pub interactions: bool,
}

impl Default for HistoryScheme {
    fn default() -> Self {
        HistoryScheme { interactions: true }
    }
}

impl HistoryScheme {
    /// Closed-form history length for stage `k` given per-stage feature
    /// dimensions.
    pub fn history_len(&self, k: usize, feature_dims: &[usize]) -> usize {
        let feats: usize = feature_dims[..k].iter().sum();
        let prior_feats: usize = feature_dims[..k - 1].iter().sum();
        let mut len = feats + 2 * (k - 1);
        if self.interactions {
            len += prior_feats;
        }
        len
    }
}

/// A stage-`k` history vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryVector {
    pub values: Vec<f64>,
    pub stage: usize,
}

/// Builds the stage-`k` history vector for a trajectory. Deterministic in the
/// trajectory prefix: identical prefixes yield identical histories.
pub fn build_history(traj: &Trajectory, k: usize, scheme: &HistoryScheme) -> Result<HistoryVector> {
    if k == 0 || k > traj.n_stages() {
        return Err(Error::StageOutOfRange {
            stage: k,
            n_stages: traj.n_stages(),
        });
    }
    let features: Vec<&[f64]> = traj.stages[..k]
        .iter()
        .map(|s| s.features.as_slice())
        .collect();
    let actions: Vec<i8> = traj.stages[..k - 1].iter().map(|s| s.action).collect();
    let rewards: Vec<f64> = traj.stages[..k - 1].iter().map(|s| s.reward).collect();
    Ok(build_history_parts(
        &features, &actions, &rewards, k, scheme,
    ))
}

/// History construction from raw parts; used by counterfactual rollouts where
/// no full `Trajectory` exists yet. `features` covers stages `1..=k`,
/// `actions` and `rewards` cover stages `1..=k-1`.
pub(crate) fn build_history_parts(
    features: &[&[f64]],
    actions: &[i8],
    rewards: &[f64],
    k: usize,
    scheme: &HistoryScheme,
) -> HistoryVector {
    debug_assert_eq!(features.len(), k);
    debug_assert_eq!(actions.len(), k - 1);
    debug_assert_eq!(rewards.len(), k - 1);
    let mut values = Vec::new();
    for f in features {
        values.extend_from_slice(f);
    }
    values.extend(actions.iter().map(|&a| a as f64));
    values.extend_from_slice(rewards);
    if scheme.interactions {
        for (j, f) in features[..k - 1].iter().enumerate() {
            let a = actions[j] as f64;
            values.extend(f.iter().map(|x| a * x));
        }
    }
    HistoryVector { values, stage: k }
}

/// A per-stage decision function. The treatment decision is
/// `sign(f(h))` with `sign(0) = +1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionRule {
    Linear {
        bias: f64,
        coefficients: Vec<f64>,
    },
    /// Kernel expansion `f(h) = sum_i m_i K(h_i, h) + bias` over support
    /// histories, with `m_i` the signed dual multipliers.
    Kernel {
        bias: f64,
        kernel: KernelSpec,
        support_histories: Vec<HistoryVector>,
        dual_multipliers: Vec<f64>,
    },
}

/// Raw decision value `f(h)`.
pub fn decision_value(rule: &DecisionRule, h: &HistoryVector) -> Result<f64> {
    match rule {
        DecisionRule::Linear { bias, coefficients } => {
            if coefficients.len() != h.values.len() {
                return Err(Error::DimensionMismatch {
                    context: "linear rule".into(),
                    expected: coefficients.len(),
                    got: h.values.len(),
                });
            }
            Ok(bias
                + coefficients
                    .iter()
                    .zip(&h.values)
                    .map(|(c, v)| c * v)
                    .sum::<f64>())
        }
        DecisionRule::Kernel {
            bias,
            kernel,
            support_histories,
            dual_multipliers,
        } => {
            if support_histories.len() != dual_multipliers.len() {
                return Err(Error::DimensionMismatch {
                    context: "kernel rule multipliers".into(),
                    expected: support_histories.len(),
                    got: dual_multipliers.len(),
                });
            }
            let mut f = *bias;
            for (s, m) in support_histories.iter().zip(dual_multipliers) {
                if s.values.len() != h.values.len() {
                    return Err(Error::DimensionMismatch {
                        context: "kernel rule support point".into(),
                        expected: s.values.len(),
                        got: h.values.len(),
                    });
                }
                f += m * kernel_eval_unchecked(kernel, &s.values, &h.values);
            }
            Ok(f)
        }
    }
}

/// Treatment decision `sign(f(h))`, with `sign(0) = +1`.
pub fn decide(rule: &DecisionRule, h: &HistoryVector) -> Result<i8> {
    Ok(sign_pos(decision_value(rule, h)?))
}

const REGIMEN_VERSION: u32 = 1;

/// A fitted dynamic treatment regime: one decision rule per stage, together
/// with the history scheme and feature dimensions it was trained under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regimen {
    pub rules: Vec<DecisionRule>,
    pub scheme: HistoryScheme,
    pub feature_dims: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RegimenDocument {
    version: u32,
    #[serde(flatten)]
    regimen: Regimen,
}

impl Regimen {
    pub fn n_stages(&self) -> usize {
        self.rules.len()
    }

    /// Builds the stage-`k` history under the stored scheme and applies the
    /// stage-`k` rule.
    pub fn decide_stage(&self, traj: &Trajectory, k: usize) -> Result<i8> {
        if k == 0 || k > self.rules.len() {
            return Err(Error::StageOutOfRange {
                stage: k,
                n_stages: self.rules.len(),
            });
        }
        let h = build_history(traj, k, &self.scheme)?;
        decide(&self.rules[k - 1], &h)
    }

    /// Versioned JSON document for persistence.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&RegimenDocument {
            version: REGIMEN_VERSION,
            regimen: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RegimenDocument = serde_json::from_str(text)?;
        if doc.version != REGIMEN_VERSION {
            return Err(Error::VersionMismatch {
                found: doc.version,
                expected: REGIMEN_VERSION,
            });
        }
        Ok(doc.regimen)
    }
}
