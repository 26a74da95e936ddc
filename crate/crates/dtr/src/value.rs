//! Empirical and Monte Carlo value estimation for fitted regimens.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dataset_shape, Regimen, Trajectory};
use crate::sim::{rollout_value, RolloutPolicy, SettingKind};

/// Inverse-probability-weighted estimate of a regimen's value on observed
/// data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueEstimate {
    pub value: f64,
    /// Share of subjects whose actions match the regimen at every stage.
    pub matched_fraction: f64,
    pub n: usize,
}

/// Empirical value of a regimen:
/// `mean_i [ prod_k 1(A_k = D_k(H_k)) * sum_k R_k / prod_k pi_k ]`,
/// with ineligible stages counting as matched with propensity one.
pub fn estimate_value(regimen: &Regimen, data: &[Trajectory]) -> Result<ValueEstimate> {
    stage_value(regimen, data, 1)
}

/// The same inverse-probability-weighted form restricted to stages `>= k`;
/// exposed for stagewise diagnostics.
pub fn stage_value(regimen: &Regimen, data: &[Trajectory], k: usize) -> Result<ValueEstimate> {
    let shape = dataset_shape(data)?;
    if regimen.n_stages() != shape.n_stages {
        return Err(Error::DimensionMismatch {
            context: "regimen stages".into(),
            expected: shape.n_stages,
            got: regimen.n_stages(),
        });
    }
    if k == 0 || k > shape.n_stages {
        return Err(Error::StageOutOfRange {
            stage: k,
            n_stages: shape.n_stages,
        });
    }
    let mut total = 0.0;
    let mut matched_count = 0usize;
    for (subject, traj) in data.iter().enumerate() {
        let mut matched = true;
        let mut rewards = 0.0;
        let mut prob = 1.0;
        for j in k..=shape.n_stages {
            rewards += traj.stage(j).reward;
            let p = traj.effective_propensity(j);
            if p <= 0.0 {
                return Err(Error::ZeroPropensity { subject, stage: j });
            }
            prob *= p;
            if matched
                && traj.is_eligible(j)
                && regimen.decide_stage(traj, j)? != traj.stage(j).action
            {
                matched = false;
            }
        }
        if matched {
            total += rewards / prob;
            matched_count += 1;
        }
    }
    let n = data.len();
    Ok(ValueEstimate {
        value: total / n as f64,
        matched_fraction: matched_count as f64 / n as f64,
        n,
    })
}

/// Monte Carlo value of a regimen: mean total reward over `n_test`
/// trajectories generated with every treatment assigned by the regimen.
/// Deterministic given the seed.
pub fn true_value_mc(
    regimen: &Regimen,
    setting: SettingKind,
    n_test: usize,
    seed: u64,
) -> Result<f64> {
    rollout_value(setting, &RolloutPolicy::Regimen(regimen), n_test, seed)
}
