//! Backward outcome-weighted learning.
//!
//! At stage `k` only subjects whose actions match the already-estimated
//! optimal rules at every later stage contribute. Their weights are the
//! future reward sums, shifted so the minimum is exactly zero (the shift
//! constant is otherwise arbitrary), divided by the product of the stage
//! propensities from `k` on.

use crate::error::{Error, Result};
use crate::model::{build_history, dataset_shape, decide, DecisionRule, Regimen, Trajectory};
use crate::wsvm::WeightedSample;

use super::{eligible_indices, fit_stage_rule, FitReport, LearnerConfig, StageDiagnostics};

pub fn fit_olearning(data: &[Trajectory], config: &LearnerConfig) -> Result<FitReport> {
    let shape = dataset_shape(data)?;
    let n_stages = shape.n_stages;
    let mut rules: Vec<Option<DecisionRule>> = vec![None; n_stages];
    let mut stages: Vec<StageDiagnostics> = (1..=n_stages).map(StageDiagnostics::new).collect();

    for k in (1..=n_stages).rev() {
        let eligible = eligible_indices(data, k);
        let diag = &mut stages[k - 1];
        diag.n_eligible = eligible.len();
        if eligible.is_empty() {
            return Err(Error::DegenerateStage { stage: k });
        }

        let mut followers = Vec::with_capacity(eligible.len());
        for &i in &eligible {
            if follows_future(&data[i], k, &rules, config)? {
                followers.push(i);
            }
        }
        if followers.is_empty() {
            return Err(Error::NoFollowers { stage: k });
        }

        let future_sums: Vec<f64> = followers
            .iter()
            .map(|&i| (k..=n_stages).map(|j| data[i].stage(j).reward).sum())
            .collect();
        let shift = future_sums.iter().cloned().fold(f64::INFINITY, f64::min);

        let mut samples = Vec::with_capacity(followers.len());
        for (&i, sum) in followers.iter().zip(&future_sums) {
            let prob: f64 = (k..=n_stages)
                .map(|j| data[i].effective_propensity(j))
                .product();
            samples.push(WeightedSample {
                history: build_history(&data[i], k, &config.scheme)?,
                action: data[i].stage(k).action,
                weight: (sum - shift) / prob,
            });
        }
        rules[k - 1] = Some(fit_stage_rule(&samples, config, diag)?);
    }

    Ok(FitReport {
        regimen: Regimen {
            rules: rules.into_iter().map(Option::unwrap).collect(),
            scheme: config.scheme.clone(),
            feature_dims: shape.feature_dims,
        },
        stages,
    })
}

/// Does this subject follow the estimated rules at every stage after `k`?
/// Ineligible stages count as following.
fn follows_future(
    traj: &Trajectory,
    k: usize,
    rules: &[Option<DecisionRule>],
    config: &LearnerConfig,
) -> Result<bool> {
    for j in (k + 1)..=traj.n_stages() {
        if !traj.is_eligible(j) {
            continue;
        }
        let rule = rules[j - 1].as_ref().expect("later stages already fitted");
        let h = build_history(traj, j, &config.scheme)?;
        if decide(rule, &h)? != traj.stage(j).action {
            return Ok(false);
        }
    }
    Ok(true)
}
