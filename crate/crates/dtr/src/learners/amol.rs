//! Augmented multistage outcome-weighted learning.
//!
//! The last stage is improved single-stage O-learning: recentre the stage
//! reward by a regression on the history and solve the weighted margin
//! problem with the label-flip transform. Earlier stages replace the raw
//! future rewards with doubly robust pseudo-outcomes built from the
//! already-fitted later rules and the Q-function imputation chain, then
//! recentre and solve in the same way. Negative recentred weights are kept
//! via the label flip, never dropped.

use crate::error::{Error, Result};
use crate::lasso::predict;
use crate::model::{build_history, dataset_shape, DecisionRule, Regimen, Trajectory};
use crate::wsvm::WeightedSample;

use super::pseudo::{augmented_pseudo_outcome, PseudoOutcomeVariant};
use super::{
    eligible_indices, fit_stage_rule, history_design, lasso_cv_fit, FitReport, LearnerConfig,
    QChain, StageDiagnostics,
};

/// Simple AMOL: one augmentation term per subject per stage, driven by the
/// all-future-stages compliance indicator.
pub fn fit_amol_simple(data: &[Trajectory], config: &LearnerConfig) -> Result<FitReport> {
    fit_amol(data, config, PseudoOutcomeVariant::Simple)
}

/// Efficient AMOL: per-stage augmentation terms following the
/// monotone-missingness construction.
pub fn fit_amol_efficient(data: &[Trajectory], config: &LearnerConfig) -> Result<FitReport> {
    fit_amol(data, config, PseudoOutcomeVariant::Efficient)
}

fn fit_amol(
    data: &[Trajectory],
    config: &LearnerConfig,
    variant: PseudoOutcomeVariant,
) -> Result<FitReport> {
    let shape = dataset_shape(data)?;
    let n_stages = shape.n_stages;
    // imputation models are needed for stages 2..=K only
    let chain = QChain::fit(data, config, &shape, 2.min(n_stages + 1))?;
    let mut rules: Vec<Option<DecisionRule>> = vec![None; n_stages];
    let mut stages: Vec<StageDiagnostics> = (1..=n_stages).map(StageDiagnostics::new).collect();
    for k in 2..=n_stages {
        stages[k - 1].selected_lambda_qfn = chain.lambda(k);
    }

    // last stage: recentre the stage reward on the history
    {
        let k = n_stages;
        let eligible = eligible_indices(data, k);
        stages[k - 1].n_eligible = eligible.len();
        if eligible.is_empty() {
            return Err(Error::DegenerateStage { stage: k });
        }
        let targets: Vec<f64> = eligible.iter().map(|&i| data[i].stage(k).reward).collect();
        let samples = recentred_samples(data, &eligible, k, &targets, config, &mut stages[k - 1])?;
        rules[k - 1] = Some(fit_stage_rule(&samples, config, &mut stages[k - 1])?);
    }

    // backward: stage k pseudo-outcomes feed the stage k-1 fit
    for k in (2..=n_stages).rev() {
        let target_stage = k - 1;
        let eligible = eligible_indices(data, target_stage);
        stages[target_stage - 1].n_eligible = eligible.len();
        if eligible.is_empty() {
            return Err(Error::DegenerateStage {
                stage: target_stage,
            });
        }
        let future_rules: Vec<DecisionRule> = (k..=n_stages)
            .map(|j| rules[j - 1].clone().expect("later stages already fitted"))
            .collect();
        // imputed value from stage k given information through stage j: the
        // stage-j model prediction plus the rewards already realized
        let m_hat = |j: usize, traj: &Trajectory| {
            let mut v = chain.g_value(traj, j)?;
            for s in k..j {
                v += traj.stage(s).reward;
            }
            Ok(v)
        };
        let mut targets = Vec::with_capacity(eligible.len());
        for &i in &eligible {
            let pseudo = augmented_pseudo_outcome(
                &data[i],
                k,
                &future_rules,
                &config.scheme,
                &m_hat,
                variant,
                config.literal_stage_boundary,
            )?;
            targets.push(data[i].stage(target_stage).reward + pseudo.value);
        }
        let samples = recentred_samples(
            data,
            &eligible,
            target_stage,
            &targets,
            config,
            &mut stages[target_stage - 1],
        )?;
        rules[target_stage - 1] = Some(fit_stage_rule(
            &samples,
            config,
            &mut stages[target_stage - 1],
        )?);
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

/// Regresses the stage targets on the stage histories, then forms weighted
/// samples `(H_k, A_k, (target - s_hat(H_k)) / pi_k)`.
fn recentred_samples(
    data: &[Trajectory],
    eligible: &[usize],
    k: usize,
    targets: &[f64],
    config: &LearnerConfig,
    diag: &mut StageDiagnostics,
) -> Result<Vec<WeightedSample>> {
    let histories: Vec<_> = eligible
        .iter()
        .map(|&i| build_history(&data[i], k, &config.scheme))
        .collect::<Result<Vec<_>>>()?;
    let design = history_design(&histories)?;
    let recentre = lasso_cv_fit(&design, targets, config)?;
    diag.selected_lambda_recentre = Some(recentre.lambda);
    let centred = predict(&recentre, &design)?;
    Ok(eligible
        .iter()
        .zip(histories)
        .zip(targets.iter().zip(&centred))
        .map(|((&i, history), (target, s_hat))| WeightedSample {
            history,
            action: data[i].stage(k).action,
            weight: (target - s_hat) / data[i].stage(k).propensity,
        })
        .collect())
}
