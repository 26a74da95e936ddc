//! Q-learning: backward-induction regression with the treatment contrast as
//! the decision rule.

use crate::error::Result;
use crate::model::{dataset_shape, Regimen, Trajectory};

use super::{eligible_indices, q_rule, FitReport, LearnerConfig, QChain, StageDiagnostics};

/// Fits the backward regression chain and reads each stage's rule off the
/// fitted treatment contrast (ties decide `+1`).
pub fn fit_qlearning(data: &[Trajectory], config: &LearnerConfig) -> Result<FitReport> {
    let shape = dataset_shape(data)?;
    let chain = QChain::fit(data, config, &shape, 1)?;
    let mut stages = Vec::with_capacity(shape.n_stages);
    let mut rules = Vec::with_capacity(shape.n_stages);
    for k in 1..=shape.n_stages {
        let mut diag = StageDiagnostics::new(k);
        let eligible = eligible_indices(data, k);
        diag.n_eligible = eligible.len();
        diag.n_used = eligible.len();
        diag.selected_lambda_qfn = chain.lambda(k);
        stages.push(diag);
        rules.push(q_rule(chain.fit_at(k).expect("all stages fitted")));
    }
    Ok(FitReport {
        regimen: Regimen {
            rules,
            scheme: config.scheme.clone(),
            feature_dims: shape.feature_dims,
        },
        stages,
    })
}
