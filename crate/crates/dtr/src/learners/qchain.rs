//! Backward chain of Q-function regressions shared by Q-learning and the
//! AMOL imputation models.
//!
//! At the last stage the response is the stage reward; below it the response
//! is the stage reward plus the next stage's predicted maximal value. Each
//! stage regresses on `(H_k, A_k, A_k H_k)` with a cross-validated lasso over
//! subjects eligible at that stage.

use crate::error::{Error, Result};
use crate::lasso::LassoFit;
use crate::model::{build_history, DatasetShape, Trajectory};

use super::{eligible_indices, lasso_cv_fit, q_design, q_value_max, LearnerConfig};

pub(crate) struct QChain<'a> {
    config: &'a LearnerConfig,
    /// `fits[k-1]` is the stage-k regression; stages below `min_stage` stay
    /// unfitted when only the imputation values are needed.
    fits: Vec<Option<LassoFit>>,
    lambdas: Vec<Option<f64>>,
}

impl<'a> QChain<'a> {
    /// Fits stages `K` down to `min_stage`.
    pub fn fit(
        data: &'a [Trajectory],
        config: &'a LearnerConfig,
        shape: &DatasetShape,
        min_stage: usize,
    ) -> Result<Self> {
        let n_stages = shape.n_stages;
        let mut chain = QChain {
            config,
            fits: vec![None; n_stages],
            lambdas: vec![None; n_stages],
        };
        for k in (min_stage..=n_stages).rev() {
            let eligible = eligible_indices(data, k);
            if eligible.is_empty() {
                return Err(Error::DegenerateStage { stage: k });
            }
            let histories: Vec<_> = eligible
                .iter()
                .map(|&i| build_history(&data[i], k, &config.scheme))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<_> = histories.iter().collect();
            let actions: Vec<f64> = eligible
                .iter()
                .map(|&i| data[i].stage(k).action as f64)
                .collect();
            let mut response = Vec::with_capacity(eligible.len());
            for &i in &eligible {
                let mut y = data[i].stage(k).reward;
                if k < n_stages {
                    y += chain.g_value(&data[i], k + 1)?;
                }
                response.push(y);
            }
            let design = q_design(&refs, &actions)?;
            let fit = lasso_cv_fit(&design, &response, config)?;
            chain.lambdas[k - 1] = Some(fit.lambda);
            chain.fits[k - 1] = Some(fit);
        }
        Ok(chain)
    }

    /// Predicted maximal value at stage `k` for one subject's history.
    pub fn g_value(&self, traj: &Trajectory, k: usize) -> Result<f64> {
        let fit = self.fits[k - 1].as_ref().ok_or(Error::StageOutOfRange {
            stage: k,
            n_stages: self.fits.len(),
        })?;
        let h = build_history(traj, k, &self.config.scheme)?;
        Ok(q_value_max(fit, &h))
    }

    pub fn fit_at(&self, k: usize) -> Option<&LassoFit> {
        self.fits[k - 1].as_ref()
    }

    pub fn lambda(&self, k: usize) -> Option<f64> {
        self.lambdas[k - 1]
    }
}
