//! Cost-parameter cross validation for the stage solver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::decide;
use crate::wsvm::{fit_weighted_svm, SolverConfig, WeightedSample};

/// Mean held-out score of one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostScore {
    pub cost: f64,
    pub score: f64,
}

/// Selected cost plus the full grid diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct CostSelection {
    pub cost: f64,
    pub scores: Vec<CostScore>,
}

/// Selects the cost parameter by k-fold cross validation. Each candidate is
/// scored by the held-out weighted value of the induced rule,
/// `mean_i [ w_i * 1(a_i = rule(h_i)) ]` with the stage's working weights.
/// The maximizing cost wins; ties go to the smaller cost.
///
/// Folds are assigned round-robin by sample index, so the split is
/// deterministic. A fold whose training part cannot be fitted (for instance
/// all weights zero) is scored with the constant `+1` rule.
pub fn cross_validate_cost(
    samples: &[WeightedSample],
    base: &SolverConfig,
    folds: usize,
    grid: &[f64],
) -> Result<CostSelection> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|c| !c.is_finite() || *c <= 0.0) {
        return Err(Error::InvalidConfig(
            "cost grid entries must be positive reals".into(),
        ));
    }
    let mut ordered = grid.to_vec();
    ordered.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if ordered.len() == 1 {
        return Ok(CostSelection {
            cost: ordered[0],
            scores: Vec::new(),
        });
    }
    let n = samples.len();
    if folds < 2 || n < folds {
        return Err(Error::DegenerateFolds { folds, rows: n });
    }

    let assignments: Vec<Vec<usize>> = (0..folds)
        .map(|f| (0..n).filter(|i| i % folds == f).collect())
        .collect();
    let scores: Vec<CostScore> = ordered
        .par_iter()
        .map(|&cost| {
            let config = SolverConfig {
                cost,
                ..base.clone()
            };
            let mut total = 0.0;
            for (fold, held) in assignments.iter().enumerate() {
                let train: Vec<WeightedSample> = (0..n)
                    .filter(|i| i % folds != fold)
                    .map(|i| samples[i].clone())
                    .collect();
                let rule = fit_weighted_svm(&train, &config).map(|fit| fit.rule);
                let mut fold_score = 0.0;
                for &i in held {
                    let agrees = match &rule {
                        Ok(r) => decide(r, &samples[i].history)? == samples[i].action,
                        Err(_) => samples[i].action == 1,
                    };
                    if agrees {
                        fold_score += samples[i].weight;
                    }
                }
                total += fold_score / held.len() as f64;
            }
            Ok(CostScore {
                cost,
                score: total / folds as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (g, s) in scores.iter().enumerate() {
        if s.score > scores[best].score {
            best = g;
        }
    }
    Ok(CostSelection {
        cost: scores[best].cost,
        scores,
    })
}
