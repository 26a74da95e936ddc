//! Stage design matrices for the Q-function regressions: rows carry
//! `(H_k, A_k, A_k * H_k)` in that fixed column order, identical between
//! fitting and predict-with-either-action calls.

use crate::error::Result;
use crate::lasso::{DesignMatrix, LassoFit};
use crate::model::{DecisionRule, HistoryVector};

/// Builds the regression design with columns `h_1..h_d, a, a*h_1..a*h_d`.
pub(crate) fn q_design(histories: &[&HistoryVector], actions: &[f64]) -> Result<DesignMatrix> {
    let n = histories.len();
    let dim = histories.first().map(|h| h.values.len()).unwrap_or(0);
    let mut m = DesignMatrix::new(n);
    for j in 0..dim {
        m.push_column(histories.iter().map(|h| h.values[j]).collect())?;
    }
    m.push_column(actions.to_vec())?;
    for j in 0..dim {
        m.push_column(
            histories
                .iter()
                .zip(actions)
                .map(|(h, a)| a * h.values[j])
                .collect(),
        )?;
    }
    Ok(m)
}

fn split_coefficients(fit: &LassoFit) -> (&[f64], f64, &[f64]) {
    let p = fit.coefficients.len();
    debug_assert!(p % 2 == 1, "q design has 2d+1 columns");
    let d = p / 2;
    (
        &fit.coefficients[..d],
        fit.coefficients[d],
        &fit.coefficients[d + 1..],
    )
}

/// The fitted treatment contrast as a decision rule: the better action is the
/// sign of `theta_a + theta_ah . h` (ties to +1).
pub(crate) fn q_rule(fit: &LassoFit) -> DecisionRule {
    let (_, theta_a, theta_ah) = split_coefficients(fit);
    DecisionRule::Linear {
        bias: theta_a,
        coefficients: theta_ah.to_vec(),
    }
}

/// Predicted value under the better of the two actions:
/// `b0 + theta_h . h + |theta_a + theta_ah . h|`.
pub(crate) fn q_value_max(fit: &LassoFit, h: &HistoryVector) -> f64 {
    let (theta_h, theta_a, theta_ah) = split_coefficients(fit);
    let main: f64 = theta_h.iter().zip(&h.values).map(|(c, v)| c * v).sum();
    let contrast: f64 = theta_a
        + theta_ah
            .iter()
            .zip(&h.values)
            .map(|(c, v)| c * v)
            .sum::<f64>();
    fit.intercept + main + contrast.abs()
}
