//! Outcome-weighted large-margin solver.
//!
//! Given samples `(h_i, a_i, w_i)` with signed real weights, minimizes the
//! weighted hinge objective
//!
//! ```text
//! (1/2)||f||^2 + C * sum_i xi_i |w_i|,   sign(w_i) a_i f(h_i) >= 1 - xi_i
//! ```
//!
//! via the dual: with transformed labels `l_i = a_i sign(w_i)`, maximize
//! `sum_i alpha_i - (1/2) sum_ij alpha_i l_i K(h_i, h_j) l_j alpha_j` subject
//! to the per-sample box `0 <= alpha_i <= C |w_i|` and, because the decision
//! function carries an intercept, `sum_i alpha_i l_i = 0`.
//!
//! The solver is two-variable coordinate ascent with maximal-violating-pair
//! working-set selection: it needs no external QP machinery and handles the
//! per-sample caps naturally. A single fit is sequential and deterministic;
//! run concurrent fits (CV folds, benchmark replicates) on separate inputs.

use crate::error::{Error, Result};
use crate::kernel::{gram, kernel_eval_unchecked, Gram, KernelSpec};
use crate::model::{sign_pos, DecisionRule, HistoryVector};

/// One solver input: a history, the observed action, and the full signed
/// multiplier (any `1/pi` factor already folded in).
#[derive(Clone, Debug)]
pub struct WeightedSample {
    pub history: HistoryVector,
    pub action: i8,
    pub weight: f64,
}

/// Solver configuration. `cost` is the box-scale parameter `C`; it maps to a
/// ridge penalty `lambda` on `||f||^2` via `C = 1 / (2 n lambda)`.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub cost: f64,
    pub kernel: KernelSpec,
    pub kkt_tolerance: f64,
    pub max_passes: usize,
    /// Record the dual objective after every pair update (instrumentation).
    pub track_objective: bool,
}

impl SolverConfig {
    pub fn new(cost: f64, kernel: KernelSpec) -> Self {
        SolverConfig {
            cost,
            kernel,
            kkt_tolerance: 1e-3,
            max_passes: 100_000,
            track_objective: false,
        }
    }

    fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !self.cost.is_finite() || self.cost <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "cost must be a positive real, got {}",
                self.cost
            )));
        }
        if !self.kkt_tolerance.is_finite() || self.kkt_tolerance <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "kkt_tolerance must be a positive real, got {}",
                self.kkt_tolerance
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig("max_passes must be positive".into()));
        }
        Ok(())
    }
}

/// Solution of the box-constrained dual. `alphas` is aligned with the input
/// samples; entries for dropped zero-weight samples stay 0.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub objective: f64,
}

/// Result of a weighted large-margin fit.
#[derive(Clone, Debug)]
pub struct WsvmFit {
    pub rule: DecisionRule,
    pub solution: DualSolution,
    /// False when the KKT tolerance was not met within `max_passes`; the best
    /// iterate is still returned.
    pub converged: bool,
    /// Set when every transformed label agreed; the rule is then the constant
    /// rule predicting that label and no dual problem was solved.
    pub single_class: Option<i8>,
    pub n_support: usize,
    /// Samples remaining after zero-weight removal.
    pub n_used: usize,
    pub iterations: usize,
    /// Dual objective after every pair update when
    /// `config.track_objective` is set.
    pub objective_trace: Vec<f64>,
}

fn validate_samples(samples: &[WeightedSample]) -> Result<usize> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = samples[0].history.values.len();
    for (i, s) in samples.iter().enumerate() {
        if s.action != 1 && s.action != -1 {
            return Err(Error::InvalidAction {
                value: s.action as f64,
                context: format!("solver sample {i}"),
            });
        }
        if !s.weight.is_finite() {
            return Err(Error::NonFinite {
                context: format!("weight of solver sample {i}"),
            });
        }
        if s.history.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("history of solver sample {i}"),
            });
        }
        if s.history.values.len() != dim {
            return Err(Error::DimensionMismatch {
                context: "solver sample histories".into(),
                expected: dim,
                got: s.history.values.len(),
            });
        }
    }
    Ok(dim)
}

/// Fits the weighted large-margin rule `sign(f)`,
/// `f(h) = sum_i alpha_i l_i K(h_i, h) + bias`.
pub fn fit_weighted_svm(samples: &[WeightedSample], config: &SolverConfig) -> Result<WsvmFit> {
    config.validate()?;
    let dim = validate_samples(samples)?;

    let used: Vec<usize> = (0..samples.len())
        .filter(|&i| samples[i].weight != 0.0)
        .collect();
    if used.is_empty() {
        return Err(Error::AllWeightsZero);
    }

    let labels: Vec<f64> = used
        .iter()
        .map(|&i| (samples[i].action as f64) * (sign_pos(samples[i].weight) as f64))
        .collect();
    let caps: Vec<f64> = used
        .iter()
        .map(|&i| config.cost * samples[i].weight.abs())
        .collect();

    if labels.windows(2).all(|w| w[0] == w[1]) {
        let label = labels[0] as i8;
        return Ok(WsvmFit {
            rule: DecisionRule::Linear {
                bias: label as f64,
                coefficients: vec![0.0; dim],
            },
            solution: DualSolution {
                alphas: vec![0.0; samples.len()],
                bias: label as f64,
                objective: 0.0,
            },
            converged: true,
            single_class: Some(label),
            n_support: 0,
            n_used: used.len(),
            iterations: 0,
            objective_trace: Vec::new(),
        });
    }

    let points: Vec<&[f64]> = used
        .iter()
        .map(|&i| samples[i].history.values.as_slice())
        .collect();
    let g = gram(&config.kernel, &points)?;
    let n = used.len();

    let mut alpha = vec![0.0f64; n];
    // gradient of the (minimization form) dual: grad_i = (Q alpha)_i - 1
    let mut grad = vec![-1.0f64; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut last_up = f64::NEG_INFINITY;
    let mut last_low = f64::INFINITY;

    for _ in 0..config.max_passes {
        // maximal violating pair: the intercept must satisfy
        // up <= bias <= low at optimality, where the bounds run over movable
        // multipliers
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        let (mut i_up, mut j_low) = (usize::MAX, usize::MAX);
        for s in 0..n {
            let v = -labels[s] * grad[s];
            let positive = labels[s] > 0.0;
            let movable_up = (positive && alpha[s] < caps[s]) || (!positive && alpha[s] > 0.0);
            let movable_down = (!positive && alpha[s] < caps[s]) || (positive && alpha[s] > 0.0);
            if movable_up && v > up {
                up = v;
                i_up = s;
            }
            if movable_down && v < low {
                low = v;
                j_low = s;
            }
        }
        last_up = up;
        last_low = low;
        if up - low <= config.kkt_tolerance {
            converged = true;
            break;
        }
        let (i, j) = (i_up, j_low);

        // step along alpha_i += l_i t, alpha_j -= l_j t, which preserves the
        // equality constraint; the unconstrained optimum is (up - low) / eta
        let eta = g.get(i, i) + g.get(j, j) - 2.0 * g.get(i, j);
        let room_i = if labels[i] > 0.0 {
            caps[i] - alpha[i]
        } else {
            alpha[i]
        };
        let room_j = if labels[j] > 0.0 {
            alpha[j]
        } else {
            caps[j] - alpha[j]
        };
        let t_max = room_i.min(room_j);
        let t = if eta > 0.0 {
            ((up - low) / eta).min(t_max)
        } else {
            t_max
        };

        let old_i = alpha[i];
        let old_j = alpha[j];
        alpha[i] = snap(old_i + labels[i] * t, caps[i]);
        alpha[j] = snap(old_j - labels[j] * t, caps[j]);
        let du = labels[i] * (alpha[i] - old_i);
        let dv = labels[j] * (alpha[j] - old_j);
        let (row_i, row_j) = (g.row(i), g.row(j));
        for s in 0..n {
            grad[s] += labels[s] * (row_i[s] * du + row_j[s] * dv);
        }
        iterations += 1;
        if config.track_objective {
            trace.push(dual_objective(&g, &labels, &alpha));
        }
    }

    let free: Vec<usize> = (0..n)
        .filter(|&s| alpha[s] > 0.0 && alpha[s] < caps[s])
        .collect();
    let bias = if !free.is_empty() {
        free.iter().map(|&s| -labels[s] * grad[s]).sum::<f64>() / free.len() as f64
    } else if last_up.is_finite() && last_low.is_finite() {
        0.5 * (last_up + last_low)
    } else if last_up.is_finite() {
        last_up
    } else {
        last_low
    };

    let objective = dual_objective(&g, &labels, &alpha);

    let mut alphas = vec![0.0; samples.len()];
    for (s, &i) in used.iter().enumerate() {
        alphas[i] = alpha[s];
    }

    let support: Vec<usize> = (0..n).filter(|&s| alpha[s] > 0.0).collect();
    let rule = match &config.kernel {
        KernelSpec::Linear => {
            let mut coefficients = vec![0.0; dim];
            for &s in &support {
                let m = alpha[s] * labels[s];
                for (c, v) in coefficients.iter_mut().zip(points[s]) {
                    *c += m * v;
                }
            }
            DecisionRule::Linear { bias, coefficients }
        }
        kernel => DecisionRule::Kernel {
            bias,
            kernel: kernel.clone(),
            support_histories: support
                .iter()
                .map(|&s| samples[used[s]].history.clone())
                .collect(),
            dual_multipliers: support.iter().map(|&s| alpha[s] * labels[s]).collect(),
        },
    };

    Ok(WsvmFit {
        rule,
        solution: DualSolution {
            alphas,
            bias,
            objective,
        },
        converged,
        single_class: None,
        n_support: support.len(),
        n_used: n,
        iterations,
        objective_trace: trace,
    })
}

#[inline]
fn snap(value: f64, cap: f64) -> f64 {
    let v = value.clamp(0.0, cap);
    if v < 1e-12 * cap {
        0.0
    } else if cap - v < 1e-12 * cap {
        cap
    } else {
        v
    }
}

fn dual_objective(g: &Gram, labels: &[f64], alpha: &[f64]) -> f64 {
    let n = labels.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        let row = g.row(i);
        let mut acc = 0.0;
        for j in 0..n {
            if alpha[j] != 0.0 {
                acc += labels[j] * alpha[j] * row[j];
            }
        }
        quad += alpha[i] * labels[i] * acc;
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Maximum violation of the stationarity conditions at a candidate solution:
/// at the lower bound the margin must reach 1, at the cap it must not exceed
/// 1, and free multipliers must sit on the margin exactly.
pub fn check_kkt(
    samples: &[WeightedSample],
    config: &SolverConfig,
    solution: &DualSolution,
) -> Result<f64> {
    config.validate()?;
    validate_samples(samples)?;
    if solution.alphas.len() != samples.len() {
        return Err(Error::DimensionMismatch {
            context: "check_kkt alphas".into(),
            expected: samples.len(),
            got: solution.alphas.len(),
        });
    }
    let labels: Vec<f64> = samples
        .iter()
        .map(|s| (s.action as f64) * (sign_pos(s.weight) as f64))
        .collect();
    let mut max_violation = 0.0f64;
    for i in 0..samples.len() {
        let cap = config.cost * samples[i].weight.abs();
        let alpha = solution.alphas[i];
        // box feasibility is part of the contract
        max_violation = max_violation.max(-alpha).max(alpha - cap);
        let mut f = solution.bias;
        for j in 0..samples.len() {
            if solution.alphas[j] != 0.0 {
                f += solution.alphas[j]
                    * labels[j]
                    * kernel_eval_unchecked(
                        &config.kernel,
                        &samples[j].history.values,
                        &samples[i].history.values,
                    );
            }
        }
        let margin = labels[i] * f;
        let bound_tol = 1e-10 * cap.max(1.0);
        let violation = if alpha <= bound_tol {
            (1.0 - margin).max(0.0)
        } else if alpha >= cap - bound_tol {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        max_violation = max_violation.max(violation);
    }
    Ok(max_violation)
}
