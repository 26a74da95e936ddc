//! Penalized linear regression by cyclic coordinate descent, used for the
//! Q-function regressions and the weight-recentring fits.
//!
//! The objective is `(1/2n) ||y - b0 - X b||^2 + lambda ||b||_1` with an
//! unpenalized intercept. Columns are standardized internally (lasso is
//! scale-sensitive) and coefficients are returned on the original scale.
//! Constant columns are excluded from penalization and carry coefficient 0.

use crate::error::{Error, Result};

/// Dense design matrix stored by columns.
#[derive(Clone, Debug)]
pub struct DesignMatrix {
    n_rows: usize,
    columns: Vec<Vec<f64>>,
}

impl DesignMatrix {
    pub fn new(n_rows: usize) -> Self {
        DesignMatrix {
            n_rows,
            columns: Vec::new(),
        }
    }

    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let n_rows = columns.first().map(|c| c.len()).unwrap_or(0);
        let mut m = DesignMatrix::new(n_rows);
        for c in columns {
            m.push_column(c)?;
        }
        Ok(m)
    }

    pub fn push_column(&mut self, column: Vec<f64>) -> Result<()> {
        if column.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                context: "design matrix column".into(),
                expected: self.n_rows,
                got: column.len(),
            });
        }
        self.columns.push(column);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }
}

/// A fitted lasso regression.
#[derive(Clone, Debug)]
pub struct LassoFit {
    pub intercept: f64,
    /// Coefficients on the original column scale.
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub column_means: Vec<f64>,
    /// Population standard deviation per column; 0 marks a constant column
    /// that was dropped from penalization.
    pub column_scales: Vec<f64>,
}

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

struct Standardized {
    columns: Vec<Vec<f64>>,
    means: Vec<f64>,
    scales: Vec<f64>,
}

fn standardize(x: &DesignMatrix) -> Standardized {
    let n = x.n_rows() as f64;
    let mut columns = Vec::with_capacity(x.n_cols());
    let mut means = Vec::with_capacity(x.n_cols());
    let mut scales = Vec::with_capacity(x.n_cols());
    for j in 0..x.n_cols() {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let scale = var.sqrt();
        if scale <= 1e-12 * (1.0 + mean.abs()) {
            // constant column: dropped from the penalized fit
            means.push(mean);
            scales.push(0.0);
            columns.push(vec![0.0; col.len()]);
        } else {
            means.push(mean);
            scales.push(scale);
            columns.push(col.iter().map(|v| (v - mean) / scale).collect());
        }
    }
    Standardized {
        columns,
        means,
        scales,
    }
}

const CD_REL_TOL: f64 = 1e-8;
const CD_MAX_SWEEPS: usize = 100_000;

/// Cyclic coordinate descent on standardized columns. `theta` is both the
/// warm start and the output; returns the per-sweep objective values.
fn cd_solve(std_cols: &[Vec<f64>], yc: &[f64], lambda: f64, theta: &mut [f64]) -> Vec<f64> {
    let n = yc.len() as f64;
    let mut residual = yc.to_vec();
    for (j, col) in std_cols.iter().enumerate() {
        if theta[j] != 0.0 {
            for (r, v) in residual.iter_mut().zip(col) {
                *r -= theta[j] * v;
            }
        }
    }
    let objective = |residual: &[f64], theta: &[f64]| -> f64 {
        residual.iter().map(|r| r * r).sum::<f64>() / (2.0 * n)
            + lambda * theta.iter().map(|t| t.abs()).sum::<f64>()
    };
    let mut trace = vec![objective(&residual, theta)];
    for _ in 0..CD_MAX_SWEEPS {
        for (j, col) in std_cols.iter().enumerate() {
            // standardized columns have unit mean square, so the coordinate
            // minimizer is a single soft threshold
            let rho = theta[j] + col.iter().zip(&residual).map(|(x, r)| x * r).sum::<f64>() / n;
            let new = soft_threshold(rho, lambda);
            if new != theta[j] {
                let delta = new - theta[j];
                for (r, v) in residual.iter_mut().zip(col) {
                    *r -= delta * v;
                }
                theta[j] = new;
            }
        }
        let obj = objective(&residual, theta);
        let prev = *trace.last().unwrap();
        trace.push(obj);
        if prev - obj <= CD_REL_TOL * prev.abs() {
            break;
        }
    }
    trace
}

fn validate_inputs(x: &DesignMatrix, y: &[f64]) -> Result<()> {
    if x.n_rows() == 0 || y.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "lasso response".into(),
            expected: x.n_rows(),
            got: y.len(),
        });
    }
    if x.n_rows() < 2 {
        return Err(Error::RaggedDataset("lasso needs at least 2 rows".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "lasso response".into(),
        });
    }
    for j in 0..x.n_cols() {
        if x.column(j).iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("lasso design column {j}"),
            });
        }
    }
    Ok(())
}

/// Fits the lasso at a single penalty value.
pub fn fit_lasso(x: &DesignMatrix, y: &[f64], lambda: f64) -> Result<LassoFit> {
    validate_inputs(x, y)?;
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "lambda must be a nonnegative real, got {lambda}"
        )));
    }
    let std = standardize(x);
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let mut theta = vec![0.0; x.n_cols()];
    cd_solve(&std.columns, &yc, lambda, &mut theta);
    Ok(back_transform(theta, &std, y_mean, lambda))
}

fn back_transform(theta: Vec<f64>, std: &Standardized, y_mean: f64, lambda: f64) -> LassoFit {
    let coefficients: Vec<f64> = theta
        .iter()
        .zip(&std.scales)
        .map(|(t, s)| if *s > 0.0 { t / s } else { 0.0 })
        .collect();
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&std.means)
            .map(|(c, m)| c * m)
            .sum::<f64>();
    LassoFit {
        intercept,
        coefficients,
        lambda,
        column_means: std.means.clone(),
        column_scales: std.scales.clone(),
    }
}

/// Predicts `b0 + X b`.
pub fn predict(fit: &LassoFit, x: &DesignMatrix) -> Result<Vec<f64>> {
    if x.n_cols() != fit.coefficients.len() {
        return Err(Error::DimensionMismatch {
            context: "lasso predict".into(),
            expected: fit.coefficients.len(),
            got: x.n_cols(),
        });
    }
    let mut out = vec![fit.intercept; x.n_rows()];
    for (j, c) in fit.coefficients.iter().enumerate() {
        if *c != 0.0 {
            for (o, v) in out.iter_mut().zip(x.column(j)) {
                *o += c * v;
            }
        }
    }
    Ok(out)
}

/// Largest penalty with an all-zero solution,
/// `max_j |x_j' (y - mean(y))| / n` over standardized columns.
pub fn lambda_max(x: &DesignMatrix, y: &[f64]) -> Result<f64> {
    validate_inputs(x, y)?;
    let std = standardize(x);
    let n = y.len() as f64;
    let y_mean = y.iter().sum::<f64>() / n;
    let mut max = 0.0f64;
    for col in &std.columns {
        let dot: f64 = col.iter().zip(y).map(|(v, yi)| v * (yi - y_mean)).sum();
        max = max.max((dot / n).abs());
    }
    Ok(max)
}

/// Descending log-spaced penalty grid from `lambda_max` down to
/// `min_ratio * lambda_max`.
pub fn lambda_grid(x: &DesignMatrix, y: &[f64], len: usize, min_ratio: f64) -> Result<Vec<f64>> {
    if len == 0 {
        return Err(Error::EmptyGrid);
    }
    let top = lambda_max(x, y)?.max(1e-12);
    if len == 1 {
        return Ok(vec![top]);
    }
    let grid = (0..len)
        .map(|i| top * min_ratio.powf(i as f64 / (len - 1) as f64))
        .collect();
    Ok(grid)
}

fn fold_of(i: usize, folds: usize) -> usize {
    i % folds
}

/// Selects the penalty minimizing mean held-out squared error over
/// deterministic round-robin folds; ties go to the larger penalty.
pub fn select_lambda_cv(x: &DesignMatrix, y: &[f64], folds: usize, grid: &[f64]) -> Result<f64> {
    validate_inputs(x, y)?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::InvalidConfig(
            "negative or non-finite lambda in grid".into(),
        ));
    }
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let n = x.n_rows();
    if folds < 2 || folds > n || n - n.div_ceil(folds) < 2 {
        return Err(Error::DegenerateFolds { folds, rows: n });
    }
    let mut ordered: Vec<f64> = grid.to_vec();
    ordered.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut sse = vec![0.0f64; ordered.len()];
    for fold in 0..folds {
        let train_idx: Vec<usize> = (0..n).filter(|i| fold_of(*i, folds) != fold).collect();
        let held_idx: Vec<usize> = (0..n).filter(|i| fold_of(*i, folds) == fold).collect();
        let train_cols: Vec<Vec<f64>> = (0..x.n_cols())
            .map(|j| train_idx.iter().map(|&i| x.column(j)[i]).collect())
            .collect();
        let train_x = DesignMatrix::from_columns(train_cols)?;
        let train_y: Vec<f64> = train_idx.iter().map(|&i| y[i]).collect();

        let std = standardize(&train_x);
        let y_mean = train_y.iter().sum::<f64>() / train_y.len() as f64;
        let yc: Vec<f64> = train_y.iter().map(|v| v - y_mean).collect();
        let mut theta = vec![0.0; x.n_cols()];
        for (g, lambda) in ordered.iter().enumerate() {
            // warm start down the path
            cd_solve(&std.columns, &yc, *lambda, &mut theta);
            let fit = back_transform(theta.clone(), &std, y_mean, *lambda);
            for &i in &held_idx {
                let pred = fit.intercept
                    + fit
                        .coefficients
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c * x.column(j)[i])
                        .sum::<f64>();
                let err = pred - y[i];
                sse[g] += err * err;
            }
        }
    }
    let mut best = 0;
    for g in 1..ordered.len() {
        if sse[g] < sse[best] {
            best = g;
        }
    }
    Ok(ordered[best])
}

/// Cross-validated fit: selects the penalty on `grid`, then refits on all
/// rows.
pub fn fit_lasso_cv(x: &DesignMatrix, y: &[f64], folds: usize, grid: &[f64]) -> Result<LassoFit> {
    let lambda = select_lambda_cv(x, y, folds, grid)?;
    fit_lasso(x, y, lambda)
}
