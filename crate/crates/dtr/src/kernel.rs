//! Kernel evaluation and Gram-matrix construction for the large-margin solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel used by decision functions and the weighted solver.
///
/// The Gaussian kernel follows the convention
/// `K(x, y) = exp(-||x - y||^2 / (2 sigma^2))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Linear,
    Gaussian { bandwidth: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        if let KernelSpec::Gaussian { bandwidth } = self {
            if !bandwidth.is_finite() || *bandwidth <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "Gaussian bandwidth must be a positive real, got {bandwidth}"
                )));
            }
        }
        Ok(())
    }
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "kernel_eval".into(),
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "kernel_eval input".into(),
        });
    }
    Ok(())
}

/// Evaluates `K(x, y)`.
pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_pair(x, y)?;
    Ok(kernel_eval_unchecked(spec, x, y))
}

pub(crate) fn kernel_eval_unchecked(spec: &KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    match spec {
        KernelSpec::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
        KernelSpec::Gaussian { bandwidth } => {
            let sq: f64 = x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let d = a - b;
                    d * d
                })
                .sum();
            (-sq / (2.0 * bandwidth * bandwidth)).exp()
        }
    }
}

/// Symmetric Gram matrix, stored densely in row-major order.
#[derive(Clone, Debug)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Builds the Gram matrix `G[i][j] = K(x_i, x_j)`.
///
/// Only the upper triangle is evaluated; the lower triangle is mirrored, so
/// the result is symmetric exactly. For the Gaussian kernel the diagonal is
/// set to 1 without evaluation.
pub fn gram(spec: &KernelSpec, points: &[&[f64]]) -> Result<Gram> {
    spec.validate()?;
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let dim = points[0].len();
    for p in points {
        check_pair(points[0], p)?;
        debug_assert_eq!(p.len(), dim);
    }
    let n = points.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = match spec {
            KernelSpec::Gaussian { .. } => 1.0,
            KernelSpec::Linear => kernel_eval_unchecked(spec, points[i], points[i]),
        };
        for j in (i + 1)..n {
            let v = kernel_eval_unchecked(spec, points[i], points[j]);
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(Gram { n, data })
}

/// Median of all pairwise Euclidean distances, the default Gaussian bandwidth
/// at fit time. Returns `None` when there are fewer than two points or every
/// distance is zero.
pub fn median_pairwise_distance(points: &[&[f64]]) -> Option<f64> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let sq: f64 = points[i]
                .iter()
                .zip(points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(sq.sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = dists.len();
    let median = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    if median > 0.0 {
        Some(median)
    } else {
        None
    }
}
