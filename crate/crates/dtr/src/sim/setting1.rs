//! Setting 1: twenty baseline features, feed-forward rewards, and
//! feature-dependent randomization probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::model::{build_history_parts, decide, sign_pos, StageObservation, Trajectory};

use super::RolloutPolicy;

pub(super) const N_FEATURES: usize = 20;
const N_STAGES: usize = 4;
const CORRELATED: usize = 10;
const PAIRWISE_CORR: f64 = 0.2;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Baseline features: the first ten share a common factor giving pairwise
/// correlation 0.2 with unit variances; the rest are independent standard
/// normals.
fn draw_features(rng: &mut ChaCha12Rng) -> Vec<f64> {
    let shared: f64 = rng.sample(StandardNormal);
    (0..N_FEATURES)
        .map(|i| {
            let own: f64 = rng.sample(StandardNormal);
            if i < CORRELATED {
                PAIRWISE_CORR.sqrt() * shared + (1.0 - PAIRWISE_CORR).sqrt() * own
            } else {
                own
            }
        })
        .collect()
}

/// Stage-k reward given the baseline features, previous rewards, the
/// assigned treatment, and the noise draw.
pub(crate) fn reward(k: usize, x: &[f64], prev: &[f64], action: f64, eps: f64) -> f64 {
    match k {
        1 => x[0] * action + eps,
        2 => (prev[0] + x[1] * x[1] + x[2] * x[2] - 0.8) * action + eps,
        3 => 2.0 * (prev[1] + x[3]) * action + x[4] * x[4] + x[5] + eps,
        4 => (prev[2] - 0.5) * action + eps,
        _ => unreachable!("setting 1 has four stages"),
    }
}

/// `P(A_k = +1 | history)`.
pub(crate) fn prob_treat(k: usize, x: &[f64], prev: &[f64]) -> f64 {
    match k {
        1 => sigmoid(0.5 * x[0]),
        2 => sigmoid(-0.1 * prev[0]),
        3 => sigmoid(-0.2 * x[2]),
        4 => sigmoid(-0.2 * x[3]),
        _ => unreachable!("setting 1 has four stages"),
    }
}

/// Stagewise-greedy optimal rule: each stage maximizes the conditional mean
/// of its own reward, which also maximizes the downstream value here because
/// later-stage values are increasing in the realized rewards.
pub(crate) fn greedy_action(k: usize, x: &[f64], prev: &[f64]) -> i8 {
    match k {
        1 => sign_pos(x[0]),
        2 => sign_pos(prev[0] + x[1] * x[1] + x[2] * x[2] - 0.8),
        3 => sign_pos(prev[1] + x[3]),
        4 => sign_pos(prev[2] - 0.5),
        _ => unreachable!("setting 1 has four stages"),
    }
}

fn clamp_propensity(p: f64) -> f64 {
    p.clamp(1e-12, 1.0 - 1e-12)
}

pub(super) fn generate(n: usize, seed: u64) -> Vec<Trajectory> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x = draw_features(&mut rng);
            let mut stages = Vec::with_capacity(N_STAGES);
            let mut prev: Vec<f64> = Vec::with_capacity(N_STAGES);
            for k in 1..=N_STAGES {
                let p = prob_treat(k, &x, &prev);
                let u: f64 = rng.random();
                let action: i8 = if u < p { 1 } else { -1 };
                let propensity = clamp_propensity(if action == 1 { p } else { 1.0 - p });
                let eps: f64 = rng.sample(StandardNormal);
                let r = reward(k, &x, &prev, action as f64, eps);
                stages.push(StageObservation {
                    features: if k == 1 { x.clone() } else { Vec::new() },
                    action,
                    reward: r,
                    propensity,
                });
                prev.push(r);
            }
            Trajectory {
                stages,
                eligible: vec![true; N_STAGES],
            }
        })
        .collect()
}

pub(super) fn rollout(policy: &RolloutPolicy<'_>, n: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let empty: [f64; 0] = [];
    let mut total = 0.0;
    for _ in 0..n {
        let x = draw_features(&mut rng);
        let mut prev: Vec<f64> = Vec::with_capacity(N_STAGES);
        let mut actions: Vec<i8> = Vec::with_capacity(N_STAGES);
        for k in 1..=N_STAGES {
            let action = match policy {
                RolloutPolicy::Regimen(regimen) => {
                    let mut feats: Vec<&[f64]> = vec![x.as_slice()];
                    feats.extend(std::iter::repeat_n(empty.as_slice(), k - 1));
                    let h = build_history_parts(&feats, &actions, &prev, k, &regimen.scheme);
                    decide(&regimen.rules[k - 1], &h)?
                }
                RolloutPolicy::Oracle => greedy_action(k, &x, &prev),
                RolloutPolicy::Constant(a) => *a,
                RolloutPolicy::FairCoin => {
                    if rng.random::<f64>() < 0.5 {
                        1
                    } else {
                        -1
                    }
                }
            };
            let eps: f64 = rng.sample(StandardNormal);
            let r = reward(k, &x, &prev, action as f64, eps);
            actions.push(action);
            prev.push(r);
        }
        total += prev.iter().sum::<f64>();
    }
    Ok(total / n as f64)
}
