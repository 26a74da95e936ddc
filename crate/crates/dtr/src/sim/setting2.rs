//! Setting 2: ten latent subject groups, each with its own optimal treatment
//! sequence; only the final-stage reward is nonzero and randomization is a
//! fair coin at every stage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::model::{build_history_parts, decide, StageObservation, Trajectory};

use super::RolloutPolicy;

pub(super) const N_FEATURES: usize = 30;
const N_STAGES: usize = 4;
const N_GROUPS: usize = 10;
const CORRELATED: usize = 10;
const PAIRWISE_CORR: f64 = 0.2;
/// Group means are drawn from N(0, 5), read as standard deviation 5.
const GROUP_MEAN_SD: f64 = 5.0;

/// Optimal treatment for group `l` (1-based) at stage `j` (1-based):
/// `2 * (floor(l / 2^(j-1)) mod 2) - 1`.
pub fn optimal_action(group: usize, stage: usize) -> i8 {
    debug_assert!((1..=N_GROUPS).contains(&group));
    debug_assert!((1..=N_STAGES).contains(&stage));
    if (group >> (stage - 1)) & 1 == 1 {
        1
    } else {
        -1
    }
}

/// Final-stage reward: one unit for every stage treated according to the
/// group's optimal sequence, minus one for every mismatch, plus noise.
pub(crate) fn final_reward(actions: &[i8], group: usize, eps: f64) -> f64 {
    actions
        .iter()
        .enumerate()
        .map(|(idx, &a)| (a as f64) * (optimal_action(group, idx + 1) as f64))
        .sum::<f64>()
        + eps
}

/// One mean per informative feature per group, drawn fresh for every
/// generated dataset. A ten-dimensional mean puts the groups in general
/// position, so any assignment of optimal sequences to groups is linearly
/// decodable from the features; a single shared scalar would not be.
fn draw_group_means(rng: &mut ChaCha12Rng) -> Vec<Vec<f64>> {
    let sd = GROUP_MEAN_SD;
    (0..N_GROUPS)
        .map(|_| {
            (0..CORRELATED)
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect()
        })
        .collect()
}

/// Thirty baseline features: the first ten carry the group mean and are
/// pairwise correlated at 0.2 with unit variances; the rest are independent
/// standard normals carrying no group information.
fn draw_features(rng: &mut ChaCha12Rng, group_mean: &[f64]) -> Vec<f64> {
    let shared: f64 = rng.sample(StandardNormal);
    (0..N_FEATURES)
        .map(|i| {
            let own: f64 = rng.sample(StandardNormal);
            if i < CORRELATED {
                group_mean[i] + PAIRWISE_CORR.sqrt() * shared + (1.0 - PAIRWISE_CORR).sqrt() * own
            } else {
                own
            }
        })
        .collect()
}

pub(super) fn draw_population(seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    draw_group_means(&mut rng)
}

pub(super) fn generate(means: &[Vec<f64>], n: usize, seed: u64) -> Vec<Trajectory> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let group = rng.random_range(1..=N_GROUPS);
            let x = draw_features(&mut rng, &means[group - 1]);
            let actions: Vec<i8> = (0..N_STAGES)
                .map(|_| if rng.random::<f64>() < 0.5 { 1 } else { -1 })
                .collect();
            let eps: f64 = rng.sample(StandardNormal);
            let stages = (1..=N_STAGES)
                .map(|k| StageObservation {
                    features: if k == 1 { x.clone() } else { Vec::new() },
                    action: actions[k - 1],
                    reward: if k == N_STAGES {
                        final_reward(&actions, group, eps)
                    } else {
                        0.0
                    },
                    propensity: 0.5,
                })
                .collect();
            Trajectory {
                stages,
                eligible: vec![true; N_STAGES],
            }
        })
        .collect()
}

pub(super) fn rollout(
    means: &[Vec<f64>],
    policy: &RolloutPolicy<'_>,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let empty: [f64; 0] = [];
    let mut total = 0.0;
    for _ in 0..n {
        let group = rng.random_range(1..=N_GROUPS);
        let x = draw_features(&mut rng, &means[group - 1]);
        let mut actions: Vec<i8> = Vec::with_capacity(N_STAGES);
        let mut prev: Vec<f64> = Vec::with_capacity(N_STAGES);
        for k in 1..=N_STAGES {
            let action = match policy {
                RolloutPolicy::Regimen(regimen) => {
                    let mut feats: Vec<&[f64]> = vec![x.as_slice()];
                    feats.extend(std::iter::repeat_n(empty.as_slice(), k - 1));
                    let h = build_history_parts(&feats, &actions, &prev, k, &regimen.scheme);
                    decide(&regimen.rules[k - 1], &h)?
                }
                RolloutPolicy::Oracle => optimal_action(group, k),
                RolloutPolicy::Constant(a) => *a,
                RolloutPolicy::FairCoin => {
                    if rng.random::<f64>() < 0.5 {
                        1
                    } else {
                        -1
                    }
                }
            };
            actions.push(action);
            prev.push(0.0);
        }
        let eps: f64 = rng.sample(StandardNormal);
        total += final_reward(&actions, group, eps);
    }
    Ok(total / n as f64)
}
