//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with the measured quantities (run with `-- --nocapture` to see the lines
//! for passing tests too).
//!
//! The desk-scale benchmark criteria share their heavy runs through lazy
//! statics, so the full suite performs each replicated benchmark once.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use dtr::{
    augmented_pseudo_outcome, check_kkt, fit_lasso, fit_weighted_svm, rollout_value, run_benchmark,
    sign_pos, BenchmarkReport, DecisionRule, DesignMatrix, HistoryScheme, HistoryVector,
    KernelSpec, LearnerConfig, Method, MethodSummary, PseudoOutcomeVariant, RolloutPolicy,
    ScenarioSpec, SettingKind, SolverConfig, StageObservation, Trajectory, WeightedSample,
};

fn report_line(criterion: usize, name: &str, pass: bool, details: &str) {
    eprintln!(
        "acceptance criterion {criterion} ({name}): {} — {details}",
        if pass { "PASS" } else { "FAIL" }
    );
}

// ---------------------------------------------------------------------------
// criterion 1: solver dual objective vs brute-force oracle
// ---------------------------------------------------------------------------

/// Exhaustive enumeration oracle for the box- and balance-constrained
/// concave dual: every multiplier is fixed at 0, fixed at its cap, or free;
/// free multipliers solve the stationarity system with the balance
/// multiplier. The best feasible candidate is the global maximum.
fn oracle_dual_max(q: &[Vec<f64>], labels: &[f64], caps: &[f64]) -> f64 {
    let n = labels.len();
    let objective = |alpha: &[f64]| -> f64 {
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += alpha[i] * q[i][j] * alpha[j];
            }
        }
        alpha.iter().sum::<f64>() - 0.5 * quad
    };
    let mut best = f64::NEG_INFINITY;
    let mut pattern = vec![0u8; n];
    loop {
        let free: Vec<usize> = (0..n).filter(|&i| pattern[i] == 2).collect();
        let mut alpha: Vec<f64> = (0..n)
            .map(|i| if pattern[i] == 1 { caps[i] } else { 0.0 })
            .collect();
        let feasible = if free.is_empty() {
            let balance: f64 = (0..n).map(|i| labels[i] * alpha[i]).sum();
            balance.abs() <= 1e-9 * (1.0 + caps.iter().sum::<f64>())
        } else {
            let m = free.len() + 1;
            let mut system = vec![vec![0.0; m + 1]; m];
            for (r, &i) in free.iter().enumerate() {
                for (c, &j) in free.iter().enumerate() {
                    system[r][c] = q[i][j];
                }
                system[r][free.len()] = labels[i];
                let fixed: f64 = (0..n)
                    .filter(|j| pattern[*j] == 1)
                    .map(|j| q[i][j] * caps[j])
                    .sum();
                system[r][m] = 1.0 - fixed;
            }
            for (c, &j) in free.iter().enumerate() {
                system[free.len()][c] = labels[j];
            }
            let fixed_balance: f64 = (0..n)
                .filter(|j| pattern[*j] == 1)
                .map(|j| labels[j] * caps[j])
                .sum();
            system[free.len()][m] = -fixed_balance;
            match solve_dense(&mut system) {
                Some(solution) => {
                    let mut ok = true;
                    for (c, &j) in free.iter().enumerate() {
                        let v = solution[c];
                        if !(-1e-9..=caps[j] + 1e-9).contains(&v) {
                            ok = false;
                            break;
                        }
                        alpha[j] = v;
                    }
                    ok
                }
                None => false,
            }
        };
        if feasible {
            best = best.max(objective(&alpha));
        }
        let mut pos = 0;
        while pos < n {
            pattern[pos] += 1;
            if pattern[pos] < 3 {
                break;
            }
            pattern[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    best
}

#[allow(clippy::needless_range_loop)]
fn solve_dense(a: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let m = a.len();
    for col in 0..m {
        let mut pivot = col;
        for r in (col + 1)..m {
            if a[r][col].abs() > a[pivot][col].abs() {
                pivot = r;
            }
        }
        if a[pivot][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, pivot);
        for r in 0..m {
            if r != col {
                let factor = a[r][col] / a[col][col];
                for c in col..=m {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
    }
    Some((0..m).map(|r| a[r][m] / a[r][r]).collect())
}

fn history(values: Vec<f64>) -> HistoryVector {
    HistoryVector { values, stage: 1 }
}

#[test]
fn criterion_01_solver_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(10_001);
    let mut done = 0;
    let mut max_gap = 0.0f64;
    let mut max_violation = 0.0f64;
    while done < 200 {
        let n = 4 + done % 3;
        let samples: Vec<WeightedSample> = (0..n)
            .map(|_| WeightedSample {
                history: history(vec![
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ]),
                action: if rng.random::<bool>() { 1 } else { -1 },
                weight: 2.0 * rng.sample::<f64, _>(StandardNormal),
            })
            .collect();
        let labels: Vec<f64> = samples
            .iter()
            .map(|s| (s.action as f64) * (sign_pos(s.weight) as f64))
            .collect();
        if labels.windows(2).all(|w| w[0] == w[1]) {
            continue;
        }
        let mut config = SolverConfig::new(0.5 + 3.5 * rng.random::<f64>(), KernelSpec::Linear);
        config.kkt_tolerance = 1e-9;
        let fit = fit_weighted_svm(&samples, &config).unwrap();
        let caps: Vec<f64> = samples
            .iter()
            .map(|s| config.cost * s.weight.abs())
            .collect();
        let mut q = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = samples[i]
                    .history
                    .values
                    .iter()
                    .zip(&samples[j].history.values)
                    .map(|(a, b)| a * b)
                    .sum();
                q[i][j] = labels[i] * labels[j] * dot;
            }
        }
        let oracle = oracle_dual_max(&q, &labels, &caps);
        max_gap = max_gap.max((fit.solution.objective - oracle).abs());
        max_violation = max_violation.max(check_kkt(&samples, &config, &fit.solution).unwrap());
        done += 1;
    }
    let elapsed = start.elapsed();
    let pass = max_gap <= 1e-6 && max_violation <= 1e-3 && elapsed.as_secs() < 60;
    report_line(
        1,
        "solver oracle equivalence",
        pass,
        &format!(
            "200 instances, max |objective gap| {max_gap:.2e} (tol 1e-6), \
             max KKT violation {max_violation:.2e} (tol 1e-3), runtime {elapsed:.2?} (< 60s)"
        ),
    );
    assert!(
        max_gap <= 1e-6,
        "dual objective gap {max_gap:.3e} above 1e-6"
    );
    assert!(
        max_violation <= 1e-3,
        "KKT violation {max_violation:.3e} above 1e-3"
    );
    assert!(elapsed.as_secs() < 60, "runtime {elapsed:?} above 1 minute");
}

// ---------------------------------------------------------------------------
// criterion 2: lasso closed form on orthonormal designs
// ---------------------------------------------------------------------------

fn orthonormal_design(rng: &mut ChaCha12Rng, n: usize, p: usize) -> DesignMatrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(p);
    for _ in 0..p {
        let mut col: Vec<f64> = (0..n)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let mean = col.iter().sum::<f64>() / n as f64;
        col.iter_mut().for_each(|v| *v -= mean);
        for prev in &cols {
            let proj: f64 = col.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>() / n as f64;
            col.iter_mut().zip(prev).for_each(|(a, b)| *a -= proj * b);
        }
        let norm = (col.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        col.iter_mut().for_each(|v| *v /= norm);
        cols.push(col);
    }
    DesignMatrix::from_columns(cols).unwrap()
}

#[test]
fn criterion_02_lasso_soft_threshold_closed_form() {
    let mut rng = ChaCha12Rng::seed_from_u64(10_002);
    let (n, p) = (50, 10);
    let mut max_err = 0.0f64;
    for _ in 0..100 {
        let x = orthonormal_design(&mut rng, n, p);
        let y: Vec<f64> = (0..n)
            .map(|_| 2.0 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let lambda = rng.random_range(0.0..0.8);
        let fit = fit_lasso(&x, &y, lambda).unwrap();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        for j in 0..p {
            let z: f64 = x
                .column(j)
                .iter()
                .zip(&y)
                .map(|(a, b)| a * (b - y_mean))
                .sum::<f64>()
                / n as f64;
            let expected = z.signum() * (z.abs() - lambda).max(0.0);
            max_err = max_err.max((fit.coefficients[j] - expected).abs());
        }
    }
    let pass = max_err <= 1e-8;
    report_line(
        2,
        "lasso closed form",
        pass,
        &format!("100 orthonormal designs, max coefficient error {max_err:.2e} (tol 1e-8)"),
    );
    assert!(pass, "coefficient error {max_err:.3e} above 1e-8");
}

// ---------------------------------------------------------------------------
// criteria 3 and 4: double robustness and variance ordering of the
// pseudo-outcome on a constructed two-stage generator
// ---------------------------------------------------------------------------

const X1: f64 = 0.8;

fn two_stage_rules() -> [DecisionRule; 2] {
    // stage 1: sign of the feature; stage 2: sign of the realized R1
    // (coordinate 2 of the stage-2 history (x1, a1, r1, a1*x1))
    [
        DecisionRule::Linear {
            bias: 0.0,
            coefficients: vec![1.0],
        },
        DecisionRule::Linear {
            bias: 0.0,
            coefficients: vec![0.0, 0.0, 1.0, 0.0],
        },
    ]
}

/// Two-stage draw with constant propensity 1/2: a fixed baseline feature,
/// reward `R1 = x1 A1 + e1`, and `R2 = (1 + R1) A2 + e2`.
fn draw_two_stage(rng: &mut ChaCha12Rng) -> Trajectory {
    let a1: i8 = if rng.random::<f64>() < 0.5 { 1 } else { -1 };
    let e1: f64 = rng.sample(StandardNormal);
    let r1 = X1 * (a1 as f64) + e1;
    let a2: i8 = if rng.random::<f64>() < 0.5 { 1 } else { -1 };
    let e2: f64 = rng.sample(StandardNormal);
    let r2 = (1.0 + r1) * (a2 as f64) + e2;
    Trajectory::all_eligible(vec![
        StageObservation {
            features: vec![X1],
            action: a1,
            reward: r1,
            propensity: 0.5,
        },
        StageObservation {
            features: vec![],
            action: a2,
            reward: r2,
            propensity: 0.5,
        },
    ])
    .unwrap()
}

/// `E[R1* + R2* | X1]` by Simpson quadrature over the stage-1 noise:
/// `R2* = (1 + R1*) sign(R1*) + e2` with `R1* ~ N(X1, 1)`.
fn two_stage_truth_quadrature() -> f64 {
    let f = |e1: f64| {
        let r1 = X1 + e1;
        let r2_mean = (1.0 + r1) * (sign_pos(r1) as f64);
        let density = (-0.5 * e1 * e1).exp() / (2.0 * std::f64::consts::PI).sqrt();
        (r1 + r2_mean) * density
    };
    let (a, b, steps) = (-12.0, 12.0, 200_000);
    let h = (b - a) / steps as f64;
    let mut acc = f(a) + f(b);
    for s in 1..steps {
        let x = a + h * s as f64;
        acc += if s % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    acc * h / 3.0
}

fn pseudo_values(m_hat_value: Option<f64>, draws: usize, seed: u64) -> Vec<f64> {
    // None means "use the true conditional mean"
    let truth = two_stage_truth_quadrature();
    let rules = two_stage_rules();
    let scheme = HistoryScheme::default();
    let m_hat = move |_: usize, _: &Trajectory| Ok(m_hat_value.unwrap_or(truth));
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| {
            let traj = draw_two_stage(&mut rng);
            augmented_pseudo_outcome(
                &traj,
                1,
                &rules,
                &scheme,
                &m_hat,
                PseudoOutcomeVariant::Simple,
                false,
            )
            .unwrap()
            .value
        })
        .collect()
}

#[test]
fn criterion_03_pseudo_outcome_double_robustness() {
    let start = Instant::now();
    let draws = 100_000;
    // a deliberately wrong imputation model
    let values = pseudo_values(Some(42.0), draws, 10_003);
    let truth = two_stage_truth_quadrature();
    let mean = values.iter().sum::<f64>() / draws as f64;
    let sd =
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (draws as f64 - 1.0)).sqrt();
    let se = sd / (draws as f64).sqrt();
    let elapsed = start.elapsed();
    let pass = (mean - truth).abs() <= 3.0 * se && elapsed.as_secs() < 120;
    report_line(
        3,
        "pseudo-outcome double robustness",
        pass,
        &format!(
            "Monte Carlo mean {mean:.4} vs closed form {truth:.4}, |diff| {:.4} <= 3 SE {:.4}, \
             runtime {elapsed:.2?} (< 120s)",
            (mean - truth).abs(),
            3.0 * se
        ),
    );
    assert!(
        (mean - truth).abs() <= 3.0 * se,
        "bias {:.4} above 3 SE {:.4} despite a wrong imputation model",
        (mean - truth).abs(),
        3.0 * se
    );
    assert!(
        elapsed.as_secs() < 120,
        "runtime {elapsed:?} above 2 minutes"
    );
}

#[test]
fn criterion_04_pseudo_outcome_variance_ordering() {
    let draws = 100_000;
    // identical random draws, two centring functions
    let with_truth = pseudo_values(None, draws, 10_004);
    let with_zero = pseudo_values(Some(0.0), draws, 10_004);
    let var = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (v.len() as f64 - 1.0)
    };
    let v_truth = var(&with_truth);
    let v_zero = var(&with_zero);
    let pass = v_truth < v_zero;
    report_line(
        4,
        "pseudo-outcome variance ordering",
        pass,
        &format!(
            "variance with conditional-mean centring {v_truth:.4} < variance with zero \
             centring {v_zero:.4}"
        ),
    );
    assert!(pass, "variance {v_truth:.4} not below {v_zero:.4}");
}

// ---------------------------------------------------------------------------
// criterion 5: efficient/simple pseudo-outcome reduction
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_efficient_simple_reduction() {
    let mut rng = ChaCha12Rng::seed_from_u64(10_005);
    let scheme = HistoryScheme::default();
    let dims = [2usize, 1, 0];
    let rules: Vec<DecisionRule> = (1..=3)
        .map(|k| {
            let len = scheme.history_len(k, &dims);
            DecisionRule::Linear {
                bias: 0.2 * rng.sample::<f64, _>(StandardNormal),
                coefficients: (0..len)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            }
        })
        .collect();
    // imputation depends on the trajectory only through the stage-1 history
    let m_hat = |_: usize, t: &Trajectory| {
        Ok(1.7 * t.stages[0].features[0] - 0.4 * t.stages[0].features[1] + 2.1)
    };
    let mut max_gap = 0.0f64;
    for _ in 0..1_000 {
        let stages: Vec<StageObservation> = dims
            .iter()
            .map(|&d| StageObservation {
                features: (0..d)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect(),
                action: if rng.random::<bool>() { 1 } else { -1 },
                reward: rng.sample::<f64, _>(StandardNormal),
                propensity: rng.random_range(0.15..0.85),
            })
            .collect();
        let traj = Trajectory::all_eligible(stages).unwrap();
        let simple = augmented_pseudo_outcome(
            &traj,
            1,
            &rules,
            &scheme,
            &m_hat,
            PseudoOutcomeVariant::Simple,
            false,
        )
        .unwrap();
        let efficient = augmented_pseudo_outcome(
            &traj,
            1,
            &rules,
            &scheme,
            &m_hat,
            PseudoOutcomeVariant::Efficient,
            false,
        )
        .unwrap();
        max_gap = max_gap.max((simple.value - efficient.value).abs());
    }
    let pass = max_gap <= 1e-10;
    report_line(
        5,
        "efficient/simple reduction",
        pass,
        &format!("1000 trajectories, max |difference| {max_gap:.2e} (tol 1e-10)"),
    );
    assert!(pass, "pseudo-outcome difference {max_gap:.3e} above 1e-10");
}

// ---------------------------------------------------------------------------
// criteria 6, 7, 8: desk-scale benchmark reproduction
// ---------------------------------------------------------------------------

const BENCH_SEED: u64 = 20_240_817;
const DESK_TEST_N: usize = 10_000;
const DESK_REPLICATES: usize = 100;

fn desk_spec(kind: SettingKind, n_train: usize) -> ScenarioSpec {
    ScenarioSpec {
        kind,
        n_train,
        n_test: DESK_TEST_N,
        replicates: DESK_REPLICATES,
        seed: BENCH_SEED,
    }
}

fn summary_for(report: &BenchmarkReport, method: Method) -> &MethodSummary {
    report
        .methods
        .iter()
        .find(|m| m.method == method)
        .expect("method present")
}

static BENCH_S2_N200: OnceLock<BenchmarkReport> = OnceLock::new();

fn bench_s2_n200() -> &'static BenchmarkReport {
    BENCH_S2_N200.get_or_init(|| {
        run_benchmark(
            &desk_spec(SettingKind::Two, 200),
            &Method::ALL,
            &LearnerConfig::default(),
        )
        .unwrap()
    })
}

#[test]
fn criterion_06_desk_scale_setting2() {
    let report = bench_s2_n200();
    let amol_simple = summary_for(report, Method::AmolSimple);
    let amol_efficient = summary_for(report, Method::AmolEfficient);
    let olearn = summary_for(report, Method::OLearning);
    let qlearn = summary_for(report, Method::QLearning);
    let window = (2.0..=2.9).contains(&amol_simple.mean);
    let margins = [
        amol_simple.mean - olearn.mean,
        amol_simple.mean - qlearn.mean,
        amol_efficient.mean - olearn.mean,
        amol_efficient.mean - qlearn.mean,
    ];
    let margins_ok = margins.iter().all(|m| *m >= 0.5);
    let pass = window && margins_ok;
    report_line(
        6,
        "desk-scale setting 2",
        pass,
        &format!(
            "amol {:.3} (window [2.0, 2.9]), amol-eff {:.3}, olearn {:.3}, qlearn {:.3}, \
             min margin {:.3} (>= 0.5), {} replicates, runtime {:.0}s",
            amol_simple.mean,
            amol_efficient.mean,
            olearn.mean,
            qlearn.mean,
            margins.iter().cloned().fold(f64::INFINITY, f64::min),
            report.spec.replicates,
            report.runtime_secs
        ),
    );
    assert!(
        window,
        "amol mean {:.3} outside [2.0, 2.9]",
        amol_simple.mean
    );
    assert!(
        margins_ok,
        "an amol margin over olearn/qlearn fell below 0.5: {margins:?}"
    );
    assert_eq!(amol_simple.n_failed, 0, "amol replicates failed");
}

/// Desk-scale value windows for individual methods on setting 2, reusing the
/// criterion-6 run.
#[test]
fn setting2_method_value_windows() {
    let report = bench_s2_n200();
    let olearn = summary_for(report, Method::OLearning).mean;
    assert!(
        (olearn - 1.251).abs() <= 0.5,
        "olearn mean {olearn:.3} outside 1.251 +/- 0.5"
    );
    let amol_400 = summary_for(bench_s2_amol(400), Method::AmolSimple).mean;
    assert!(
        (amol_400 - 2.846).abs() <= 0.5,
        "amol mean {amol_400:.3} at n=400 outside 2.846 +/- 0.5"
    );
}

#[test]
fn criterion_07_desk_scale_setting1() {
    let report = run_benchmark(
        &desk_spec(SettingKind::One, 100),
        &[Method::AmolSimple, Method::OLearning],
        &LearnerConfig::default(),
    )
    .unwrap();
    let amol_simple = summary_for(&report, Method::AmolSimple);
    let olearn = summary_for(&report, Method::OLearning);
    let window = (4.7..=6.7).contains(&amol_simple.mean);
    let margin = amol_simple.mean - olearn.mean;
    let pass = window && margin >= 1.5;
    report_line(
        7,
        "desk-scale setting 1",
        pass,
        &format!(
            "amol {:.3} (window [4.7, 6.7]), olearn {:.3}, margin {:.3} (>= 1.5), \
             {} replicates, runtime {:.0}s",
            amol_simple.mean, olearn.mean, margin, report.spec.replicates, report.runtime_secs
        ),
    );
    assert!(
        margin >= 1.5,
        "amol margin over olearn {margin:.3} below 1.5"
    );
    // The scenario's reward equations admit a stagewise-greedy value near
    // 14.9 (see the oracle criterion), well above the 10.1 scale this window
    // was calibrated against; competent fits land near 10 at n=100, so the
    // window cannot hold together with those equations. The assertion is
    // kept as stated rather than widened.
    assert!(
        window,
        "AMOL mean {:.3} outside [4.7, 6.7]: the scenario's reward equations put the \
         achievable value scale (greedy-oracle ~14.9) above the 10.1 scale this window \
         was calibrated against, so a faithful fit overshoots it; the margin clause \
         above does hold",
        amol_simple.mean
    );
}

static BENCH_S2_AMOL: OnceLock<Vec<(usize, BenchmarkReport)>> = OnceLock::new();

fn bench_s2_amol(n_train: usize) -> &'static BenchmarkReport {
    if n_train == 200 {
        return bench_s2_n200();
    }
    let all = BENCH_S2_AMOL.get_or_init(|| {
        [50usize, 100, 400]
            .iter()
            .map(|&n| {
                (
                    n,
                    run_benchmark(
                        &desk_spec(SettingKind::Two, n),
                        &[Method::AmolSimple],
                        &LearnerConfig::default(),
                    )
                    .unwrap(),
                )
            })
            .collect()
    });
    &all.iter()
        .find(|(n, _)| *n == n_train)
        .expect("n present")
        .1
}

#[test]
fn criterion_08_consistency_trend() {
    let sizes = [50usize, 100, 200, 400];
    let summaries: Vec<&MethodSummary> = sizes
        .iter()
        .map(|&n| summary_for(bench_s2_amol(n), Method::AmolSimple))
        .collect();
    let means: Vec<f64> = summaries.iter().map(|s| s.mean).collect();
    let mut ok = true;
    let mut detail = String::new();
    for w in 0..3 {
        let (lo, hi) = (summaries[w], summaries[w + 1]);
        let pooled_se = ((lo.std * lo.std + hi.std * hi.std) / lo.n_ok.min(hi.n_ok) as f64).sqrt();
        if hi.mean < lo.mean - pooled_se {
            ok = false;
        }
        detail.push_str(&format!(
            "n={}->{}: {:.3}->{:.3} (pooled SE {:.3}); ",
            sizes[w],
            sizes[w + 1],
            lo.mean,
            hi.mean,
            pooled_se
        ));
    }
    report_line(
        8,
        "consistency trend",
        ok,
        &format!("amol means {means:?} over n {sizes:?}; {detail}"),
    );
    assert!(
        ok,
        "amol mean value not monotone within one pooled SE: {means:?}"
    );
}

// ---------------------------------------------------------------------------
// criterion 9: oracle regimen values
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_oracle_values() {
    let n = 100_000;
    let s2 = rollout_value(SettingKind::Two, &RolloutPolicy::Oracle, n, 10_009).unwrap();
    let s1 = rollout_value(SettingKind::One, &RolloutPolicy::Oracle, n, 10_009).unwrap();
    let pass = (s2 - 4.0).abs() <= 0.05 && s1 >= 10.0;
    report_line(
        9,
        "oracle values",
        pass,
        &format!("setting-2 oracle {s2:.4} (4.0 +/- 0.05), setting-1 oracle {s1:.4} (>= 10.0)"),
    );
    assert!(
        (s2 - 4.0).abs() <= 0.05,
        "setting-2 oracle value {s2:.4} outside 4.0 +/- 0.05"
    );
    assert!(s1 >= 10.0, "setting-1 oracle value {s1:.4} below 10.0");
}

// ---------------------------------------------------------------------------
// criterion 10: CLI determinism
// ---------------------------------------------------------------------------

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dtr"))
        .args(args)
        .output()
        .expect("spawn dtr")
}

fn read(path: &std::path::Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn criterion_10_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut all_equal = true;
    let mut notes = Vec::new();

    // two independent passes of every command into separate directories
    let mut artifacts: Vec<Vec<Vec<u8>>> = Vec::new();
    for pass in 0..2 {
        let root = dir.path().join(format!("pass{pass}"));
        std::fs::create_dir(&root).unwrap();
        let data = root.join("data.csv");
        let schema = root.join("data.csv.schema.json");
        let model = root.join("model.json");
        let bench = root.join("bench");

        let out = run_cli(&[
            "simulate",
            "--setting",
            "2",
            "--n",
            "40",
            "--seed",
            "5",
            "--out",
            data.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let out = run_cli(&[
            "fit",
            "--method",
            "qlearn",
            "--data",
            data.to_str().unwrap(),
            "--schema",
            schema.to_str().unwrap(),
            "--out",
            model.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let eval = run_cli(&[
            "evaluate",
            "--model",
            model.to_str().unwrap(),
            "--data",
            data.to_str().unwrap(),
            "--schema",
            schema.to_str().unwrap(),
        ]);
        assert!(eval.status.success());
        let cv = run_cli(&[
            "cv",
            "--method",
            "olearn",
            "--data",
            data.to_str().unwrap(),
            "--schema",
            schema.to_str().unwrap(),
            "--cost-grid",
            "0.5,2",
            "--folds",
            "2",
        ]);
        assert!(cv.status.success());
        let out = run_cli(&[
            "bench",
            "--setting",
            "2",
            "--n",
            "30",
            "--replicates",
            "2",
            "--test-n",
            "300",
            "--seed",
            "9",
            "--methods",
            "qlearn",
            "--out",
            bench.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );

        artifacts.push(vec![
            read(&data),
            read(&schema),
            read(&model),
            eval.stdout,
            cv.stdout,
            read(&bench.with_extension("csv")),
            read(&bench.with_extension("json")),
        ]);
    }
    let labels = [
        "simulate csv",
        "simulate schema",
        "fit model",
        "evaluate stdout",
        "cv stdout",
        "bench csv",
        "bench json",
    ];
    for (idx, label) in labels.iter().enumerate() {
        let equal = artifacts[0][idx] == artifacts[1][idx];
        if !equal {
            all_equal = false;
            notes.push(*label);
        }
    }
    report_line(
        10,
        "CLI determinism",
        all_equal,
        &format!(
            "simulate/fit/evaluate/cv/bench rerun byte-identical: {}",
            if all_equal {
                "yes".to_string()
            } else {
                format!("differs in {notes:?}")
            }
        ),
    );
    assert!(
        all_equal,
        "outputs differ between identical runs: {notes:?}"
    );
}
