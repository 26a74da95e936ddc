//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dtr::{
    estimate_value, fit_method, run_benchmark, BenchmarkReport, FitReport, KernelChoice,
    LearnerConfig, Method, Population, ScenarioSpec,
};
use serde_json::json;

use crate::csv_io::{load_csv, write_csv};
use crate::schema::DatasetSchema;
use crate::{BenchArgs, CvArgs, EvaluateArgs, FitArgs, LearnerFlags, SimulateArgs};

fn parse_kernel(raw: &str) -> Result<KernelChoice> {
    match raw {
        "linear" => Ok(KernelChoice::Linear),
        "gaussian" => Ok(KernelChoice::Gaussian { bandwidth: None }),
        other => {
            if let Some(sigma) = other.strip_prefix("gaussian:") {
                let bandwidth: f64 = sigma
                    .parse()
                    .with_context(|| format!("invalid bandwidth '{sigma}'"))?;
                if !(bandwidth.is_finite() && bandwidth > 0.0) {
                    bail!("bandwidth must be a positive real, got {bandwidth}");
                }
                Ok(KernelChoice::Gaussian {
                    bandwidth: Some(bandwidth),
                })
            } else {
                bail!("unknown kernel '{other}', expected linear|gaussian[:sigma]");
            }
        }
    }
}

fn parse_cost_grid(raw: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = raw
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid cost '{tok}'"))
        })
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        bail!("empty cost grid");
    }
    Ok(grid)
}

impl LearnerFlags {
    fn to_config(&self) -> Result<LearnerConfig> {
        let mut config = LearnerConfig {
            kernel: parse_kernel(&self.kernel)?,
            cost_folds: self.folds,
            ..LearnerConfig::default()
        };
        if let Some(raw) = &self.cost_grid {
            config.cost_grid = parse_cost_grid(raw)?;
        }
        Ok(config)
    }
}

fn parse_methods(raw: Option<&str>) -> Result<Vec<Method>> {
    match raw {
        None => Ok(Method::ALL.to_vec()),
        Some(raw) => raw
            .split(',')
            .map(|tok| tok.trim().parse::<Method>().map_err(anyhow::Error::msg))
            .collect(),
    }
}

fn schema_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".schema.json");
    out.with_file_name(name)
}

/// Every command announces its full resolved configuration on stderr.
fn print_config(command: &str, config: &serde_json::Value) {
    eprintln!("{command} config: {config}");
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let pop_seed = args.pop_seed.unwrap_or(args.seed);
    print_config(
        "simulate",
        &json!({
            "setting": args.setting.to_string(),
            "n": args.n,
            "seed": args.seed,
            "pop_seed": pop_seed,
            "out": args.out.display().to_string(),
        }),
    );
    let population = Population::from_seed(args.setting, pop_seed);
    let data = population.generate(args.n, args.seed);
    let schema = DatasetSchema::for_setting(args.setting);
    write_csv(&args.out, &data, &schema)?;
    let schema_path = schema_path_for(&args.out);
    schema.save(&schema_path)?;
    eprintln!(
        "wrote {} subjects to {} (schema {})",
        data.len(),
        args.out.display(),
        schema_path.display()
    );
    Ok(())
}

fn resolved_learner_json(config: &LearnerConfig, method: Option<Method>) -> serde_json::Value {
    json!({
        "method": method.map(|m| m.to_string()),
        "kernel": config.kernel,
        "cost_grid": config.cost_grid,
        "cost_folds": config.cost_folds,
        "lasso_folds": config.lasso_folds,
        "lasso_grid_len": config.lasso_grid_len,
        "lasso_min_ratio": config.lasso_min_ratio,
        "kkt_tolerance": config.kkt_tolerance,
        "max_passes": config.max_passes,
        "history_interactions": config.scheme.interactions,
    })
}

pub fn fit(args: FitArgs) -> Result<()> {
    let config = args.learner.to_config()?;
    print_config("fit", &resolved_learner_json(&config, Some(args.method)));
    let schema = DatasetSchema::load(&args.schema)?;
    let data = load_csv(&args.data, &schema)?;
    let report = fit_method(args.method, &data, &config)?;
    std::fs::write(&args.out, report.to_json()? + "\n")
        .with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "fitted {} on {} subjects; report written to {}",
        args.method,
        data.len(),
        args.out.display()
    );
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    print_config(
        "evaluate",
        &json!({
            "model": args.model.display().to_string(),
            "data": args.data.display().to_string(),
        }),
    );
    let schema = DatasetSchema::load(&args.schema)?;
    let data = load_csv(&args.data, &schema)?;
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;
    let regimen = match FitReport::from_json(&text) {
        Ok(report) => report.regimen,
        Err(_) => dtr::Regimen::from_json(&text)
            .context("model file is neither a fit report nor a regimen document")?,
    };
    let estimate = estimate_value(&regimen, &data)?;
    println!("{}", serde_json::to_string_pretty(&estimate)?);
    Ok(())
}

pub fn cv(args: CvArgs) -> Result<()> {
    let config = args.learner.to_config()?;
    print_config("cv", &resolved_learner_json(&config, Some(args.method)));
    let schema = DatasetSchema::load(&args.schema)?;
    let data = load_csv(&args.data, &schema)?;
    let report = fit_method(args.method, &data, &config)?;
    let stages: Vec<serde_json::Value> = report
        .stages
        .iter()
        .map(|s| {
            json!({
                "stage": s.stage,
                "n_used": s.n_used,
                "selected_cost": s.selected_cost,
                "scores": s.cost_cv_scores,
                "selected_lambda_recentre": s.selected_lambda_recentre,
                "selected_lambda_qfn": s.selected_lambda_qfn,
            })
        })
        .collect();
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "method": args.method.to_string(),
            "stages": stages,
        }))?
    );
    Ok(())
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let config = args.learner.to_config()?;
    let methods = parse_methods(args.methods.as_deref())?;
    let spec = ScenarioSpec {
        kind: args.setting,
        n_train: args.n,
        n_test: args.test_n,
        replicates: args.replicates,
        seed: args.seed,
    };
    let mut announce = resolved_learner_json(&config, None);
    announce["spec"] = serde_json::to_value(&spec)?;
    announce["methods"] = json!(methods
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<String>>());
    print_config("bench", &announce);

    let report = run_benchmark(&spec, &methods, &config)?;
    write_bench_outputs(&args.out, &report)?;
    for m in &report.methods {
        eprintln!(
            "{}: mean {:.4} std {:.4} median {:.4} ({} ok, {} failed)",
            m.method, m.mean, m.std, m.median, m.n_ok, m.n_failed
        );
    }
    eprintln!("runtime: {:.1}s", report.runtime_secs);
    Ok(())
}

fn write_bench_outputs(prefix: &Path, report: &BenchmarkReport) -> Result<()> {
    let csv_path = prefix.with_extension("csv");
    let json_path = prefix.with_extension("json");
    let mut writer = csv::Writer::from_path(&csv_path)
        .with_context(|| format!("creating {}", csv_path.display()))?;
    writer.write_record(["replicate", "method", "value", "error"])?;
    for r in &report.records {
        writer.write_record([
            r.replicate.to_string(),
            r.method.to_string(),
            r.value.map(|v| format!("{v}")).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    writer.flush()?;
    let summary = json!({
        "spec": report.spec,
        "methods": report.methods,
    });
    std::fs::write(&json_path, serde_json::to_string_pretty(&summary)? + "\n")
        .with_context(|| format!("writing {}", json_path.display()))?;
    eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}
