//! Wide-format CSV ingestion and export: one subject per row.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! written file parses back to bit-identical values.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dtr::{StageObservation, Trajectory};

use crate::schema::{DatasetSchema, PropensitySpec};

struct ColumnMap {
    index: HashMap<String, usize>,
}

impl ColumnMap {
    fn new(headers: &csv::StringRecord, schema: &DatasetSchema) -> Result<Self> {
        let index: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, name)| (name.to_string(), i))
            .collect();
        for col in schema.columns() {
            if !index.contains_key(col) {
                bail!("schema column '{col}' not found in CSV header");
            }
        }
        Ok(ColumnMap { index })
    }

    fn get<'r>(&self, record: &'r csv::StringRecord, column: &str) -> &'r str {
        record.get(self.index[column]).unwrap_or("").trim()
    }
}

fn parse_f64(raw: &str, row: usize, column: &str) -> Result<f64> {
    raw.parse::<f64>()
        .with_context(|| format!("row {row}: column '{column}': invalid number '{raw}'"))
}

fn parse_bool(raw: &str, row: usize, column: &str) -> Result<bool> {
    match raw {
        "true" | "TRUE" | "True" | "1" => Ok(true),
        "false" | "FALSE" | "False" | "0" => Ok(false),
        other => bail!("row {row}: column '{column}': invalid boolean '{other}'"),
    }
}

/// Loads trajectories from a wide CSV. Missing cells are permitted only at
/// ineligible stages, where they default to action +1, reward 0, and
/// propensity 1.
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<Vec<Trajectory>> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let map = ColumnMap::new(&headers, schema)?;

    let mut out = Vec::new();
    for (record_idx, record) in reader.records().enumerate() {
        let row = record_idx + 2; // 1-based, after the header line
        let record = record.with_context(|| format!("row {row}: malformed record"))?;
        let mut stages = Vec::with_capacity(schema.n_stages());
        let mut eligible = Vec::with_capacity(schema.n_stages());
        for (idx, stage) in schema.stages.iter().enumerate() {
            let k = idx + 1;
            let is_eligible = match &stage.eligible {
                Some(col) => parse_bool(map.get(&record, col), row, col)?,
                None => true,
            };
            let required = |raw: &str, column: &str| -> Result<Option<f64>> {
                if raw.is_empty() {
                    if is_eligible {
                        bail!("row {row}: column '{column}': missing value at eligible stage {k}");
                    }
                    Ok(None)
                } else {
                    parse_f64(raw, row, column).map(Some)
                }
            };

            let mut features = Vec::with_capacity(stage.features.len());
            for col in &stage.features {
                let v = required(map.get(&record, col), col)?.unwrap_or(0.0);
                features.push(v);
            }
            let action = match required(map.get(&record, &stage.action), &stage.action)? {
                Some(v) => {
                    if v != 1.0 && v != -1.0 {
                        bail!(
                            "row {row}: column '{}': action must be -1 or +1, got {v}",
                            stage.action
                        );
                    }
                    v as i8
                }
                None => 1,
            };
            let reward = required(map.get(&record, &stage.reward), &stage.reward)?.unwrap_or(0.0);
            let propensity = if !is_eligible {
                1.0
            } else {
                let p = match &stage.propensity {
                    PropensitySpec::Constant { constant } => *constant,
                    PropensitySpec::Column { column } => {
                        parse_f64(map.get(&record, column), row, column)?
                    }
                };
                if !(p > 0.0 && p < 1.0) {
                    let column = match &stage.propensity {
                        PropensitySpec::Column { column } => column.as_str(),
                        PropensitySpec::Constant { .. } => "(constant)",
                    };
                    bail!(
                        "row {row}: column '{column}': propensity {p} outside (0, 1) at stage {k}"
                    );
                }
                p
            };
            stages.push(StageObservation {
                features,
                action,
                reward,
                propensity,
            });
            eligible.push(is_eligible);
        }
        let traj = Trajectory::new(stages, eligible)
            .with_context(|| format!("row {row}: invalid trajectory"))?;
        out.push(traj);
    }
    if out.is_empty() {
        bail!("no data rows in {}", path.display());
    }
    Ok(out)
}

/// Writes trajectories as a wide CSV under the given schema (RFC-4180-style
/// quoting via the `csv` crate).
pub fn write_csv(path: &Path, data: &[Trajectory], schema: &DatasetSchema) -> Result<()> {
    schema.validate()?;
    let mut writer =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    let header: Vec<String> = schema.columns().iter().map(|s| s.to_string()).collect();
    writer.write_record(&header)?;
    for (subject, traj) in data.iter().enumerate() {
        if traj.n_stages() != schema.n_stages() {
            bail!(
                "subject {subject} has {} stages but the schema describes {}",
                traj.n_stages(),
                schema.n_stages()
            );
        }
        let mut record: Vec<String> = Vec::with_capacity(header.len());
        for (idx, stage_schema) in schema.stages.iter().enumerate() {
            let stage = &traj.stages[idx];
            if stage.features.len() != stage_schema.features.len() {
                bail!(
                    "subject {subject} stage {} has {} features but the schema lists {}",
                    idx + 1,
                    stage.features.len(),
                    stage_schema.features.len()
                );
            }
            for v in &stage.features {
                record.push(format!("{v}"));
            }
            record.push(format!("{}", stage.action));
            record.push(format!("{}", stage.reward));
            if let PropensitySpec::Column { .. } = stage_schema.propensity {
                record.push(format!("{}", stage.propensity));
            }
            if stage_schema.eligible.is_some() {
                record.push(format!("{}", traj.eligible[idx]));
            }
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}
