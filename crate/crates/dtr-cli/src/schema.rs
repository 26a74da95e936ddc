//! Dataset schemas: how trajectory fields map onto wide-format CSV columns.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Where a stage's randomization probability comes from: a CSV column or a
/// design constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropensitySpec {
    Column { column: String },
    Constant { constant: f64 },
}

/// One stage's column bindings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageSchema {
    pub features: Vec<String>,
    pub action: String,
    pub reward: String,
    pub propensity: PropensitySpec,
    /// Optional eligibility column; absent means every subject is randomized
    /// at this stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eligible: Option<String>,
}

/// Wide-format dataset description: one subject per row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub version: u32,
    pub stages: Vec<StageSchema>,
}

impl DatasetSchema {
    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            bail!(
                "unsupported schema version {}, expected {}",
                self.version,
                SCHEMA_VERSION
            );
        }
        if self.stages.is_empty() {
            bail!("schema has no stages");
        }
        for (idx, stage) in self.stages.iter().enumerate() {
            if let PropensitySpec::Constant { constant } = &stage.propensity {
                if !(constant > &0.0 && constant < &1.0) {
                    bail!(
                        "stage {} propensity constant {} outside (0, 1)",
                        idx + 1,
                        constant
                    );
                }
            }
        }
        Ok(())
    }

    /// All column names the schema references, in a stable order.
    pub fn columns(&self) -> Vec<&str> {
        let mut cols = Vec::new();
        for stage in &self.stages {
            cols.extend(stage.features.iter().map(String::as_str));
            cols.push(stage.action.as_str());
            cols.push(stage.reward.as_str());
            if let PropensitySpec::Column { column } = &stage.propensity {
                cols.push(column.as_str());
            }
            if let Some(col) = &stage.eligible {
                cols.push(col.as_str());
            }
        }
        cols
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading schema {}", path.display()))?;
        let schema: DatasetSchema =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n")
            .with_context(|| format!("writing schema {}", path.display()))?;
        Ok(())
    }

    /// Schema for the built-in simulation scenarios: stage-1 features
    /// `x1_1..x1_d`, then `a{k}`, `r{k}`, `pi{k}` per stage.
    pub fn for_setting(kind: dtr::SettingKind) -> Self {
        let dims = kind.feature_dims();
        let stages = dims
            .iter()
            .enumerate()
            .map(|(idx, d)| {
                let k = idx + 1;
                StageSchema {
                    features: (1..=*d).map(|j| format!("x{k}_{j}")).collect(),
                    action: format!("a{k}"),
                    reward: format!("r{k}"),
                    propensity: PropensitySpec::Column {
                        column: format!("pi{k}"),
                    },
                    eligible: None,
                }
            })
            .collect();
        DatasetSchema {
            version: SCHEMA_VERSION,
            stages,
        }
    }
}
