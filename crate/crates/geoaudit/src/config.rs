//! Experiment configuration: one TOML file fully determines a run.

use crate::census_sim;
use crate::dataprep::{ColumnKind, ColumnSpec, FeatureSchema};
use crate::error::{Error, Result};
use crate::nncore::TrainConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default = "default_final_width")]
    pub final_width: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    pub data: DataConfig,
    /// Feature list; defaults to the census 9-feature encoding for tabular
    /// sources and all generated columns for synthetic ones.
    #[serde(default)]
    pub features: Option<Vec<String>>,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub stress: Option<StressSection>,
    #[serde(default)]
    pub baselines: BaselineSection,
}

fn default_out_dir() -> String {
    "out".into()
}

fn default_final_width() -> usize {
    32
}

fn default_train_fraction() -> f64 {
    0.8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataConfig {
    /// Comma-separated file in the census 15-column layout, or with an
    /// explicit schema.
    Csv {
        path: String,
        #[serde(default)]
        schema: Option<SchemaSection>,
    },
    /// Synthetic XOR task with a leaking shortcut column.
    Xor {
        n: usize,
        leak_rate: f64,
        #[serde(default)]
        noise_std: f64,
    },
    /// Generated census-style table (see `census_sim`).
    CensusSim {
        #[serde(default = "default_census_n")]
        n: usize,
        #[serde(default)]
        leak_rate: Option<f64>,
        #[serde(default)]
        label_noise: Option<f64>,
    },
}

fn default_census_n() -> usize {
    6000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSection {
    pub target: String,
    pub positive_label: String,
    pub columns: Vec<ColumnSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSection {
    pub name: String,
    pub kind: String,
    #[serde(default)]
    pub categories: Option<Vec<String>>,
}

impl SchemaSection {
    pub fn to_schema(&self) -> Result<FeatureSchema> {
        let mut columns = Vec::with_capacity(self.columns.len());
        for col in &self.columns {
            let kind = match col.kind.as_str() {
                "numeric" => ColumnKind::Numeric,
                "ignored" => ColumnKind::Ignored,
                "categorical" => ColumnKind::Categorical(
                    col.categories
                        .clone()
                        .ok_or_else(|| {
                            Error::Config(format!(
                                "categorical column {:?} needs a categories list",
                                col.name
                            ))
                        })?,
                ),
                other => {
                    return Err(Error::Config(format!(
                        "column {:?} has unknown kind {other:?}",
                        col.name
                    )))
                }
            };
            columns.push(ColumnSpec {
                name: col.name.clone(),
                kind,
            });
        }
        let schema = FeatureSchema {
            columns,
            target_column: self.target.clone(),
            positive_label: self.positive_label.clone(),
        };
        schema.validate()?;
        Ok(schema)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSection {
    pub probe_learning_rate: f64,
    pub mlp_learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            probe_learning_rate: 0.1,
            mlp_learning_rate: 0.05,
            epochs: 200,
            batch_size: 64,
        }
    }
}

impl TrainSection {
    pub fn probe_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.probe_learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
            l1_lambda: 0.0,
            init_scale: 1.0,
        }
    }

    pub fn mlp_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.mlp_learning_rate,
            ..self.probe_config(seed)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub widths: Vec<usize>,
    pub seeds_per_point: usize,
    pub aggregation: String,
    pub delta: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            widths: crate::capacity::DEFAULT_WIDTHS.to_vec(),
            seeds_per_point: 3,
            aggregation: "mean".into(),
            delta: crate::capacity::DEFAULT_TRANSITION_DELTA,
        }
    }
}

impl SweepSection {
    pub fn aggregation(&self) -> Result<crate::capacity::Aggregation> {
        match self.aggregation.as_str() {
            "mean" => Ok(crate::capacity::Aggregation::Mean),
            "best" => Ok(crate::capacity::Aggregation::Best),
            other => Err(Error::Config(format!("unknown aggregation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressSection {
    pub inject_feature: String,
    pub inject_value: f64,
    pub override_group: String,
    pub override_category: String,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    0.5
}

impl StressSection {
    pub fn census_default() -> Self {
        StressSection {
            inject_feature: "capital-gain".into(),
            inject_value: 99999.0,
            override_group: "relationship".into(),
            override_category: "Husband".into(),
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    pub enabled: bool,
    pub l1_lambda: f64,
    pub jtt_upweight: usize,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            enabled: true,
            l1_lambda: 0.05,
            jtt_upweight: 5,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} not in (0,1)",
                self.train_fraction
            )));
        }
        if self.final_width == 0 {
            return Err(Error::Config("final_width must be >= 1".into()));
        }
        self.sweep.aggregation()?;
        Ok(())
    }

    /// The effective feature list for tabular data sources.
    pub fn effective_features(&self) -> Vec<String> {
        match (&self.features, &self.data) {
            (Some(list), _) => list.clone(),
            (None, DataConfig::Xor { .. }) => {
                vec!["x1".into(), "x2".into(), "shortcut".into()]
            }
            (None, _) => census_sim::default_features(),
        }
    }

    /// The effective stress scenarios, if any.
    pub fn effective_stress(&self) -> Option<StressSection> {
        match (&self.stress, &self.data) {
            (Some(s), _) => Some(s.clone()),
            (None, DataConfig::Xor { .. }) => None,
            (None, _) => Some(StressSection::census_default()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_census_config_parses() {
        let cfg = ExperimentConfig::from_toml(
            "seed = 42\n[data]\nkind = \"census-sim\"\nn = 1000\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.final_width, 32);
        assert_eq!(cfg.effective_features().len(), 9);
        assert!(cfg.effective_stress().is_some());
    }

    #[test]
    fn xor_config_defaults() {
        let cfg = ExperimentConfig::from_toml(
            "[data]\nkind = \"xor\"\nn = 2000\nleak_rate = 1.0\n",
        )
        .unwrap();
        assert_eq!(cfg.effective_features(), vec!["x1", "x2", "shortcut"]);
        assert!(cfg.effective_stress().is_none());
    }

    #[test]
    fn invalid_fields_rejected() {
        assert!(ExperimentConfig::from_toml("[data]\nkind = \"nope\"\n").is_err());
        assert!(ExperimentConfig::from_toml(
            "train_fraction = 1.5\n[data]\nkind = \"census-sim\"\n"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml(
            "unknown_key = 1\n[data]\nkind = \"census-sim\"\n"
        )
        .is_err());
    }

    #[test]
    fn explicit_schema_roundtrip() {
        let text = r#"
[data]
kind = "csv"
path = "table.csv"

[data.schema]
target = "label"
positive_label = "yes"
columns = [
  { name = "x", kind = "numeric" },
  { name = "c", kind = "categorical", categories = ["A", "B"] },
  { name = "label", kind = "categorical", categories = ["no", "yes"] },
]
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let DataConfig::Csv { schema: Some(s), .. } = &cfg.data else {
            panic!("expected csv with schema");
        };
        let schema = s.to_schema().unwrap();
        assert_eq!(schema.columns.len(), 3);
    }
}
