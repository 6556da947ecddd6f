use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

use crate::args::{Format, GridQuantity};

/// Contents of a `--config` file. Each table mirrors the flags of one
/// subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub jobs: Option<usize>,
    pub eval: EvalConfig,
    pub sweep: SweepConfig,
    pub grid: GridConfig,
    pub verify: VerifyConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub n: Option<usize>,
    pub lambda: Option<f64>,
    pub nlambda: Option<f64>,
    pub quantity: Option<Vec<String>>,
    pub format: Option<Format>,
}

/// A list of values, or a `start:stop:step` string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Text(String),
}

impl Values {
    pub fn into_text(self) -> String {
        match self {
            Values::Text(s) => s,
            Values::List(v) => v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(","),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n: Option<Vec<usize>>,
    pub lambda: Option<Values>,
    pub nlambda: Option<Values>,
    pub quantity: Option<Vec<String>>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: Option<usize>,
    pub lambda: Option<f64>,
    pub nlambda: Option<f64>,
    pub quantity: Option<GridQuantity>,
    pub range: Option<Values>,
    pub resolution: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub n_max: Option<usize>,
    pub seed: Option<u64>,
    pub mc_samples: Option<u64>,
    pub tolerance_scale: Option<f64>,
    pub output: Option<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| crate::UsageError(format!("config {}: {e}", path.display())).into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_tables() {
        let c: Config = toml::from_str(
            r#"
            jobs = 3
            [eval]
            n = 2
            lambda = -1.0
            quantity = ["energy"]
            format = "json"
            [sweep]
            n = [2, 3]
            nlambda = "0:0.4:0.1"
            [grid]
            quantity = "d_aa"
            range = [-2.0, 2.0]
            [verify]
            n_max = 1
            "#,
        )
        .unwrap();
        assert_eq!(c.jobs, Some(3));
        assert_eq!(c.eval.format, Some(Format::Json));
        assert_eq!(c.sweep.nlambda.unwrap().into_text(), "0:0.4:0.1");
        assert_eq!(c.grid.quantity, Some(GridQuantity::DAa));
        assert_eq!(c.grid.range.unwrap().into_text(), "-2.0,2.0");
        assert_eq!(c.verify.n_max, Some(1));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[eval]\nlamda = 1.0\n").is_err());
    }
}
