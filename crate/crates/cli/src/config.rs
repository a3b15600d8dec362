use std::fmt;
use std::path::{Path, PathBuf};

use gmapprox::costs::Table1Config;
use gmapprox::drift::DriftModel;
use gmapprox::neuro::Table2Config;
use gmapprox::sde::LinearSDE;
use gmapprox::timebase::TimeGrid;
use serde::{Deserialize, Serialize};

/// A config problem, tagged with the section or field it concerns.
#[derive(Debug)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error in `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdeSection {
    pub theta: f64,
    pub sigma: f64,
    pub x0: f64,
}

impl Default for SdeSection {
    fn default() -> Self {
        SdeSection {
            theta: 1.5,
            sigma: 1.0,
            x0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { horizon: 5.0, dt: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub n_paths: usize,
    pub seed: u64,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            n_paths: 10_000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostsSection {
    pub p_list: Vec<u32>,
}

impl Default for CostsSection {
    fn default() -> Self {
        CostsSection { p_list: vec![2, 4] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv],
        }
    }
}

fn default_model() -> DriftModel {
    DriftModel::SingleShot { lambda: 2.0 }
}

/// Everything a run needs. The `table1` and `table2` sections configure the
/// two reproduction commands; the rest drives the single-model commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sde: SdeSection,
    pub grid: GridSection,
    pub model: DriftModel,
    pub mc: McSection,
    pub costs: CostsSection,
    pub output: OutputSection,
    pub table1: Table1Config,
    pub table2: Table2Config,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sde: SdeSection::default(),
            grid: GridSection::default(),
            model: default_model(),
            mc: McSection::default(),
            costs: CostsSection::default(),
            output: OutputSection::default(),
            table1: Table1Config::default(),
            table2: Table2Config::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads TOML, or JSON when the file ends in `.json`.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let file = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(&file, e))?;
        let cfg: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)
                .map_err(|e| ConfigError::new(&file, format!("line {}, column {}: {e}", e.line(), e.column())))?
        } else {
            toml::from_str(&text).map_err(|e| ConfigError::new(&file, e))?
        };
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        TimeGrid::new(self.grid.horizon, self.grid.dt).map_err(|e| ConfigError::new("grid", e))
    }

    pub fn sde(&self) -> Result<LinearSDE, ConfigError> {
        LinearSDE::new(self.sde.theta, self.sde.sigma, self.sde.x0, self.grid()?)
            .map_err(|e| ConfigError::new("sde", e))
    }

    /// Every section's own invariants, reported against the section name.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let grid = self.sde()?.grid().to_owned();
        self.model.validate().map_err(|e| ConfigError::new("model", e))?;
        self.model
            .check_pairing(self.sde.theta)
            .map_err(|e| ConfigError::new("model", e))?;
        if let DriftModel::Deterministic { f } = &self.model {
            if *f.grid() != grid {
                return Err(ConfigError::new("model.f", "must live on the configured grid"));
            }
        }
        if self.mc.n_paths < 2 {
            return Err(ConfigError::new("mc.n_paths", "need at least two paths"));
        }
        if self.costs.p_list.is_empty() {
            return Err(ConfigError::new("costs.p_list", "must not be empty"));
        }
        if let Some(p) = self.costs.p_list.iter().find(|&&p| p < 2 || !p.is_multiple_of(2)) {
            return Err(ConfigError::new(
                "costs.p_list",
                format!("exponents must be even and >= 2, got {p}"),
            ));
        }
        if self.output.formats.is_empty() {
            return Err(ConfigError::new("output.formats", "must not be empty"));
        }
        self.table1.grid().map_err(|e| ConfigError::new("table1", e))?;
        if self.table1.n_paths < 2 {
            return Err(ConfigError::new("table1.n_paths", "need at least two paths"));
        }
        self.table2.grid().map_err(|e| ConfigError::new("table2", e))?;
        if self.table2.n_paths < 2 {
            return Err(ConfigError::new("table2.n_paths", "need at least two paths"));
        }
        for (name, m) in self.table2.scenarios() {
            m.validate()
                .map_err(|e| ConfigError::new(format!("table2 ({name})"), e))?;
        }
        Ok(())
    }

    pub fn wants(&self, format: Format) -> bool {
        self.output.formats.contains(&format)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!((c.sde.theta, c.sde.sigma, c.sde.x0), (1.5, 1.0, 0.0));
        assert_eq!((c.grid.horizon, c.grid.dt), (5.0, 1e-3));
        assert_eq!(c.mc.n_paths, 10_000);
        c.validate().unwrap();
    }

    #[test]
    fn partial_toml_fills_defaults() {
        let c: ExperimentConfig =
            toml::from_str("[sde]\ntheta = 2.0\n[model]\ntype = \"poisson\"\nlambda = 3.0\n[grid]\nT = 1.0\n").unwrap();
        assert_eq!(c.sde.theta, 2.0);
        assert_eq!(c.sde.sigma, 1.0);
        assert_eq!(c.grid.horizon, 1.0);
        assert_eq!(c.model, DriftModel::Poisson { lambda: 3.0 });
    }

    #[test]
    fn unknown_fields_are_rejected_with_location() {
        let err = toml::from_str::<ExperimentConfig>("[sde]\ntheta = 1.0\nthetta = 2.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("thetta") && msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn validation_names_the_offending_field() {
        let mut c = ExperimentConfig::default();
        c.costs.p_list = vec![2, 3];
        assert_eq!(c.validate().unwrap_err().field, "costs.p_list");
        let c = ExperimentConfig {
            model: DriftModel::SingleShot { lambda: 1.5 },
            ..ExperimentConfig::default()
        };
        assert_eq!(c.validate().unwrap_err().field, "model");
        let mut c = ExperimentConfig::default();
        c.grid.dt = -1.0;
        assert_eq!(c.validate().unwrap_err().field, "grid");
    }

    #[test]
    fn json_echo_round_trips() {
        let c = ExperimentConfig::default();
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
