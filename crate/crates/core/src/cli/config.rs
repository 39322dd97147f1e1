use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::dtree::{Criterion, TrainParams, GRID_DEPTHS};
use crate::eval::DEFAULT_TAU;
use crate::featurize::{FeatureFlags, DEFAULT_TOP_K};
use crate::ruleset::{DEFAULT_ALPHA, DEFAULT_EXAMPLES_PER_RULE};
use crate::taskgen::{RelationSpec, Task};

pub const DEFAULT_SEED: u64 = 7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Md,
    Html,
    #[default]
    All,
}

impl OutputFormat {
    pub fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::All)
    }

    pub fn markdown(self) -> bool {
        matches!(self, OutputFormat::Md | OutputFormat::All)
    }

    pub fn html(self) -> bool {
        matches!(self, OutputFormat::Html | OutputFormat::All)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreebankPaths {
    pub train: PathBuf,
    pub valid: PathBuf,
    pub test: PathBuf,
    /// Overrides the id guessed from the file names.
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub language: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "all_criteria")]
    pub criteria: Vec<Criterion>,
    #[serde(default = "all_depths")]
    pub depths: Vec<usize>,
}

fn all_criteria() -> Vec<Criterion> {
    vec![Criterion::Gini, Criterion::Entropy]
}

fn all_depths() -> Vec<usize> {
    GRID_DEPTHS.to_vec()
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            criteria: all_criteria(),
            depths: all_depths(),
        }
    }
}

/// The JSON configuration file. Every field is optional here; required
/// ones are checked when the config is resolved into [`Settings`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub treebank: Option<TreebankPaths>,
    /// Treebanks compared by `cross-eval`.
    #[serde(default)]
    pub treebanks: Vec<TreebankPaths>,
    pub task: Option<Task>,
    pub key: Option<String>,
    pub features: Option<String>,
    pub lexicon: Option<PathBuf>,
    pub top_k: Option<usize>,
    pub grid: Option<GridConfig>,
    pub min_leaf: Option<usize>,
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub examples_per_rule: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    /// Word-order relations added to, or replacing by name, the defaults.
    #[serde(default)]
    pub relations: Vec<RelationSpec>,
}

impl Config {
    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: Config = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.rebase(base);
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for tb in self.treebank.iter_mut().chain(self.treebanks.iter_mut()) {
            fix(&mut tb.train);
            fix(&mut tb.valid);
            fix(&mut tb.test);
        }
        if let Some(p) = self.lexicon.as_mut() {
            fix(p);
        }
        if let Some(p) = self.out.as_mut() {
            fix(p);
        }
    }
}

/// A fully resolved run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub task: Task,
    pub key: String,
    pub features: FeatureFlags,
    pub lexicon: Option<PathBuf>,
    pub top_k: usize,
    pub grid: Vec<TrainParams>,
    pub alpha: f64,
    pub tau: f64,
    pub seed: u64,
    pub examples_per_rule: usize,
    pub out: PathBuf,
    pub format: OutputFormat,
    pub relations: Vec<RelationSpec>,
}

impl Settings {
    pub fn from_config(config: &Config) -> Result<Settings, CliError> {
        let task = config
            .task
            .ok_or_else(|| CliError::Config("no task given".into()))?;
        let key = config.key.clone().ok_or_else(|| {
            CliError::Config("no task key given (relation, POS tag or attribute)".into())
        })?;
        let features = match &config.features {
            Some(list) => FeatureFlags::parse(list).map_err(CliError::Config)?,
            None => FeatureFlags::SYNTACTIC,
        };
        if features.is_empty() {
            return Err(CliError::Config("no feature families selected".into()));
        }
        if features.semantic && config.lexicon.is_none() {
            return Err(CliError::Config(
                "semantic features need a sparse lexicon: set \"lexicon\" or pass --lexicon".into(),
            ));
        }
        let alpha = config.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CliError::Config(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        let tau = config.tau.unwrap_or(DEFAULT_TAU);
        if !tau.is_finite() || tau < 0.0 {
            return Err(CliError::Config(format!(
                "tau must be a non-negative number, got {tau}"
            )));
        }
        let min_leaf = config.min_leaf.unwrap_or(1);
        let grid_config = config.grid.clone().unwrap_or_default();
        let grid: Vec<TrainParams> = grid_config
            .criteria
            .iter()
            .flat_map(|&c| {
                grid_config.depths.iter().map(move |&d| TrainParams {
                    criterion: c,
                    max_depth: d,
                    min_leaf,
                })
            })
            .collect();
        if grid.is_empty() {
            return Err(CliError::Config("the hyperparameter grid is empty".into()));
        }
        for p in &grid {
            p.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        let relations = crate::taskgen::merge_relations(&config.relations)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if task == Task::WordOrder {
            crate::taskgen::find_relation(&relations, &key)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        if task == Task::Agreement && !crate::taskgen::AGREEMENT_ATTRIBUTES.contains(&key.as_str())
        {
            return Err(CliError::Config(format!(
                "agreement key must be one of {:?}, got {key:?}",
                crate::taskgen::AGREEMENT_ATTRIBUTES
            )));
        }
        Ok(Settings {
            task,
            key,
            features,
            lexicon: config.lexicon.clone(),
            top_k: config.top_k.unwrap_or(DEFAULT_TOP_K),
            grid,
            alpha,
            tau,
            seed: config.seed.unwrap_or(DEFAULT_SEED),
            examples_per_rule: config
                .examples_per_rule
                .unwrap_or(DEFAULT_EXAMPLES_PER_RULE),
            out: config.out.clone().unwrap_or_else(|| PathBuf::from("out")),
            format: config.format.unwrap_or_default(),
            relations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Config {
        Config {
            task: Some(Task::WordOrder),
            key: Some("adjective-noun".into()),
            ..Default::default()
        }
    }

    #[test]
    fn defaults() {
        let s = Settings::from_config(&base()).unwrap();
        assert_eq!(s.grid, TrainParams::full_grid());
        assert_eq!(s.alpha, 0.01);
        assert_eq!(s.tau, 0.9);
        assert_eq!(s.features, FeatureFlags::SYNTACTIC);
        assert_eq!(s.format, OutputFormat::All);
    }

    #[test]
    fn semantic_without_lexicon_is_rejected() {
        let mut c = base();
        c.features = Some("syn,sem".into());
        let err = Settings::from_config(&c).unwrap_err();
        assert!(err.to_string().contains("lexicon"));
    }

    #[test]
    fn unknown_relation_and_fields() {
        let mut c = base();
        c.key = Some("verb-adverb".into());
        assert!(matches!(
            Settings::from_config(&c),
            Err(CliError::Config(_))
        ));
        assert!(serde_json::from_str::<Config>(r#"{"taks": "case"}"#).is_err());
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let json =
            r#"{"treebank": {"train": "a.conllu", "valid": "/abs/b.conllu", "test": "c.conllu"}}"#;
        let mut c: Config = serde_json::from_str(json).unwrap();
        c.rebase(Path::new("/cfg"));
        let tb = c.treebank.unwrap();
        assert_eq!(tb.train, PathBuf::from("/cfg/a.conllu"));
        assert_eq!(tb.valid, PathBuf::from("/abs/b.conllu"));
    }
}
