//! Command-line front end: `extract`, `cross-eval` and `synth`.
//!
//! Exit codes: 0 on success, 1 for internal or parse errors, 2 for
//! configuration errors (including unreadable input files), 3 when a
//! split yields no task instances.

mod config;
mod pipeline;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::dtree::TrainParams;
use crate::eval::cross_eval;
use crate::featurize::{load_sparse_lexicon, FeatureError, Featurizer, SparseLexicon};
use crate::report::{emit_html, emit_json, emit_markdown, emit_tree_json, SCHEMA_VERSION};
use crate::taskgen::{extract, Task};
use crate::treebank::{
    generate_synthetic, load_corpus, write_conllu, Corpus, Order, PlantedRule, Split, TreebankError,
};

pub use config::{Config, GridConfig, OutputFormat, Settings, TreebankPaths, DEFAULT_SEED};
pub use pipeline::{run_pipeline, RunOutput};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no data: {0}")]
    EmptyData(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::EmptyData(_) => 3,
            CliError::Other(_) => 1,
        }
    }

    pub(crate) fn other(e: impl std::fmt::Display) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<TreebankError> for CliError {
    fn from(e: TreebankError) -> Self {
        match e {
            TreebankError::Io { .. } => CliError::Config(e.to_string()),
            _ => CliError::Other(e.to_string()),
        }
    }
}

impl From<FeatureError> for CliError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::Io { .. }
            | FeatureError::MissingLexicon
            | FeatureError::NoFeatureFamilies => CliError::Config(e.to_string()),
            FeatureError::NoInstances => CliError::EmptyData(e.to_string()),
            FeatureError::Lexicon { .. } => CliError::Other(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lexrules",
    version,
    about = "Extract interpretable grammar rules from dependency treebanks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model for one task and write tree, rules, reports and scores.
    Extract(RunArgs),
    /// Train on each configured treebank and test on every other one.
    CrossEval(RunArgs),
    /// Write a synthetic corpus with a planted word-order rule.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// word-order, case or agreement.
    #[arg(long)]
    task: Option<Task>,
    /// Relation name, POS tag or agreement attribute.
    #[arg(long)]
    key: Option<String>,
    /// Feature families, e.g. syn,lex,sem.
    #[arg(long)]
    features: Option<String>,
    /// Sparse lexicon for semantic features.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Training split (with --valid and --test, replaces the config's treebank).
    #[arg(long, requires_all = ["valid", "test"])]
    train: Option<PathBuf>,
    #[arg(long, requires_all = ["train", "test"])]
    valid: Option<PathBuf>,
    #[arg(long, requires_all = ["train", "valid"])]
    test: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<Config, CliError> {
        let mut c = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(t) = self.task {
            c.task = Some(t);
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { c.$f = Some(v.clone()); } )* };
        }
        set!(key, features, lexicon, alpha, tau, seed, out, format);
        if let (Some(train), Some(valid), Some(test)) = (&self.train, &self.valid, &self.test) {
            c.treebank = Some(TreebankPaths {
                train: train.clone(),
                valid: valid.clone(),
                test: test.clone(),
                id: None,
                language: None,
            });
        }
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Number of sentences.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file, or directory with --splits.
    #[arg(long)]
    out: PathBuf,
    /// Write train/dev/test files (80/10/10) into the --out directory.
    #[arg(long)]
    splits: bool,
    #[arg(long, default_value = "ADJ")]
    dependent_upos: String,
    #[arg(long, default_value = "mod")]
    deprel: String,
    #[arg(long, default_value = "NOUN")]
    head_upos: String,
    #[arg(long, default_value = "NumType")]
    attribute: String,
    #[arg(long, default_value = "Ord")]
    value: String,
    /// Order of the dependent when it carries attribute=value.
    #[arg(long, default_value = "before")]
    when_present: Order,
    #[arg(long, default_value = "after")]
    otherwise: Order,
    /// Share of dependents carrying attribute=value.
    #[arg(long, default_value_t = 0.3)]
    match_rate: f64,
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Extract(a) => a.config().and_then(|c| cmd_extract(&c)),
        Command::CrossEval(a) => a.config().and_then(|c| cmd_cross_eval(&c)),
        Command::Synth(a) => cmd_synth(&a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lexrules: {e}");
            e.exit_code()
        }
    }
}

fn load_treebank(paths: &TreebankPaths) -> Result<[Corpus; 3], CliError> {
    let load = |p: &Path, split| -> Result<Corpus, CliError> {
        let mut c = load_corpus(p, split)?;
        if let Some(id) = &paths.id {
            c.treebank_id = id.clone();
        }
        if let Some(lang) = &paths.language {
            c.language = lang.clone();
        }
        Ok(c)
    };
    Ok([
        load(&paths.train, Split::Train)?,
        load(&paths.valid, Split::Valid)?,
        load(&paths.test, Split::Test)?,
    ])
}

fn load_lexicon(settings: &Settings) -> Result<Option<SparseLexicon>, CliError> {
    match (&settings.lexicon, settings.features.semantic) {
        (Some(p), true) => Ok(Some(load_sparse_lexicon(p, settings.top_k)?)),
        _ => Ok(None),
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, bytes)
        .map_err(|e| CliError::Other(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Other(format!("cannot create {}: {e}", dir.display())))
}

/// Trains on the configured treebank and writes `tree.json`, `eval.json`
/// and the rule reports selected by the format.
pub fn cmd_extract(config: &Config) -> Result<(), CliError> {
    let settings = Settings::from_config(config)?;
    let paths = config.treebank.as_ref().ok_or_else(|| {
        CliError::Config(
            "no treebank given: set \"treebank\" or pass --train/--valid/--test".into(),
        )
    })?;
    let corpora = load_treebank(paths)?;
    let lexicon = load_lexicon(&settings)?;
    let run = run_pipeline(&settings, &corpora, lexicon.as_ref())?;

    let out = &settings.out;
    create_dir(out)?;
    write(
        out,
        "tree.json",
        &emit_tree_json(&run.tree, &run.space, &run.metadata),
    )?;
    let mut eval_json = serde_json::to_vec_pretty(&run.eval).map_err(CliError::other)?;
    eval_json.push(b'\n');
    write(out, "eval.json", &eval_json)?;
    if settings.format.json() {
        write(
            out,
            "rules.json",
            &emit_json(&run.rules, Some(&run.eval), &run.metadata),
        )?;
    }
    if settings.format.markdown() {
        write(
            out,
            "rules.md",
            &emit_markdown(&run.rules, Some(&run.eval), &run.metadata),
        )?;
    }
    if settings.format.html() {
        write(
            out,
            "rules.html",
            &emit_html(&run.rules, Some(&run.eval), &run.metadata),
        )?;
    }
    let significant = run.rules.iter().filter(|r| r.is_significant()).count();
    println!(
        "{} {}: {} rules ({} significant), test accuracy {:.4} vs baseline {:.4}; wrote {}",
        settings.task,
        settings.key,
        run.rules.len(),
        significant,
        run.eval.model_accuracy,
        run.eval.baseline_accuracy,
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct CrossEvalRow {
    source: String,
    /// `None` when the source has no instances to train on.
    params: Option<TrainParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
    /// Accuracy on each treebank's test split, in `treebanks` order;
    /// `null` where that split has no instances.
    accuracy: Vec<Option<f64>>,
}

#[derive(Debug, Serialize)]
struct CrossEvalMatrix {
    schema_version: u32,
    task: Task,
    task_key: String,
    features: String,
    treebanks: Vec<String>,
    n_test: Vec<usize>,
    rows: Vec<CrossEvalRow>,
}

/// Trains one model per treebank and applies each to every treebank's
/// test split. Writes `cross_eval.json`.
pub fn cmd_cross_eval(config: &Config) -> Result<(), CliError> {
    let settings = Settings::from_config(config)?;
    if config.treebanks.len() < 2 {
        return Err(CliError::Config(format!(
            "cross-eval needs at least 2 treebanks, got {}",
            config.treebanks.len()
        )));
    }
    let lexicon = load_lexicon(&settings)?;
    let corpora: Vec<[Corpus; 3]> = config
        .treebanks
        .iter()
        .map(load_treebank)
        .collect::<Result<_, _>>()?;
    let targets: Vec<_> = corpora
        .iter()
        .map(|[_, _, test]| {
            extract(test, settings.task, &settings.key, &settings.relations)
                .map(|ds| (ds, test))
                .map_err(|e| CliError::Config(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let target_refs: Vec<_> = targets.iter().map(|(ds, c)| (ds, *c)).collect();
    let names: Vec<String> = corpora
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if c[0].treebank_id.is_empty() {
                format!("treebank-{i}")
            } else {
                c[0].treebank_id.clone()
            }
        })
        .collect();

    let featurizer = Featurizer::new(
        settings.features,
        lexicon.as_ref(),
        settings.task,
        &settings.key,
    )?;
    let mut rows = Vec::new();
    for (name, tb) in names.iter().zip(&corpora) {
        let row = match run_pipeline(&settings, tb, lexicon.as_ref()) {
            Ok(run) => CrossEvalRow {
                source: name.clone(),
                params: Some(run.metadata.params),
                skipped: None,
                accuracy: cross_eval(&run.tree, &run.space, &featurizer, &target_refs),
            },
            Err(CliError::EmptyData(why)) => CrossEvalRow {
                source: name.clone(),
                params: None,
                skipped: Some(why),
                accuracy: vec![None; target_refs.len()],
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    let matrix = CrossEvalMatrix {
        schema_version: SCHEMA_VERSION,
        task: settings.task,
        task_key: settings.key.clone(),
        features: settings.features.to_string(),
        treebanks: names,
        n_test: targets.iter().map(|(ds, _)| ds.len()).collect(),
        rows,
    };
    create_dir(&settings.out)?;
    let mut bytes = serde_json::to_vec_pretty(&matrix).map_err(CliError::other)?;
    bytes.push(b'\n');
    write(&settings.out, "cross_eval.json", &bytes)?;
    println!(
        "cross-eval over {} treebanks; wrote {}",
        matrix.treebanks.len(),
        settings.out.display()
    );
    Ok(())
}

fn conllu_bytes(corpus: &Corpus) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_conllu(corpus, &mut buf).map_err(CliError::other)?;
    Ok(buf)
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.match_rate) {
        return Err(CliError::Config(format!(
            "--match-rate must lie in [0, 1], got {}",
            args.match_rate
        )));
    }
    let rule = PlantedRule {
        dependent_upos: args.dependent_upos.clone(),
        deprel: args.deprel.clone(),
        head_upos: args.head_upos.clone(),
        attribute: args.attribute.clone(),
        value: args.value.clone(),
        when_present: args.when_present,
        otherwise: args.otherwise,
        match_rate: args.match_rate,
    };
    let corpus = generate_synthetic(&rule, args.n, args.seed);
    if !args.splits {
        if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
            create_dir(dir)?;
        }
        std::fs::write(&args.out, conllu_bytes(&corpus)?)
            .map_err(|e| CliError::Other(format!("cannot write {}: {e}", args.out.display())))?;
        println!("wrote {} sentences to {}", corpus.len(), args.out.display());
        return Ok(());
    }
    create_dir(&args.out)?;
    let n_train = args.n * 8 / 10;
    let n_valid = args.n / 10;
    let mut rest = corpus.sentences;
    let test = rest.split_off(n_train + n_valid);
    let valid = rest.split_off(n_train);
    for (name, sentences, split) in [
        ("train", rest, Split::Train),
        ("dev", valid, Split::Valid),
        ("test", test, Split::Test),
    ] {
        let part =
            Corpus::new(sentences, split).with_identity(&corpus.language, &corpus.treebank_id);
        write(
            &args.out,
            &format!("synth-sud-{name}.conllu"),
            &conllu_bytes(&part)?,
        )?;
    }
    println!(
        "wrote {} sentences as train/dev/test to {}",
        args.n,
        args.out.display()
    );
    Ok(())
}
