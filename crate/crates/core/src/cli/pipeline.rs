use super::{CliError, Settings};
use crate::dtree::{grid_search, DecisionTree, Samples};
use crate::eval::{evaluate, EvalReport};
use crate::featurize::{FeatureSpace, Featurizer, SparseLexicon};
use crate::report::RunMetadata;
use crate::ruleset::{build_rules, label_leaves, null_distribution, Rule};
use crate::taskgen::{extract, Dataset};
use crate::treebank::Corpus;

/// Everything one extraction run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub tree: DecisionTree,
    pub space: FeatureSpace,
    pub rules: Vec<Rule>,
    pub eval: EvalReport,
    pub metadata: RunMetadata,
    pub valid_accuracy: f64,
}

fn dataset(corpus: &Corpus, settings: &Settings) -> Result<Dataset, CliError> {
    let ds = extract(corpus, settings.task, &settings.key, &settings.relations)
        .map_err(|e| CliError::Config(e.to_string()))?;
    if ds.is_empty() {
        return Err(CliError::EmptyData(format!(
            "no {} instances for {:?} in the {} split{}",
            settings.task,
            settings.key,
            corpus.split,
            if corpus.treebank_id.is_empty() {
                String::new()
            } else {
                format!(" of {}", corpus.treebank_id)
            },
        )));
    }
    Ok(ds)
}

/// Label indices in the training label order; labels unseen in training
/// map to `None`.
fn label_ids(train: &Dataset, other: &Dataset) -> Vec<Option<usize>> {
    other
        .instances
        .iter()
        .map(|i| train.label_index(&i.label))
        .collect()
}

/// Builds datasets for the three splits, selects a tree on the
/// validation split, labels its leaves, extracts rules with examples and
/// scores the model on the test split.
pub fn run_pipeline(
    settings: &Settings,
    corpora: &[Corpus; 3],
    lexicon: Option<&SparseLexicon>,
) -> Result<RunOutput, CliError> {
    let [train_c, valid_c, test_c] = corpora;
    let train = dataset(train_c, settings)?;
    let valid = dataset(valid_c, settings)?;
    let test = dataset(test_c, settings)?;

    let featurizer = Featurizer::for_dataset(settings.features, lexicon, &train)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (space, train_rows) = featurizer.fit(&train, train_c).map_err(CliError::other)?;
    let valid_rows = featurizer.transform(&space, &valid, valid_c);
    let test_rows = featurizer.transform(&space, &test, test_c);

    let train_labels: Vec<usize> = label_ids(&train, &train)
        .into_iter()
        .map(|l| l.expect("training labels are in the training label set"))
        .collect();
    let samples = Samples {
        rows: &train_rows,
        labels: &train_labels,
        kinds: space.kinds(),
        label_names: &train.labels,
    };
    let chosen = grid_search(
        &samples,
        &valid_rows,
        &label_ids(&train, &valid),
        &settings.grid,
    )
    .map_err(CliError::other)?;

    let null = null_distribution(&train, train_c).map_err(CliError::other)?;
    let tree = label_leaves(chosen.tree, &null, settings.alpha);
    let rules = build_rules(
        &tree,
        &space,
        &train,
        &train_rows,
        train_c,
        settings.seed,
        settings.examples_per_rule,
    );
    let eval = evaluate(&tree, &train, &test, &test_rows, settings.tau).map_err(CliError::other)?;
    let metadata = RunMetadata {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        treebank_id: train_c.treebank_id.clone(),
        language: train_c.language.clone(),
        task: settings.task,
        task_key: settings.key.clone(),
        features: settings.features.to_string(),
        seed: settings.seed,
        alpha: settings.alpha,
        tau: settings.tau,
        params: chosen.params,
        n_train: train.len(),
        n_valid: valid.len(),
        n_test: test.len(),
    };
    Ok(RunOutput {
        tree,
        space,
        rules,
        eval,
        metadata,
        valid_accuracy: chosen.valid_accuracy,
    })
}
