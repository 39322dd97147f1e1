//! Grammar-rule induction from dependency treebanks.
//!
//! The pipeline turns a CoNLL-U treebank into classification datasets
//! ([`taskgen`]), extracts features of the focus words ([`featurize`]),
//! fits a decision tree ([`dtree`]), labels its leaves by a chi-squared
//! test and reads rules off the paths ([`ruleset`]), scores the model
//! ([`eval`]) and renders reports ([`report`]).

pub mod cli;
pub mod dtree;
pub mod eval;
pub mod featurize;
pub mod report;
pub mod ruleset;
pub mod taskgen;
pub mod treebank;
