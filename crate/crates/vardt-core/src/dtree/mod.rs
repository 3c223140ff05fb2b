//! Decision trees over per-test variable values.
//!
//! A method's sliced variable occurrences become the columns of a feature
//! table, one row per covering test, labeled pass or fail. Trees grown on
//! that table split where a variable's value separates the failing runs,
//! so the predicates near the top of a tree point at suspicious variables.

pub mod build;
pub mod stats;
pub mod table;

pub use build::{
    build_model, build_tree, render_model, Branch, InsufficientTests, Predicate, Tree,
};
pub use table::{
    build_feature_table, dep_scores, CandidateVar, ColumnKind, FeatureTable, FeatureValue,
};
