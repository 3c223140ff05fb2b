//! Variable-level fault localization for MiniLang programs.
//!
//! The pipeline runs a test suite over a program, narrows attention to the
//! most suspicious methods, slices away statements unrelated to the
//! failures, fits small decision trees over the values variables took at
//! runtime, and ranks variables by how well those trees separate passing
//! from failing tests.

pub mod dtree;
pub mod evalkit;
#[cfg(test)]
pub(crate) mod fixtures;
pub mod lang;
pub mod patchfilter;
pub mod pipeline;
pub mod ranker;
pub mod runtime;
pub mod sbfl;
pub mod slicer;
