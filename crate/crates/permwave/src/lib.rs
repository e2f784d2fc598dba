//! Std companion to `permwave-core`: rayon-backed runners, CSV/JSON tables,
//! run manifests and the `permwave` command line.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod parallel;
pub mod reproduce;
pub mod run;
pub mod table;
