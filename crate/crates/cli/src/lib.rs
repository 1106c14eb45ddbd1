//! Command-line front end: model files, expression parsing and reports.

pub mod document;
pub mod expr;
pub mod commands;
pub mod report;
