//! DSL parsing and report emission for the Gottlieb-sequence analyzer.
//!
//! The binary lives in `main.rs`; this library exposes the parser, renderer
//! and report machinery so integration tests can drive them directly.

pub mod parser;
pub mod report;
