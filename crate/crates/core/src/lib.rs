//! Static detection of code perfumes in Scratch 3 projects.
//!
//! A code perfume is the positive counterpart of a code smell: a block
//! idiom showing that a programming concept was applied correctly. The
//! pipeline is `ingest` (sb3 / project.json) -> `ast` (typed scripts) ->
//! `perfumes` (25 pattern matchers) plus `metrics`, with `report` and
//! `corpus` on top.

pub mod ast;
pub mod cli;
pub mod corpus;
pub mod ingest;
pub mod metrics;
pub mod perfumes;
pub mod report;

use thiserror::Error;

/// Failure to analyze a single project.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] ingest::IngestError),
    #[error(transparent)]
    Ast(#[from] ast::AstError),
}
