//! Crate-wide error type aggregating the per-subsystem errors.

use thiserror::Error;

/// Any failure produced by the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error(transparent)]
    Network(#[from] crate::histnet::NetworkError),
    #[error(transparent)]
    Distance(#[from] crate::pairdist::DistanceError),
    #[error(transparent)]
    Embed(#[from] crate::embed::EmbedError),
    #[error(transparent)]
    Traversal(#[from] crate::traversal::TraversalError),
    #[error(transparent)]
    Eval(#[from] crate::eval::EvalError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
