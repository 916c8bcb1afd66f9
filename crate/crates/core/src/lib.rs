//! Paper-level novelty scoring over historical knowledge networks.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`corpus`] ingests line-delimited paper records (id, year, knowledge-unit
//!    terms) and filters out records with fewer than two terms.
//! 2. [`histnet`] builds, for each focal year, a co-occurrence network over the
//!    terms of all papers in the preceding window of years.
//! 3. [`pairdist`] computes pairwise distances between a focal paper's terms
//!    against that network (five methods), and [`embed`] trains the term
//!    embeddings backing one of them.
//! 4. [`traversal`] computes the cognitive traversal distance: the minimum
//!    total weight of a walk visiting all of the paper's terms, via metric
//!    closure plus an exact or heuristic open-path solver.
//! 5. [`scoring`] assembles per-paper scores (traversal length, normalized
//!    form, mean and 90th-percentile baselines) and corpus statistics, and
//!    [`eval`] validates scores against labeled benchmarks with matched
//!    controls, probit regression, and AUC.
//!
//! [`synth`] provides seeded synthetic-corpus generators used by tests and
//! benchmarks.

pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod histnet;
pub mod matrix;
pub mod pairdist;
pub mod scoring;
pub mod synth;
pub mod traversal;

pub use corpus::{CorpusIndex, PaperRecord};
pub use error::{Error, Result};
pub use histnet::{EdgeClass, HistoricalNetwork};
pub use matrix::SquareMatrix;
pub use pairdist::{DistanceMethod, FocalDistanceMatrix};
pub use scoring::NoveltyScore;
pub use traversal::{SolverKind, TraversalResult};
