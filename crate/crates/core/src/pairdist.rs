//! Pairwise distances between knowledge-unit terms, and the focal paper's
//! complete distance matrix.
//!
//! Five methods share one contract: symmetric, zero diagonal, off-diagonal
//! values in (0, 1] (cosine methods may reach exactly 0 for proportional
//! historical vectors). Any pair containing a term unknown to the historical
//! network is assigned the ceiling distance 1 regardless of method.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::PaperRecord;
use crate::embed::EmbeddingTable;
use crate::histnet::{EdgeClass, HistoricalNetwork};
use crate::matrix::SquareMatrix;

/// Floor applied to the weighted geodesic so twin terms with identical
/// co-occurrence rows keep a strictly positive distance.
pub const GEO_WEIGHT_FLOOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("term {0:?} is not in the historical network; apply the new-node rule instead")]
    TermNotInNetwork(String),
    #[error("term {0:?} has no embedding; the table does not match the network")]
    MissingEmbedding(String),
    #[error("method `embed` requires an embedding table")]
    EmbeddingsRequired,
    #[error("self-pair {0:?}: distances are defined for distinct terms")]
    SelfPair(String),
    #[error("paper {id:?} has {n_terms} term(s); a distance matrix needs at least 2")]
    TooFewTerms { id: String, n_terms: usize },
    #[error("injected matrix: {0}")]
    InvalidInjected(String),
}

/// The five pairwise distance definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMethod {
    /// Cosine distance between binary term-paper incidence vectors.
    TermPaper,
    /// Cosine distance between term-term co-occurrence count rows.
    TermTerm,
    /// Cosine distance between trained term embeddings.
    Embed,
    /// 1 - 1/(hops + 1) over the unweighted historical graph.
    GeoDistance,
    /// Geodesic with the direct-link hop replaced by the term-term distance.
    GeoDistanceWeight,
}

impl DistanceMethod {
    pub const ALL: [DistanceMethod; 5] = [
        DistanceMethod::TermPaper,
        DistanceMethod::TermTerm,
        DistanceMethod::Embed,
        DistanceMethod::GeoDistance,
        DistanceMethod::GeoDistanceWeight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMethod::TermPaper => "term_paper",
            DistanceMethod::TermTerm => "term_term",
            DistanceMethod::Embed => "embed",
            DistanceMethod::GeoDistance => "geo_distance",
            DistanceMethod::GeoDistanceWeight => "geo_distance_weight",
        }
    }

    pub fn requires_embeddings(self) -> bool {
        matches!(self, DistanceMethod::Embed)
    }
}

impl fmt::Display for DistanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "term_paper" => Ok(DistanceMethod::TermPaper),
            "term_term" => Ok(DistanceMethod::TermTerm),
            "embed" => Ok(DistanceMethod::Embed),
            "geo_distance" => Ok(DistanceMethod::GeoDistance),
            "geo_distance_weight" => Ok(DistanceMethod::GeoDistanceWeight),
            other => Err(format!(
                "unknown method {other:?}; expected one of term_paper, term_term, embed, \
                 geo_distance, geo_distance_weight"
            )),
        }
    }
}

fn require_index(net: &HistoricalNetwork, term: &str) -> Result<u32, DistanceError> {
    net.index_of(term)
        .ok_or_else(|| DistanceError::TermNotInNetwork(term.to_string()))
}

fn check_distinct(t_i: &str, t_j: &str) -> Result<(), DistanceError> {
    if t_i == t_j {
        Err(DistanceError::SelfPair(t_i.to_string()))
    } else {
        Ok(())
    }
}

/// Cosine distance between the terms' binary historical-paper incidence
/// vectors, computed sparsely: 1 - cooc(i,j) / sqrt(doc(i) * doc(j)).
pub fn dist_term_paper(
    net: &HistoricalNetwork,
    t_i: &str,
    t_j: &str,
) -> Result<f64, DistanceError> {
    check_distinct(t_i, t_j)?;
    let i = require_index(net, t_i)?;
    let j = require_index(net, t_j)?;
    Ok(term_paper_by_index(net, i, j))
}

fn term_paper_by_index(net: &HistoricalNetwork, i: u32, j: u32) -> f64 {
    // Vocabulary terms appear in at least one paper, so the counts are
    // positive and the cosine is well defined.
    let denom = (net.doc_count(i) as f64 * net.doc_count(j) as f64).sqrt();
    (1.0 - net.cooc(i, j) as f64 / denom).clamp(0.0, 1.0)
}

/// Cosine distance between the terms' co-occurrence rows over the full
/// vocabulary. Rows carry a zero diagonal; an all-zero row (a term only ever
/// seen alone) is at distance 1 from everything.
pub fn dist_term_term(
    net: &HistoricalNetwork,
    t_i: &str,
    t_j: &str,
) -> Result<f64, DistanceError> {
    check_distinct(t_i, t_j)?;
    let i = require_index(net, t_i)?;
    let j = require_index(net, t_j)?;
    Ok(term_term_by_index(net, i, j))
}

fn term_term_by_index(net: &HistoricalNetwork, i: u32, j: u32) -> f64 {
    let (ni, nj) = (net.row_norm(i), net.row_norm(j));
    if ni == 0.0 || nj == 0.0 {
        return 1.0;
    }
    (1.0 - net.row_dot(i, j) / (ni * nj)).clamp(0.0, 1.0)
}

/// Cosine distance between embedding vectors, clamped into [0, 1] so a
/// negative similarity cannot exceed the new-node ceiling.
pub fn dist_embedding(
    table: &EmbeddingTable,
    t_i: &str,
    t_j: &str,
) -> Result<f64, DistanceError> {
    check_distinct(t_i, t_j)?;
    let u = table
        .vector(t_i)
        .ok_or_else(|| DistanceError::MissingEmbedding(t_i.to_string()))?;
    let v = table
        .vector(t_j)
        .ok_or_else(|| DistanceError::MissingEmbedding(t_j.to_string()))?;
    Ok(embedding_cosine_distance(u, v))
}

fn embedding_cosine_distance(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (nu * nv)).clamp(0.0, 1.0)
}

/// 1 - 1/(hops + 1) for the unweighted shortest path; unreachable pairs are
/// at the ceiling 1.
pub fn dist_geodesic(net: &HistoricalNetwork, t_i: &str, t_j: &str) -> Result<f64, DistanceError> {
    check_distinct(t_i, t_j)?;
    let i = require_index(net, t_i)?;
    let j = require_index(net, t_j)?;
    Ok(geodesic_by_index(net, i, j))
}

fn geodesic_by_index(net: &HistoricalNetwork, i: u32, j: u32) -> f64 {
    match net.hops(i, j) {
        Some(h) => 1.0 - 1.0 / (h as f64 + 1.0),
        None => 1.0,
    }
}

/// Like [`dist_geodesic`], but a directly connected pair uses its term-term
/// distance in place of the single hop. Indirect pairs keep the unweighted
/// hop count.
pub fn dist_geodesic_weighted(
    net: &HistoricalNetwork,
    t_i: &str,
    t_j: &str,
) -> Result<f64, DistanceError> {
    check_distinct(t_i, t_j)?;
    let i = require_index(net, t_i)?;
    let j = require_index(net, t_j)?;
    Ok(geodesic_weighted_by_index(net, i, j))
}

fn geodesic_weighted_by_index(net: &HistoricalNetwork, i: u32, j: u32) -> f64 {
    if net.cooc(i, j) > 0 {
        let d_tt = term_term_by_index(net, i, j);
        (1.0 - 1.0 / (d_tt + 1.0)).max(GEO_WEIGHT_FLOOR)
    } else {
        geodesic_by_index(net, i, j)
    }
}

/// The focal paper's terms with their full pairwise distance matrix and the
/// historical classification of every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct FocalDistanceMatrix {
    terms: Vec<String>,
    dist: SquareMatrix,
    /// Upper triangle, row-major: classes[pair_index(i, j)] for i < j.
    classes: Vec<EdgeClass>,
    method: DistanceMethod,
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl FocalDistanceMatrix {
    pub fn n(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn method(&self) -> DistanceMethod {
        self.method
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist.get(i, j)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.dist
    }

    /// Class of the unordered pair (i, j), i != j.
    pub fn edge_class(&self, i: usize, j: usize) -> EdgeClass {
        assert!(i != j, "self-pairs have no class");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.classes[pair_index(self.n(), a, b)]
    }

    /// All unordered pairs as (i, j, distance, class) with i < j.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64, EdgeClass)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            ((i + 1)..n).map(move |j| {
                (
                    i,
                    j,
                    self.dist.get(i, j),
                    self.classes[pair_index(n, i, j)],
                )
            })
        })
    }

    /// Largest pairwise distance in the matrix.
    pub fn max_pair_distance(&self) -> f64 {
        self.pairs()
            .map(|(_, _, d, _)| d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pair counts by class: (new-new, old-new, old-old).
    pub fn class_counts(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for class in &self.classes {
            match class {
                EdgeClass::NewNodeNewEdge => counts.0 += 1,
                EdgeClass::OldNodeNewEdge => counts.1 += 1,
                EdgeClass::OldNodeOldEdge => counts.2 += 1,
            }
        }
        counts
    }

    /// Wrap an externally supplied matrix (e.g. hand-specified distances for
    /// a worked example). Validates shape, symmetry, zero diagonal, and
    /// positive off-diagonals, but not the unit ceiling: injected matrices
    /// may use arbitrary positive weights. Pairs carry no historical
    /// classification and are tagged old-old.
    pub fn from_injected(
        terms: Vec<String>,
        dist: SquareMatrix,
        method: DistanceMethod,
    ) -> Result<Self, DistanceError> {
        let n = terms.len();
        if n < 2 {
            return Err(DistanceError::InvalidInjected(format!(
                "need at least 2 terms, got {n}"
            )));
        }
        if dist.n() != n {
            return Err(DistanceError::InvalidInjected(format!(
                "matrix is {}x{} but there are {n} terms",
                dist.n(),
                dist.n()
            )));
        }
        for i in 0..n {
            if dist.get(i, i) != 0.0 {
                return Err(DistanceError::InvalidInjected(format!(
                    "diagonal entry ({i}, {i}) must be 0"
                )));
            }
            for j in (i + 1)..n {
                let d = dist.get(i, j);
                if d != dist.get(j, i) {
                    return Err(DistanceError::InvalidInjected(format!(
                        "asymmetric at ({i}, {j})"
                    )));
                }
                if !(d > 0.0) || !d.is_finite() {
                    return Err(DistanceError::InvalidInjected(format!(
                        "entry ({i}, {j}) must be positive and finite, got {d}"
                    )));
                }
            }
        }
        let classes = vec![EdgeClass::OldNodeOldEdge; n * (n - 1) / 2];
        Ok(FocalDistanceMatrix {
            terms,
            dist,
            classes,
            method,
        })
    }
}

/// Assemble the focal matrix: classify every pair, apply the new-node
/// ceiling, and fill the rest with the chosen method's distance.
pub fn build_focal_matrix(
    net: &HistoricalNetwork,
    paper: &PaperRecord,
    method: DistanceMethod,
    embeddings: Option<&EmbeddingTable>,
) -> Result<FocalDistanceMatrix, DistanceError> {
    let n = paper.terms.len();
    if n < 2 {
        return Err(DistanceError::TooFewTerms {
            id: paper.id.clone(),
            n_terms: n,
        });
    }
    if method.requires_embeddings() && embeddings.is_none() {
        return Err(DistanceError::EmbeddingsRequired);
    }

    let terms = paper.terms.clone();
    let indices: Vec<Option<u32>> = terms.iter().map(|t| net.index_of(t)).collect();
    let mut dist = SquareMatrix::zeros(n);
    let mut classes = Vec::with_capacity(n * (n - 1) / 2);

    for i in 0..n {
        for j in (i + 1)..n {
            let (class, d) = match (indices[i], indices[j]) {
                (Some(a), Some(b)) => {
                    let class = if net.cooc(a, b) > 0 {
                        EdgeClass::OldNodeOldEdge
                    } else {
                        EdgeClass::OldNodeNewEdge
                    };
                    let d = match method {
                        DistanceMethod::TermPaper => term_paper_by_index(net, a, b),
                        DistanceMethod::TermTerm => term_term_by_index(net, a, b),
                        DistanceMethod::GeoDistance => geodesic_by_index(net, a, b),
                        DistanceMethod::GeoDistanceWeight => {
                            geodesic_weighted_by_index(net, a, b)
                        }
                        DistanceMethod::Embed => {
                            let table = embeddings.expect("checked above");
                            let u = table.vector(&terms[i]).ok_or_else(|| {
                                DistanceError::MissingEmbedding(terms[i].clone())
                            })?;
                            let v = table.vector(&terms[j]).ok_or_else(|| {
                                DistanceError::MissingEmbedding(terms[j].clone())
                            })?;
                            embedding_cosine_distance(u, v)
                        }
                    };
                    (class, d)
                }
                // New-node rule: the ceiling value under every method.
                _ => (EdgeClass::NewNodeNewEdge, 1.0),
            };
            dist.set(i, j, d);
            dist.set(j, i, d);
            classes.push(class);
        }
    }

    Ok(FocalDistanceMatrix {
        terms,
        dist,
        classes,
        method,
    })
}
