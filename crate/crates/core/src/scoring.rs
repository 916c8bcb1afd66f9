//! Paper-level novelty scores and corpus descriptive statistics.
//!
//! The traversal distance is the headline score; the mean and the 90th
//! percentile of the raw pairwise distances are the dyadic baselines it is
//! compared against. Baselines always use the raw focal matrix, never the
//! metric closure.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusIndex, PaperRecord};
use crate::embed::{train_embeddings, EmbeddingTable, TrainConfig};
use crate::error::{Error, Result};
use crate::histnet::{build_network, HistoricalNetwork};
use crate::pairdist::{build_focal_matrix, DistanceMethod, FocalDistanceMatrix};
use crate::traversal::{ctd, SolverKind, TraversalConfig};

/// One (paper, method) score row, in output order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoveltyScore {
    pub paper_id: String,
    pub year: i32,
    pub method: DistanceMethod,
    pub n_terms: usize,
    pub ctd: f64,
    /// ctd / n_terms.
    pub ctd_normalized: f64,
    pub mean_pairwise: f64,
    pub p90_pairwise: f64,
    pub new_node_new_edge: usize,
    pub old_node_new_edge: usize,
    pub old_node_old_edge: usize,
    pub solver: SolverKind,
    pub exact: bool,
}

/// Arithmetic mean over the C(n, 2) raw pairwise distances.
pub fn mean_pairwise(m: &FocalDistanceMatrix) -> f64 {
    let mut sum = 0.0;
    let mut k = 0usize;
    for (_, _, d, _) in m.pairs() {
        sum += d;
        k += 1;
    }
    sum / k as f64
}

/// 90th percentile of the raw pairwise distances, linearly interpolated
/// between order statistics at rank 0.9 * (k - 1).
pub fn p90_pairwise(m: &FocalDistanceMatrix) -> f64 {
    let mut d: Vec<f64> = m.pairs().map(|(_, _, d, _)| d).collect();
    d.sort_by(f64::total_cmp);
    let rank = 0.9 * (d.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    if lo + 1 < d.len() {
        d[lo] + frac * (d[lo + 1] - d[lo])
    } else {
        d[lo]
    }
}

/// Score a paper from an already-built focal matrix.
pub fn score_from_matrix(
    m: &FocalDistanceMatrix,
    paper_id: &str,
    year: i32,
    traversal: &TraversalConfig,
) -> NoveltyScore {
    let t = ctd(m, traversal);
    let (nn, on, oo) = m.class_counts();
    NoveltyScore {
        paper_id: paper_id.to_string(),
        year,
        method: m.method(),
        n_terms: m.n(),
        ctd: t.length,
        ctd_normalized: t.length / m.n() as f64,
        mean_pairwise: mean_pairwise(m),
        p90_pairwise: p90_pairwise(m),
        new_node_new_edge: nn,
        old_node_new_edge: on,
        old_node_old_edge: oo,
        solver: t.solver,
        exact: t.exact,
    }
}

/// Build the focal matrix for one paper and score it.
pub fn score_paper(
    net: &HistoricalNetwork,
    paper: &PaperRecord,
    method: DistanceMethod,
    embeddings: Option<&EmbeddingTable>,
    traversal: &TraversalConfig,
) -> Result<NoveltyScore> {
    let m = build_focal_matrix(net, paper, method, embeddings)?;
    Ok(score_from_matrix(&m, &paper.id, paper.year, traversal))
}

/// Historical networks built once per focal year and reused.
pub struct NetworkCache {
    window_len: u32,
    nets: HashMap<i32, Arc<HistoricalNetwork>>,
    built: usize,
}

impl NetworkCache {
    pub fn new(window_len: u32) -> Self {
        NetworkCache {
            window_len,
            nets: HashMap::new(),
            built: 0,
        }
    }

    pub fn window_len(&self) -> u32 {
        self.window_len
    }

    pub fn get(&mut self, index: &CorpusIndex, focal_year: i32) -> Arc<HistoricalNetwork> {
        if let Some(net) = self.nets.get(&focal_year) {
            return Arc::clone(net);
        }
        let net = Arc::new(build_network(index, focal_year, self.window_len));
        self.nets.insert(focal_year, Arc::clone(&net));
        self.built += 1;
        net
    }

    /// Number of cache misses, i.e. networks actually constructed.
    pub fn built_count(&self) -> usize {
        self.built
    }
}

/// Where `embed`-method scoring gets its vectors.
pub enum EmbeddingSource {
    /// No table available; `embed` rows fail per paper.
    None,
    /// Train one table per focal-year network on demand.
    Train(TrainConfig),
    /// A single pre-trained table. Scoring warns when its window differs
    /// from a focal year's network window.
    Fixed(Arc<EmbeddingTable>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub window_len: u32,
    pub traversal: TraversalConfig,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            window_len: 5,
            traversal: TraversalConfig::default(),
        }
    }
}

/// A (paper, method) row that could not be scored.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreFailure {
    pub paper_id: String,
    pub year: i32,
    pub method: DistanceMethod,
    pub message: String,
}

/// Outcome of scoring a corpus: rows in deterministic (year, input order,
/// method) order, per-row failures, and surfaced warnings.
pub struct ScoreRun {
    pub scores: Vec<NoveltyScore>,
    pub failures: Vec<ScoreFailure>,
    pub warnings: Vec<String>,
    pub networks_built: usize,
}

/// Score every record in the index under every requested method.
///
/// Work fans out across the current rayon pool; output order and content are
/// independent of worker count. Records with fewer than two terms still shape
/// the historical networks but are skipped for scoring, since no pairwise
/// measure exists for them.
pub fn score_corpus(
    index: &CorpusIndex,
    methods: &[DistanceMethod],
    config: &ScoreConfig,
    embeddings: &EmbeddingSource,
) -> ScoreRun {
    let mut cache = NetworkCache::new(config.window_len);
    let needs_table = methods.iter().any(|m| m.requires_embeddings());
    let mut scores = Vec::new();
    let mut failures = Vec::new();
    let mut warnings = Vec::new();

    for year in index.years().collect::<Vec<_>>() {
        let net = cache.get(index, year);
        let table: Option<Arc<EmbeddingTable>> = if needs_table {
            match embeddings {
                EmbeddingSource::None => None,
                EmbeddingSource::Train(cfg) => {
                    if net.is_empty() {
                        // No history to train on; every focal pair is new, so
                        // an empty table keeps the rows scoreable (at the
                        // ceiling distance) without any vector lookups.
                        let empty =
                            EmbeddingTable::from_vectors(cfg.dim, cfg.seed, net.window(), vec![])
                                .expect("empty table is always valid");
                        Some(Arc::new(empty))
                    } else {
                        match train_embeddings(&net, cfg) {
                            Ok(t) => Some(Arc::new(t)),
                            Err(e) => {
                                warnings.push(format!(
                                    "year {year}: embedding training failed: {e}"
                                ));
                                None
                            }
                        }
                    }
                }
                EmbeddingSource::Fixed(t) => {
                    if t.window() != net.window() {
                        warnings.push(format!(
                            "year {year}: embedding table window {:?} differs from network \
                             window {:?}",
                            t.window(),
                            net.window()
                        ));
                    }
                    Some(Arc::clone(t))
                }
            }
        } else {
            None
        };

        let tasks: Vec<(&PaperRecord, DistanceMethod)> = index
            .records_in_year(year)
            .iter()
            .filter(|rec| rec.terms.len() >= 2)
            .flat_map(|rec| methods.iter().map(move |&m| (rec, m)))
            .collect();

        let results: Vec<std::result::Result<NoveltyScore, ScoreFailure>> = tasks
            .par_iter()
            .map(|&(rec, method)| {
                score_paper(&net, rec, method, table.as_deref(), &config.traversal).map_err(
                    |e| ScoreFailure {
                        paper_id: rec.id.clone(),
                        year: rec.year,
                        method,
                        message: e.to_string(),
                    },
                )
            })
            .collect();

        for r in results {
            match r {
                Ok(s) => scores.push(s),
                Err(f) => failures.push(f),
            }
        }
    }

    ScoreRun {
        scores,
        failures,
        warnings,
        networks_built: cache.built_count(),
    }
}

/// Write scores as CSV with a fixed header.
pub fn write_scores_csv<W: Write>(w: W, scores: &[NoveltyScore]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for s in scores {
        wtr.serialize(s).map_err(csv_error)?;
    }
    wtr.flush().map_err(Error::Io)?;
    Ok(())
}

/// Write scores as line-delimited records.
pub fn write_scores_jsonl<W: Write>(mut w: W, scores: &[NoveltyScore]) -> Result<()> {
    for s in scores {
        serde_json::to_writer(&mut w, s).map_err(|e| Error::Io(e.into()))?;
        writeln!(w).map_err(Error::Io)?;
    }
    Ok(())
}

/// Read a score table previously written by [`write_scores_csv`].
pub fn read_scores_csv<R: BufRead>(r: R) -> Result<Vec<NoveltyScore>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row.map_err(csv_error)?);
    }
    Ok(out)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("csv: {other:?}"),
        )),
    }
}

/// Per-year paper volume and mean term count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearTermStats {
    pub year: i32,
    pub papers: usize,
    pub mean_terms: f64,
}

/// Exact per-year counts; years without records are omitted.
pub fn term_count_stats(index: &CorpusIndex) -> Vec<YearTermStats> {
    index
        .years()
        .map(|year| {
            let recs = index.records_in_year(year);
            let total_terms: usize = recs.iter().map(|r| r.n_terms()).sum();
            YearTermStats {
                year,
                papers: recs.len(),
                mean_terms: total_terms as f64 / recs.len() as f64,
            }
        })
        .collect()
}

/// Per-focal-year proportions of the three pair classes across all eligible
/// papers (those with at least two terms).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearEdgeClassStats {
    pub year: i32,
    pub pairs: u64,
    pub new_node_new_edge: f64,
    pub old_node_new_edge: f64,
    pub old_node_old_edge: f64,
}

pub fn edge_class_stats(index: &CorpusIndex, window_len: u32) -> Vec<YearEdgeClassStats> {
    let mut cache = NetworkCache::new(window_len);
    let mut out = Vec::new();
    for year in index.years().collect::<Vec<_>>() {
        let net = cache.get(index, year);
        let (mut nn, mut on, mut oo) = (0u64, 0u64, 0u64);
        for rec in index.records_in_year(year) {
            if rec.n_terms() < 2 {
                continue;
            }
            for i in 0..rec.terms.len() {
                for j in (i + 1)..rec.terms.len() {
                    match net
                        .classify_pair(&rec.terms[i], &rec.terms[j])
                        .expect("terms are deduplicated")
                    {
                        crate::histnet::EdgeClass::NewNodeNewEdge => nn += 1,
                        crate::histnet::EdgeClass::OldNodeNewEdge => on += 1,
                        crate::histnet::EdgeClass::OldNodeOldEdge => oo += 1,
                    }
                }
            }
        }
        let pairs = nn + on + oo;
        if pairs == 0 {
            continue;
        }
        out.push(YearEdgeClassStats {
            year,
            pairs,
            new_node_new_edge: nn as f64 / pairs as f64,
            old_node_new_edge: on as f64 / pairs as f64,
            old_node_old_edge: oo as f64 / pairs as f64,
        });
    }
    out
}

/// Write either per-year stats table as CSV.
pub fn write_stats_csv<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row).map_err(csv_error)?;
    }
    wtr.flush().map_err(Error::Io)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SquareMatrix;
    use approx::assert_abs_diff_eq;

    fn rec(id: &str, year: i32, terms: &[&str]) -> PaperRecord {
        PaperRecord {
            id: id.into(),
            year,
            terms: terms.iter().map(|s| s.to_string()).collect(),
            venue: None,
            field: None,
            label: None,
            citations: None,
        }
    }

    fn injected(n: usize, entries: &[(usize, usize, f64)]) -> FocalDistanceMatrix {
        let terms = (0..n).map(|i| format!("t{i}")).collect();
        FocalDistanceMatrix::from_injected(
            terms,
            SquareMatrix::from_pairs(n, entries),
            DistanceMethod::TermPaper,
        )
        .unwrap()
    }

    fn worked_example_one() -> FocalDistanceMatrix {
        injected(
            4,
            &[
                (0, 1, 1.0),
                (0, 2, 4.0),
                (0, 3, 5.0),
                (1, 2, 3.0),
                (1, 3, 4.0),
                (2, 3, 1.0),
            ],
        )
    }

    #[test]
    fn worked_example_scores() {
        let m = worked_example_one();
        let s = score_from_matrix(&m, "paper1", 2020, &TraversalConfig::default());
        assert_eq!(s.ctd, 5.0);
        assert_eq!(s.mean_pairwise, 3.0);
        assert_eq!(s.p90_pairwise, 4.5);
        assert_eq!(m.max_pair_distance(), 5.0);
        assert_eq!(s.ctd_normalized, 1.25);
        assert!(s.exact);

        let all_three = injected(
            4,
            &[
                (0, 1, 3.0),
                (0, 2, 3.0),
                (0, 3, 3.0),
                (1, 2, 3.0),
                (1, 3, 3.0),
                (2, 3, 3.0),
            ],
        );
        let s2 = score_from_matrix(&all_three, "paper2", 2020, &TraversalConfig::default());
        assert_eq!(s2.ctd, 9.0);
        assert_eq!(s2.mean_pairwise, 3.0);
    }

    #[test]
    fn two_term_scores_collapse_to_the_single_distance() {
        let m = injected(2, &[(0, 1, 0.37)]);
        let s = score_from_matrix(&m, "p", 2020, &TraversalConfig::default());
        assert_eq!(s.ctd, 0.37);
        assert_eq!(s.mean_pairwise, 0.37);
        assert_eq!(s.p90_pairwise, 0.37);
    }

    #[test]
    fn aggregators_are_positively_homogeneous() {
        let entries = [
            (0usize, 1usize, 0.2),
            (0, 2, 0.9),
            (0, 3, 0.4),
            (1, 2, 0.6),
            (1, 3, 0.8),
            (2, 3, 0.3),
        ];
        let c = 2.5;
        let scaled: Vec<(usize, usize, f64)> =
            entries.iter().map(|&(i, j, d)| (i, j, c * d)).collect();
        let s1 = score_from_matrix(&injected(4, &entries), "p", 2020, &Default::default());
        let s2 = score_from_matrix(&injected(4, &scaled), "p", 2020, &Default::default());
        assert_abs_diff_eq!(s2.ctd, c * s1.ctd, epsilon = 1e-12);
        assert_abs_diff_eq!(s2.mean_pairwise, c * s1.mean_pairwise, epsilon = 1e-12);
        assert_abs_diff_eq!(s2.p90_pairwise, c * s1.p90_pairwise, epsilon = 1e-12);
    }

    #[test]
    fn p90_interpolates_between_order_statistics() {
        // Sorted {1, 1, 3, 4, 4, 5}: rank 0.9 * 5 = 4.5 -> midway 4 and 5.
        let m = worked_example_one();
        assert_eq!(p90_pairwise(&m), 4.5);
    }

    fn small_corpus() -> CorpusIndex {
        CorpusIndex::build(vec![
            rec("h1", 2004, &["A", "B", "C"]),
            rec("h2", 2004, &["B", "C", "D"]),
            rec("f1", 2005, &["A", "B"]),
            rec("f2", 2005, &["C", "D", "A"]),
            rec("g1", 2006, &["A", "D"]),
        ])
    }

    #[test]
    fn corpus_rows_are_paper_major_method_minor() {
        let index = small_corpus();
        let methods = [DistanceMethod::TermPaper, DistanceMethod::GeoDistance];
        let run = score_corpus(
            &index,
            &methods,
            &ScoreConfig::default(),
            &EmbeddingSource::None,
        );
        assert!(run.failures.is_empty(), "{:?}", run.failures);
        // 5 papers x 2 methods, ordered by year, input order, then method.
        assert_eq!(run.scores.len(), 10);
        let key: Vec<(String, DistanceMethod)> = run
            .scores
            .iter()
            .map(|s| (s.paper_id.clone(), s.method))
            .collect();
        assert_eq!(key[0], ("h1".into(), DistanceMethod::TermPaper));
        assert_eq!(key[1], ("h1".into(), DistanceMethod::GeoDistance));
        assert_eq!(key[2], ("h2".into(), DistanceMethod::TermPaper));
        assert_eq!(key[8], ("g1".into(), DistanceMethod::TermPaper));
        // One network per focal year.
        assert_eq!(run.networks_built, 3);
    }

    #[test]
    fn short_records_feed_networks_but_are_not_scored() {
        // "solo" cannot be scored, yet its term must enter 2001's history so
        // the A-X pair counts as old-node-new-edge rather than new-node.
        let index = CorpusIndex::build(vec![
            rec("solo", 2000, &["X"]),
            rec("base", 2000, &["A", "B"]),
            rec("f1", 2001, &["A", "X"]),
        ]);
        let run = score_corpus(
            &index,
            &[DistanceMethod::TermPaper],
            &ScoreConfig::default(),
            &EmbeddingSource::None,
        );
        assert!(run.failures.is_empty(), "{:?}", run.failures);
        let ids: Vec<&str> = run.scores.iter().map(|s| s.paper_id.as_str()).collect();
        assert_eq!(ids, ["base", "f1"]);
        let f1 = &run.scores[1];
        assert_eq!(f1.old_node_new_edge, 1);
        assert_eq!(f1.new_node_new_edge, 0);
    }

    #[test]
    fn corpus_scoring_is_deterministic() {
        let index = small_corpus();
        let methods = [DistanceMethod::TermTerm];
        let cfg = ScoreConfig::default();
        let a = score_corpus(&index, &methods, &cfg, &EmbeddingSource::None);
        let b = score_corpus(&index, &methods, &cfg, &EmbeddingSource::None);
        assert_eq!(a.scores, b.scores);
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        write_scores_csv(&mut buf_a, &a.scores).unwrap();
        write_scores_csv(&mut buf_b, &b.scores).unwrap();
        assert_eq!(buf_a, buf_b, "serialized bytes must match");
    }

    #[test]
    fn duplicated_terms_give_identical_scores() {
        let index = CorpusIndex::build(vec![
            rec("h1", 2004, &["A", "B", "C"]),
            rec("f1", 2005, &["A", "B", "C"]),
            rec("f2", 2005, &["A", "B", "C"]),
        ]);
        let run = score_corpus(
            &index,
            &[DistanceMethod::TermPaper],
            &ScoreConfig::default(),
            &EmbeddingSource::None,
        );
        let f: Vec<&NoveltyScore> = run
            .scores
            .iter()
            .filter(|s| s.year == 2005)
            .collect();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].ctd, f[1].ctd);
        assert_eq!(f[0].mean_pairwise, f[1].mean_pairwise);
    }

    #[test]
    fn embed_without_table_fails_per_row() {
        let index = small_corpus();
        let run = score_corpus(
            &index,
            &[DistanceMethod::Embed],
            &ScoreConfig::default(),
            &EmbeddingSource::None,
        );
        assert!(run.scores.is_empty());
        assert_eq!(run.failures.len(), 5);
        assert!(run.failures[0].message.contains("embedding"));
    }

    #[test]
    fn embed_with_training_scores_old_pairs() {
        let index = small_corpus();
        let cfg = TrainConfig {
            dim: 8,
            epochs: 20,
            negatives: 2,
            learning_rate: 0.05,
            seed: 1,
        };
        let run = score_corpus(
            &index,
            &[DistanceMethod::Embed],
            &ScoreConfig::default(),
            &EmbeddingSource::Train(cfg),
        );
        assert!(run.failures.is_empty(), "{:?}", run.failures);
        assert_eq!(run.scores.len(), 5);
        // 2004 papers see an empty history: every pair is new, so all
        // distances sit at the ceiling.
        let h1 = &run.scores[0];
        assert_eq!(h1.paper_id, "h1");
        assert_eq!(h1.mean_pairwise, 1.0);
        assert_eq!(h1.new_node_new_edge, 3);
        // Later years have trained vectors; the A-B pair is historical.
        let f1 = run.scores.iter().find(|s| s.paper_id == "f1").unwrap();
        assert_eq!(f1.method, DistanceMethod::Embed);
        assert_eq!(f1.old_node_old_edge, 1);
        assert!(f1.mean_pairwise > 0.0 && f1.mean_pairwise <= 1.0);
    }

    #[test]
    fn fixed_table_window_mismatch_warns() {
        let index = small_corpus();
        let table = EmbeddingTable::from_vectors(
            2,
            0,
            (1990, 1994),
            vec![
                ("A".into(), vec![1.0, 0.0]),
                ("B".into(), vec![0.9, 0.1]),
                ("C".into(), vec![0.0, 1.0]),
                ("D".into(), vec![0.1, 0.9]),
            ],
        )
        .unwrap();
        let run = score_corpus(
            &index,
            &[DistanceMethod::Embed],
            &ScoreConfig::default(),
            &EmbeddingSource::Fixed(Arc::new(table)),
        );
        assert!(!run.warnings.is_empty());
        assert!(run.warnings[0].contains("window"));
    }

    #[test]
    fn csv_roundtrip() {
        let index = small_corpus();
        let run = score_corpus(
            &index,
            &[DistanceMethod::TermPaper, DistanceMethod::TermTerm],
            &ScoreConfig::default(),
            &EmbeddingSource::None,
        );
        let mut buf = Vec::new();
        write_scores_csv(&mut buf, &run.scores).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("paper_id,year,method,n_terms,ctd,"), "{text}");
        let back = read_scores_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back, run.scores);
    }

    #[test]
    fn term_stats_match_hand_counts() {
        let index = CorpusIndex::build(vec![
            rec("a", 2001, &["X", "Y"]),
            rec("b", 2001, &["X", "Y", "Z", "W"]),
            rec("c", 2003, &["X", "Y", "Z"]),
        ]);
        let stats = term_count_stats(&index);
        assert_eq!(
            stats,
            vec![
                YearTermStats {
                    year: 2001,
                    papers: 2,
                    mean_terms: 3.0
                },
                YearTermStats {
                    year: 2003,
                    papers: 1,
                    mean_terms: 3.0
                },
            ]
        );
    }

    #[test]
    fn edge_class_stats_first_year_is_all_new() {
        let index = small_corpus();
        let stats = edge_class_stats(&index, 5);
        let y2004 = stats.iter().find(|s| s.year == 2004).unwrap();
        assert_eq!(y2004.new_node_new_edge, 1.0);
        for s in &stats {
            let total = s.new_node_new_edge + s.old_node_new_edge + s.old_node_old_edge;
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn edge_class_stats_match_hand_count() {
        // Focal 2005: history = {A,B,C}, {B,C,D}. f1 = {A,B}: old-old.
        // f2 = {C,D,A}: CD old-old, CA old-old, DA old-new.
        let index = small_corpus();
        let stats = edge_class_stats(&index, 5);
        let y2005 = stats.iter().find(|s| s.year == 2005).unwrap();
        assert_eq!(y2005.pairs, 4);
        assert_abs_diff_eq!(y2005.old_node_old_edge, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(y2005.old_node_new_edge, 0.25, epsilon = 1e-12);
        assert_eq!(y2005.new_node_new_edge, 0.0);
    }

    #[test]
    fn all_historical_corpus_is_all_old_old() {
        // Every pair in every focal paper co-occurred the year before.
        let mut recs = vec![rec("h", 2000, &["A", "B", "C"])];
        for y in 2001..2004 {
            recs.push(rec(&format!("h{y}"), y, &["A", "B", "C"]));
            recs.push(rec(&format!("f{y}"), y, &["A", "B"]));
        }
        let index = CorpusIndex::build(recs);
        let stats = edge_class_stats(&index, 5);
        for s in stats.iter().filter(|s| s.year > 2000) {
            assert_eq!(s.old_node_old_edge, 1.0, "year {}", s.year);
        }
    }
}
