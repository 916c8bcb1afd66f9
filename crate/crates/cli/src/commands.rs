//! Subcommand implementations.
//!
//! Every command is a pure function of its resolved config and input files:
//! rerunning with the same inputs rewrites byte-identical outputs. Each
//! returns the number of record-level failures; the process exits with 1 when
//! any occurred and 2 on hard errors.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use ctd_core::corpus::{self, CorpusIndex, PaperRecord, ParseOptions};
use ctd_core::embed::{train_embeddings, EmbeddingTable};
use ctd_core::eval::{self, ValidationConfig};
use ctd_core::histnet::build_network;
use ctd_core::matrix::SquareMatrix;
use ctd_core::pairdist::FocalDistanceMatrix;
use ctd_core::scoring::{
    edge_class_stats, read_scores_csv, score_corpus, score_from_matrix, term_count_stats,
    write_scores_csv, write_stats_csv, EmbeddingSource, NoveltyScore,
};

use crate::config::RunConfig;

pub fn network_path(dir: &Path, year: i32) -> PathBuf {
    dir.join(format!("net-{year}.ctdn"))
}

pub fn table_path(dir: &Path, year: i32) -> PathBuf {
    dir.join(format!("emb-{year}.ctde"))
}

fn load_records(cfg: &RunConfig) -> Result<Vec<PaperRecord>> {
    corpus::parse_corpus_file(&cfg.corpus, &ParseOptions::default())
        .with_context(|| format!("reading corpus {}", cfg.corpus.display()))
}

/// Build and cache one historical network per focal year in the corpus.
/// Existing cache files are kept unless `force` is set.
pub fn build_net(cfg: &RunConfig, force: bool) -> Result<usize> {
    let records = load_records(cfg)?;
    let index = CorpusIndex::build(records);
    fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;

    let mut built = 0;
    let mut hits = 0;
    for year in index.years().collect::<Vec<_>>() {
        let path = network_path(&cfg.out, year);
        if path.exists() && !force {
            hits += 1;
            continue;
        }
        let net = build_network(&index, year, cfg.window);
        net.save_to(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        built += 1;
    }
    cfg.echo_inside_dir(&cfg.out)?;
    eprintln!("built {built} networks, reused {hits} cached");
    Ok(0)
}

/// Train and save one embedding table per focal year. Years whose historical
/// window holds no papers get an empty table so every year has an artifact.
pub fn embed(cfg: &RunConfig, force: bool) -> Result<usize> {
    let records = load_records(cfg)?;
    let index = CorpusIndex::build(records);
    fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;

    let mut trained = 0;
    let mut hits = 0;
    for year in index.years().collect::<Vec<_>>() {
        let path = table_path(&cfg.out, year);
        if path.exists() && !force {
            hits += 1;
            continue;
        }
        let net = build_network(&index, year, cfg.window);
        let table = if net.is_empty() {
            EmbeddingTable::from_vectors(cfg.embedding.dim, cfg.seed, net.window(), Vec::new())?
        } else {
            train_embeddings(&net, &cfg.train_config())
                .with_context(|| format!("training embeddings for {year}"))?
        };
        table
            .save_to(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        trained += 1;
    }
    cfg.echo_inside_dir(&cfg.out)?;
    eprintln!("trained {trained} embedding tables, reused {hits} cached");
    Ok(0)
}

/// One externally specified focal matrix, keyed by paper id. Used to score
/// worked examples whose distances are given rather than computed.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixOverride {
    paper_id: String,
    /// Term order for the matrix rows; defaults to the record's term order.
    #[serde(default)]
    terms: Option<Vec<String>>,
    matrix: Vec<Vec<f64>>,
}

fn parse_matrix_overrides(path: &Path) -> Result<HashMap<String, MatrixOverride>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = HashMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: MatrixOverride = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        if out.insert(entry.paper_id.clone(), entry).is_some() {
            bail!("{}: duplicate override for a paper id", path.display());
        }
    }
    Ok(out)
}

/// Score the override papers under every requested method. The injected
/// matrix replaces the pairwise computation; traversal runs as usual.
fn score_overrides(
    records: &[PaperRecord],
    overrides: &HashMap<String, MatrixOverride>,
    cfg: &RunConfig,
) -> Result<Vec<NoveltyScore>> {
    let by_id: HashMap<&str, &PaperRecord> =
        records.iter().map(|r| (r.id.as_str(), r)).collect();
    let traversal = cfg.traversal();
    let mut rows = Vec::new();
    for (id, entry) in overrides {
        let Some(record) = by_id.get(id.as_str()) else {
            bail!("matrix override names unknown paper id {id:?}");
        };
        let terms = match &entry.terms {
            Some(terms) => {
                let mut given = terms.clone();
                let mut have = record.terms.clone();
                given.sort();
                have.sort();
                if given != have {
                    bail!("override terms for {id:?} are not a permutation of the record's terms");
                }
                terms.clone()
            }
            None => record.terms.clone(),
        };
        let n = terms.len();
        if entry.matrix.len() != n || entry.matrix.iter().any(|row| row.len() != n) {
            bail!("override matrix for {id:?} is not {n}x{n}");
        }
        let flat: Vec<f64> = entry.matrix.iter().flatten().copied().collect();
        let dist = SquareMatrix::from_rows(n, flat);
        for &method in &cfg.methods {
            let m = FocalDistanceMatrix::from_injected(terms.clone(), dist.clone(), method)
                .with_context(|| format!("override matrix for {id:?}"))?;
            rows.push(score_from_matrix(&m, id, record.year, &traversal));
        }
    }
    Ok(rows)
}

/// Score every eligible paper under every requested method, writing one CSV
/// row per (paper, method) in (year, input order, method) order.
pub fn score(cfg: &RunConfig, matrix_override: Option<&Path>) -> Result<usize> {
    let records = load_records(cfg)?;
    eprintln!("{}", corpus::eligibility_report(&records));

    let overrides = match matrix_override {
        Some(path) => parse_matrix_overrides(path)?,
        None => HashMap::new(),
    };
    let override_rows = score_overrides(&records, &overrides, cfg)?;

    let positions: HashMap<String, usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.clone(), i))
        .collect();

    // Override papers still feed history; only their own rows are replaced.
    let index = CorpusIndex::build(records);
    let source = if cfg.methods.iter().any(|m| m.requires_embeddings()) {
        EmbeddingSource::Train(cfg.train_config())
    } else {
        EmbeddingSource::None
    };
    let run = score_corpus(&index, &cfg.methods, &cfg.score_config(), &source);
    for warning in &run.warnings {
        eprintln!("warning: {warning}");
    }

    let mut rows: Vec<NoveltyScore> = run
        .scores
        .into_iter()
        .filter(|s| !overrides.contains_key(&s.paper_id))
        .collect();
    rows.extend(override_rows);
    rows.sort_by_key(|s| {
        let method = cfg.methods.iter().position(|&m| m == s.method).unwrap();
        (s.year, positions[&s.paper_id], method)
    });

    let failures: Vec<_> = run
        .failures
        .into_iter()
        .filter(|f| !overrides.contains_key(&f.paper_id))
        .collect();
    for f in &failures {
        eprintln!("failed: {} ({}, {}): {}", f.paper_id, f.year, f.method, f.message);
    }

    let out = fs::File::create(&cfg.out)
        .with_context(|| format!("creating {}", cfg.out.display()))?;
    write_scores_csv(BufWriter::new(out), &rows)?;
    cfg.echo_beside_file(&cfg.out)?;
    eprintln!("scored {} rows, {} failures", rows.len(), failures.len());
    Ok(failures.len())
}

/// Per-year corpus tables: term-count distribution and the historical
/// classification of focal pairs.
pub fn stats(cfg: &RunConfig) -> Result<usize> {
    let records = load_records(cfg)?;
    let index = CorpusIndex::build(records);
    fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))?;

    let term_rows = term_count_stats(&index);
    let path = cfg.out.join("term-stats.csv");
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_stats_csv(BufWriter::new(file), &term_rows)?;

    let edge_rows = edge_class_stats(&index, cfg.window);
    let path = cfg.out.join("edge-class-stats.csv");
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    write_stats_csv(BufWriter::new(file), &edge_rows)?;

    cfg.echo_inside_dir(&cfg.out)?;
    eprintln!("wrote stats over {} years", term_rows.len());
    Ok(0)
}

fn split_by_label(records: Vec<PaperRecord>) -> (Vec<PaperRecord>, Vec<PaperRecord>, usize) {
    let mut cases = Vec::new();
    let mut pool = Vec::new();
    let mut unlabeled = 0;
    for r in records {
        match r.label {
            Some(true) => cases.push(r),
            Some(false) => pool.push(r),
            None => unlabeled += 1,
        }
    }
    (cases, pool, unlabeled)
}

/// Draw one matched control per labeled case and write the pairs as CSV.
/// Cases without an available control are dropped and reported, not errors.
pub fn draw_matches(cfg: &RunConfig) -> Result<usize> {
    let records = load_records(cfg)?;
    let (cases, pool, unlabeled) = split_by_label(records);
    if cases.is_empty() || pool.is_empty() {
        bail!(
            "matching needs both labels: found {} cases (label true) and {} controls \
             (label false); is the label field present?",
            cases.len(),
            pool.len()
        );
    }
    if unlabeled > 0 {
        eprintln!("ignoring {unlabeled} records without labels");
    }

    let matched = eval::match_controls(&cases, &pool, &cfg.keys, cfg.seed)?;
    let out = fs::File::create(&cfg.out)
        .with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(out));
    for pair in &matched.pairs {
        w.serialize(pair)?;
    }
    w.flush()?;
    cfg.echo_beside_file(&cfg.out)?;
    eprintln!(
        "matched {} pairs, dropped {} cases without controls",
        matched.pairs.len(),
        matched.dropped.len()
    );
    Ok(0)
}

/// Validate a score file against the corpus labels: repeated matched
/// sampling, a probit fit per run, and AUCs, written as one CSV.
pub fn eval(cfg: &RunConfig, scores_path: &Path) -> Result<usize> {
    if cfg.methods.len() != 1 {
        bail!(
            "eval fits one method at a time; got {:?}",
            cfg.methods.iter().map(|m| m.to_string()).collect::<Vec<_>>()
        );
    }
    let method = cfg.methods[0];

    let records = load_records(cfg)?;
    let (cases, pool, unlabeled) = split_by_label(records);
    if cases.is_empty() || pool.is_empty() {
        bail!(
            "evaluation needs both labels: found {} cases (label true) and {} controls \
             (label false); is the label field present?",
            cases.len(),
            pool.len()
        );
    }
    if unlabeled > 0 {
        eprintln!("ignoring {unlabeled} records without labels");
    }

    let file = fs::File::open(scores_path)
        .with_context(|| format!("opening score file {}", scores_path.display()))?;
    let all_scores = read_scores_csv(BufReader::new(file))
        .with_context(|| format!("reading score file {}", scores_path.display()))?;
    let mut table: HashMap<String, f64> = HashMap::new();
    for s in &all_scores {
        if s.method == method {
            table.insert(s.paper_id.clone(), s.ctd);
        }
    }
    if table.is_empty() {
        let mut present: Vec<String> = all_scores.iter().map(|s| s.method.to_string()).collect();
        present.sort();
        present.dedup();
        bail!(
            "score file has no rows for method {method}; it contains {}",
            if present.is_empty() { "no rows at all".to_string() } else { present.join(", ") }
        );
    }

    let vcfg = ValidationConfig {
        keys: cfg.keys.clone(),
        runs: cfg.runs,
        seed: cfg.seed,
        zscore: cfg.zscore,
        ..ValidationConfig::default()
    };
    let report = eval::repeated_validation(&cases, &pool, &table, &vcfg)?;
    if report.cases_without_scores > 0 || report.pool_without_scores > 0 {
        eprintln!(
            "no score for {} cases and {} pool records; they were left out",
            report.cases_without_scores, report.pool_without_scores
        );
    }

    let out = fs::File::create(&cfg.out)
        .with_context(|| format!("creating {}", cfg.out.display()))?;
    eval::write_validation_csv(BufWriter::new(out), &report.runs)?;
    cfg.echo_beside_file(&cfg.out)?;

    let n = report.runs.len() as f64;
    let mean_coef = report.runs.iter().map(|r| r.coefficient).sum::<f64>() / n;
    let mean_auc = report.runs.iter().map(|r| r.auc_score).sum::<f64>() / n;
    eprintln!(
        "{} runs: mean coefficient {:.4}, mean AUC {:.4}",
        report.runs.len(),
        mean_coef,
        mean_auc
    );
    Ok(0)
}
