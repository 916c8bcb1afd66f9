//! Corpus-level costs: network construction, end-to-end scoring, and one
//! embedding training pass.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use ctd_core::corpus::CorpusIndex;
use ctd_core::embed::{train_embeddings, TrainConfig};
use ctd_core::histnet::build_network;
use ctd_core::pairdist::DistanceMethod;
use ctd_core::scoring::{score_corpus, EmbeddingSource, ScoreConfig};
use ctd_core::synth::{throughput_corpus, two_cluster_corpus, ThroughputConfig, TwoClusterConfig};

fn bench_build_network(c: &mut Criterion) {
    let corpus = two_cluster_corpus(&TwoClusterConfig::default());
    let focal_year = corpus.focal_year;
    let index = CorpusIndex::build(corpus.records);
    c.bench_function("build_network/two_cluster", |b| {
        b.iter(|| build_network(black_box(&index), focal_year, 5))
    });
}

fn bench_score_corpus(c: &mut Criterion) {
    let corpus = throughput_corpus(&ThroughputConfig {
        papers: 1_000,
        papers_per_history_year: 200,
        ..ThroughputConfig::default()
    });
    let index = CorpusIndex::build(corpus.records);
    let config = ScoreConfig::default();
    let mut group = c.benchmark_group("score_corpus");
    group.sample_size(10);
    group.bench_function("term_term/1k_papers", |b| {
        b.iter(|| {
            score_corpus(
                black_box(&index),
                &[DistanceMethod::TermTerm],
                &config,
                &EmbeddingSource::None,
            )
        })
    });
    group.finish();
}

fn bench_train_embeddings(c: &mut Criterion) {
    let corpus = two_cluster_corpus(&TwoClusterConfig {
        terms_per_cluster: 40,
        papers_per_cluster_year: 20,
        ..TwoClusterConfig::default()
    });
    let focal_year = corpus.focal_year;
    let index = CorpusIndex::build(corpus.records);
    let net = build_network(&index, focal_year, 5);
    let config = TrainConfig {
        dim: 32,
        epochs: 5,
        ..TrainConfig::default()
    };
    let mut group = c.benchmark_group("train_embeddings");
    group.sample_size(10);
    group.bench_function("dim32_epochs5", |b| {
        b.iter(|| train_embeddings(black_box(&net), &config).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_build_network,
    bench_score_corpus,
    bench_train_embeddings
);
criterion_main!(benches);
