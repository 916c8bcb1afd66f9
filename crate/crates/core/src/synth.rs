//! Seeded synthetic corpora for tests and benchmarks.
//!
//! Both generators are pure functions of their config, so any fixture built
//! here can be regenerated exactly from the seed.

use rand::seq::index::sample as index_sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;

use crate::corpus::PaperRecord;

/// Two disjoint term communities with dense within-community co-occurrence.
/// Focal-year papers either stay inside one community (label 0) or straddle
/// both (label 1), planting a known novelty signal: every straddling paper
/// must pay at least one cross-community step, and cross-community rows
/// share no support, so that step costs the full unit distance.
#[derive(Debug, Clone)]
pub struct TwoClusterConfig {
    pub terms_per_cluster: usize,
    pub history_start: i32,
    pub history_years: usize,
    pub papers_per_cluster_year: usize,
    pub terms_per_history_paper: usize,
    pub conventional: usize,
    pub novel: usize,
    pub terms_per_focal_paper: usize,
    /// Label noise: this many papers of each class are drawn from the other
    /// class's recipe. Zero separates the classes perfectly, which makes a
    /// probit on the labels inestimable; a little noise keeps an interior
    /// maximum-likelihood estimate while the ranking signal stays strong.
    pub mislabeled: usize,
    pub seed: u64,
}

impl Default for TwoClusterConfig {
    fn default() -> Self {
        TwoClusterConfig {
            terms_per_cluster: 60,
            history_start: 2000,
            history_years: 5,
            papers_per_cluster_year: 50,
            terms_per_history_paper: 10,
            conventional: 100,
            novel: 100,
            terms_per_focal_paper: 8,
            mislabeled: 0,
            seed: 42,
        }
    }
}

impl TwoClusterConfig {
    pub fn focal_year(&self) -> i32 {
        self.history_start + self.history_years as i32
    }
}

#[derive(Debug, Clone)]
pub struct TwoClusterCorpus {
    /// History first (year order), then conventional, then novel papers.
    pub records: Vec<PaperRecord>,
    pub cluster_a: Vec<String>,
    pub cluster_b: Vec<String>,
    pub focal_year: i32,
}

pub fn two_cluster_corpus(cfg: &TwoClusterConfig) -> TwoClusterCorpus {
    assert!(cfg.terms_per_history_paper >= 2);
    assert!(cfg.terms_per_history_paper <= cfg.terms_per_cluster);
    assert!(cfg.terms_per_focal_paper >= 2);
    assert!(cfg.terms_per_focal_paper <= cfg.terms_per_cluster);
    assert!(cfg.history_years >= 1);

    let cluster_a: Vec<String> = (0..cfg.terms_per_cluster).map(|i| format!("a{i:03}")).collect();
    let cluster_b: Vec<String> = (0..cfg.terms_per_cluster).map(|i| format!("b{i:03}")).collect();
    let clusters = [&cluster_a, &cluster_b];

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::new();
    let mut venue_cycle = 0usize;
    let mut venue = move || {
        let v = format!("v{}", venue_cycle % 3);
        venue_cycle += 1;
        v
    };

    let draw = |rng: &mut ChaCha8Rng, cluster: &[String], k: usize| -> Vec<String> {
        index_sample(rng, cluster.len(), k)
            .into_iter()
            .map(|i| cluster[i].clone())
            .collect()
    };

    for offset in 0..cfg.history_years {
        let year = cfg.history_start + offset as i32;
        for (side, cluster) in clusters.iter().enumerate() {
            for i in 0..cfg.papers_per_cluster_year {
                records.push(PaperRecord {
                    id: format!("h{year}_{side}_{i}"),
                    year,
                    terms: draw(&mut rng, cluster, cfg.terms_per_history_paper),
                    venue: Some(venue()),
                    field: Some("f0".into()),
                    label: None,
                    citations: None,
                });
            }
        }
    }

    let focal_year = cfg.focal_year();
    let straddle = |rng: &mut ChaCha8Rng| -> Vec<String> {
        let from_a = cfg.terms_per_focal_paper / 2;
        let from_b = cfg.terms_per_focal_paper - from_a;
        let mut terms = draw(rng, &cluster_a, from_a.max(1));
        terms.extend(draw(rng, &cluster_b, from_b.max(1)));
        terms
    };
    for i in 0..cfg.conventional {
        let terms = if i < cfg.mislabeled {
            straddle(&mut rng)
        } else {
            draw(&mut rng, clusters[i % 2], cfg.terms_per_focal_paper)
        };
        records.push(PaperRecord {
            id: format!("x{i}"),
            year: focal_year,
            terms,
            venue: Some(venue()),
            field: Some("f0".into()),
            label: Some(false),
            citations: None,
        });
    }
    for i in 0..cfg.novel {
        let terms = if i < cfg.mislabeled {
            draw(&mut rng, clusters[i % 2], cfg.terms_per_focal_paper)
        } else {
            straddle(&mut rng)
        };
        records.push(PaperRecord {
            id: format!("n{i}"),
            year: focal_year,
            terms,
            venue: Some(venue()),
            field: Some("f0".into()),
            label: Some(true),
            citations: None,
        });
    }

    TwoClusterCorpus {
        records,
        cluster_a,
        cluster_b,
        focal_year,
    }
}

/// A flat corpus sized for throughput work: uniform term draws from one
/// vocabulary, term counts Poisson around `mean_terms` (floored at 2).
#[derive(Debug, Clone)]
pub struct ThroughputConfig {
    pub papers: usize,
    pub vocab: usize,
    pub mean_terms: f64,
    pub max_terms: usize,
    pub history_start: i32,
    pub history_years: usize,
    pub papers_per_history_year: usize,
    pub seed: u64,
}

impl Default for ThroughputConfig {
    fn default() -> Self {
        ThroughputConfig {
            papers: 10_000,
            vocab: 2_000,
            mean_terms: 10.0,
            max_terms: 30,
            history_start: 2000,
            history_years: 5,
            papers_per_history_year: 2_000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThroughputCorpus {
    pub records: Vec<PaperRecord>,
    pub vocab: Vec<String>,
    pub focal_year: i32,
}

pub fn throughput_corpus(cfg: &ThroughputConfig) -> ThroughputCorpus {
    assert!(cfg.vocab >= 2);
    assert!(cfg.mean_terms >= 2.0);
    assert!(cfg.max_terms >= 2);
    let vocab: Vec<String> = (0..cfg.vocab).map(|i| format!("t{i:05}")).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let poisson = Poisson::new(cfg.mean_terms).expect("positive mean");
    let cap = cfg.max_terms.min(cfg.vocab);

    let draw_paper = |id: String, year: i32, seq: usize, rng: &mut ChaCha8Rng| {
        let k = (rng.sample(poisson) as usize).clamp(2, cap);
        let terms = index_sample(rng, vocab.len(), k)
            .into_iter()
            .map(|i| vocab[i].clone())
            .collect();
        PaperRecord {
            id,
            year,
            terms,
            venue: Some(format!("v{}", seq % 5)),
            field: Some(format!("f{}", seq % 2)),
            label: None,
            citations: None,
        }
    };

    let mut records = Vec::new();
    for offset in 0..cfg.history_years {
        let year = cfg.history_start + offset as i32;
        for i in 0..cfg.papers_per_history_year {
            records.push(draw_paper(format!("h{year}_{i}"), year, i, &mut rng));
        }
    }
    let focal_year = cfg.history_start + cfg.history_years as i32;
    for i in 0..cfg.papers {
        records.push(draw_paper(format!("p{i}"), focal_year, i, &mut rng));
    }

    ThroughputCorpus {
        records,
        vocab,
        focal_year,
    }
}
