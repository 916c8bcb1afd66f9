//! Term embeddings trained on the historical network.
//!
//! The table concatenates two independently trained halves of `dim / 2`
//! dimensions each: one optimizing first-order proximity (endpoint vectors of
//! observed edges pulled together against negative samples) and one
//! optimizing second-order proximity (separate context vectors, so terms with
//! similar neighborhoods converge). Edges are drawn with an alias table
//! proportional to co-occurrence weight; negatives proportional to weighted
//! degree^0.75. Training is single-writer and bit-reproducible under a fixed
//! seed.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::histnet::HistoricalNetwork;

const TABLE_MAGIC: &[u8; 4] = b"CTDE";
const TABLE_VERSION: u16 = 1;

/// Exponent flattening the negative-sampling distribution over degrees.
const NEGATIVE_POWER: f64 = 0.75;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding dim must be even and at least 2, got {0}")]
    BadDim(usize),
    #[error("invalid training config: {0}")]
    BadConfig(String),
    #[error("cannot train embeddings on an empty network")]
    EmptyNetwork,
    #[error("embedding file: bad magic (not an embedding table)")]
    BadMagic,
    #[error("embedding file: unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("embedding file: {0}")]
    Corrupt(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Training hyperparameters. The defaults are artifact choices; the method
/// itself only fixes the two-proximity structure and the sampling scheme.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Total embedding width; each proximity order gets dim/2.
    pub dim: usize,
    /// One epoch draws one sample per network edge.
    pub epochs: u32,
    /// Negative samples per positive edge.
    pub negatives: u32,
    /// Initial learning rate, decayed linearly to 1e-4 of itself.
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 200,
            epochs: 100,
            negatives: 5,
            learning_rate: 0.025,
            seed: 42,
        }
    }
}

/// Immutable term-vector table keyed by the source network's vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    seed: u64,
    window: (i32, i32),
    terms: Vec<String>,
    index: HashMap<String, u32>,
    /// Row-major, terms.len() x dim.
    data: Vec<f64>,
}

impl EmbeddingTable {
    /// Assemble a table from explicit vectors. Intended for tests and for
    /// callers that produce vectors by other means.
    pub fn from_vectors(
        dim: usize,
        seed: u64,
        window: (i32, i32),
        entries: Vec<(String, Vec<f64>)>,
    ) -> Result<Self, EmbedError> {
        let mut terms = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        let mut data = Vec::with_capacity(entries.len() * dim);
        for (term, vec) in entries {
            if vec.len() != dim {
                return Err(EmbedError::BadConfig(format!(
                    "vector for {term:?} has length {}, expected {dim}",
                    vec.len()
                )));
            }
            if vec.iter().any(|x| !x.is_finite()) {
                return Err(EmbedError::BadConfig(format!(
                    "vector for {term:?} has non-finite entries"
                )));
            }
            if index.insert(term.clone(), terms.len() as u32).is_some() {
                return Err(EmbedError::BadConfig(format!("duplicate term {term:?}")));
            }
            terms.push(term);
            data.extend_from_slice(&vec);
        }
        Ok(EmbeddingTable {
            dim,
            seed,
            window,
            terms,
            index,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Year window of the network the table was trained on.
    pub fn window(&self) -> (i32, i32) {
        self.window
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn vector(&self, term: &str) -> Option<&[f64]> {
        self.index.get(term).map(|&i| self.vector_at(i))
    }

    pub fn vector_at(&self, i: u32) -> &[f64] {
        let start = i as usize * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Serialize to the versioned little-endian table format.
    pub fn save<W: Write>(&self, mut w: W) -> Result<(), EmbedError> {
        w.write_all(TABLE_MAGIC)?;
        w.write_u16::<LittleEndian>(TABLE_VERSION)?;
        w.write_u32::<LittleEndian>(self.dim as u32)?;
        w.write_u64::<LittleEndian>(self.seed)?;
        w.write_i32::<LittleEndian>(self.window.0)?;
        w.write_i32::<LittleEndian>(self.window.1)?;
        w.write_u64::<LittleEndian>(self.terms.len() as u64)?;
        for term in &self.terms {
            w.write_u32::<LittleEndian>(term.len() as u32)?;
            w.write_all(term.as_bytes())?;
        }
        for &x in &self.data {
            w.write_f64::<LittleEndian>(x)?;
        }
        Ok(())
    }

    pub fn load<R: Read>(mut r: R) -> Result<Self, EmbedError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != TABLE_MAGIC {
            return Err(EmbedError::BadMagic);
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != TABLE_VERSION {
            return Err(EmbedError::UnsupportedVersion(version));
        }
        let dim = r.read_u32::<LittleEndian>()? as usize;
        let seed = r.read_u64::<LittleEndian>()?;
        let window = (r.read_i32::<LittleEndian>()?, r.read_i32::<LittleEndian>()?);
        let n = r.read_u64::<LittleEndian>()? as usize;
        let mut terms = Vec::with_capacity(n);
        let mut index = HashMap::with_capacity(n);
        for i in 0..n {
            let len = r.read_u32::<LittleEndian>()? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf)?;
            let term =
                String::from_utf8(buf).map_err(|_| EmbedError::Corrupt("non-utf8 term".into()))?;
            if index.insert(term.clone(), i as u32).is_some() {
                return Err(EmbedError::Corrupt(format!("duplicate term {term:?}")));
            }
            terms.push(term);
        }
        let mut data = vec![0.0f64; n * dim];
        for x in &mut data {
            *x = r.read_f64::<LittleEndian>()?;
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(EmbedError::Corrupt("non-finite vector entry".into()));
        }
        Ok(EmbeddingTable {
            dim,
            seed,
            window,
            terms,
            index,
            data,
        })
    }

    pub fn save_to(&self, path: &Path) -> Result<(), EmbedError> {
        let file = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(file))
    }

    pub fn load_from(path: &Path) -> Result<Self, EmbedError> {
        let file = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(file))
    }
}

/// Per-epoch mean of the sampled objective; rises toward 0 as training fits.
#[derive(Debug, Clone, Default)]
pub struct TrainStats {
    pub epoch_mean_objective: Vec<f64>,
    pub samples_per_epoch: usize,
}

/// Train both proximity halves and concatenate. See [`train_with_stats`].
pub fn train_embeddings(
    net: &HistoricalNetwork,
    config: &TrainConfig,
) -> Result<EmbeddingTable, EmbedError> {
    train_with_stats(net, config).map(|(table, _)| table)
}

/// Train and also report the per-epoch objective trace (first-order half;
/// the trace is for convergence monitoring, not part of the table).
pub fn train_with_stats(
    net: &HistoricalNetwork,
    config: &TrainConfig,
) -> Result<(EmbeddingTable, TrainStats), EmbedError> {
    if config.dim < 2 || config.dim % 2 != 0 {
        return Err(EmbedError::BadDim(config.dim));
    }
    if !(config.learning_rate > 0.0) || !config.learning_rate.is_finite() {
        return Err(EmbedError::BadConfig(format!(
            "learning_rate must be positive, got {}",
            config.learning_rate
        )));
    }
    if net.is_empty() || net.vocab_size() == 0 {
        return Err(EmbedError::EmptyNetwork);
    }

    let half = config.dim / 2;
    let n = net.vocab_size();

    // Vertex vectors start uniform in [-0.5/dim, 0.5/dim]; context vectors
    // start at zero so second-order updates are driven by the vertex side.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 0.5 / config.dim as f64;
    let init_half = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n * half).map(|_| rng.gen_range(-bound..bound)).collect()
    };
    let mut first = init_half(&mut rng);
    let mut second = init_half(&mut rng);
    let mut second_ctx = vec![0.0f64; n * half];

    let edges: Vec<(u32, u32)> = net.edges().map(|(i, j, _)| (i, j)).collect();
    let stats = if edges.is_empty() {
        // Degenerate network without any co-occurring pair: nothing to sample,
        // vectors stay at initialization.
        TrainStats::default()
    } else {
        let edge_weights: Vec<f64> = net.edges().map(|(_, _, c)| c as f64).collect();
        let node_weights: Vec<f64> = (0..n as u32)
            .map(|i| {
                let deg: f64 = net.neighbors(i).iter().map(|&(_, c)| c as f64).sum();
                deg.powf(NEGATIVE_POWER)
            })
            .collect();
        let edge_table = AliasTable::new(&edge_weights)
            .ok_or_else(|| EmbedError::BadConfig("edge weights sum to zero".into()))?;
        let node_table = AliasTable::new(&node_weights)
            .ok_or_else(|| EmbedError::BadConfig("degree weights sum to zero".into()))?;

        let mut order_rng = ChaCha8Rng::seed_from_u64(config.seed);
        order_rng.set_stream(1);
        let stats = train_half(
            &mut first,
            None,
            half,
            &edges,
            &edge_table,
            &node_table,
            config,
            &mut order_rng,
        );
        let mut order_rng = ChaCha8Rng::seed_from_u64(config.seed);
        order_rng.set_stream(2);
        train_half(
            &mut second,
            Some(second_ctx.as_mut_slice()),
            half,
            &edges,
            &edge_table,
            &node_table,
            config,
            &mut order_rng,
        );
        stats
    };

    let mut entries = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = Vec::with_capacity(config.dim);
        v.extend_from_slice(&first[i * half..(i + 1) * half]);
        v.extend_from_slice(&second[i * half..(i + 1) * half]);
        entries.push((net.term_at(i as u32).to_string(), v));
    }
    let table = EmbeddingTable::from_vectors(config.dim, config.seed, net.window(), entries)?;
    Ok((table, stats))
}

/// One stochastic-gradient pass over `epochs x edges.len()` sampled edges.
///
/// `context`: `None` trains first-order proximity (target vector is the other
/// endpoint's vertex vector); `Some` trains second-order proximity against
/// the separate context array.
#[allow(clippy::too_many_arguments)]
fn train_half(
    vertex: &mut [f64],
    mut context: Option<&mut [f64]>,
    half: usize,
    edges: &[(u32, u32)],
    edge_table: &AliasTable,
    node_table: &AliasTable,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> TrainStats {
    let samples_per_epoch = edges.len();
    let total = config.epochs as usize * samples_per_epoch;
    let lr0 = config.learning_rate;
    let mut epoch_mean_objective = Vec::with_capacity(config.epochs as usize);
    let mut epoch_sum = 0.0;
    let mut grad_u = vec![0.0f64; half];
    let mut negs: Vec<u32> = Vec::with_capacity(config.negatives as usize);

    for t in 0..total {
        let lr = lr0 * (1.0 - t as f64 / (total as f64 + 1.0)).max(1e-4);
        let (a, b) = edges[edge_table.sample(rng)];
        // Undirected edge, sampled direction.
        let (src, dst) = if rng.gen::<bool>() { (a, b) } else { (b, a) };
        let su = src as usize * half;

        // A draw that hits either endpoint is discarded, not redrawn.
        negs.clear();
        for _ in 0..config.negatives {
            let neg = node_table.sample(rng) as u32;
            if neg != dst && neg != src {
                negs.push(neg);
            }
        }

        // Sampled objective before this step's updates, for the epoch trace.
        {
            let u = &vertex[su..su + half];
            let mut obj = log_sigmoid(dot(u, target_row(vertex, context.as_deref(), dst, half)));
            for &neg in &negs {
                obj += log_sigmoid(-dot(u, target_row(vertex, context.as_deref(), neg, half)));
            }
            epoch_sum += obj;
        }

        grad_u.iter_mut().for_each(|g| *g = 0.0);
        sgd_pair(vertex, context.as_deref_mut(), su, dst, half, 1.0, lr, &mut grad_u);
        for &neg in &negs {
            sgd_pair(vertex, context.as_deref_mut(), su, neg, half, 0.0, lr, &mut grad_u);
        }
        for (x, g) in vertex[su..su + half].iter_mut().zip(&grad_u) {
            *x += g;
        }

        if (t + 1) % samples_per_epoch == 0 {
            epoch_mean_objective.push(epoch_sum / samples_per_epoch as f64);
            epoch_sum = 0.0;
        }
    }

    TrainStats {
        epoch_mean_objective,
        samples_per_epoch,
    }
}

fn target_row<'a>(
    vertex: &'a [f64],
    context: Option<&'a [f64]>,
    node: u32,
    half: usize,
) -> &'a [f64] {
    let s = node as usize * half;
    match context {
        Some(ctx) => &ctx[s..s + half],
        None => &vertex[s..s + half],
    }
}

/// One (source, target, label) update. Accumulates the source gradient in
/// `grad_u` (applied once per sample, word2vec style) and updates the target
/// row in place.
#[allow(clippy::too_many_arguments)]
fn sgd_pair(
    vertex: &mut [f64],
    context: Option<&mut [f64]>,
    su: usize,
    target: u32,
    half: usize,
    label: f64,
    lr: f64,
    grad_u: &mut [f64],
) {
    let st = target as usize * half;
    match context {
        Some(ctx) => {
            let u = &vertex[su..su + half];
            let v = &mut ctx[st..st + half];
            let g = (label - sigmoid(dot(u, v))) * lr;
            for k in 0..half {
                grad_u[k] += g * v[k];
                v[k] += g * u[k];
            }
        }
        None => {
            // First order: both rows live in `vertex`. They never alias:
            // self-pairs are absent from the network and negatives equal to
            // either endpoint were discarded.
            let g = {
                let u = &vertex[su..su + half];
                let v = &vertex[st..st + half];
                (label - sigmoid(dot(u, v))) * lr
            };
            for k in 0..half {
                let vk = vertex[st + k];
                grad_u[k] += g * vk;
                vertex[st + k] += g * vertex[su + k];
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// ln(sigmoid(x)) computed without overflow for large |x|.
fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Negative-sampling objective for one positive pair (u, v) and its negative
/// rows: `ln sigmoid(u.v) + sum_k ln sigmoid(-u.n_k)`. Maximized in training.
pub fn ns_objective(u: &[f64], v: &[f64], negatives: &[Vec<f64>]) -> f64 {
    let mut obj = log_sigmoid(dot(u, v));
    for n in negatives {
        obj += log_sigmoid(-dot(u, n));
    }
    obj
}

/// Analytic gradients of [`ns_objective`] with respect to u, v, and each
/// negative row, in that order.
pub fn ns_gradients(
    u: &[f64],
    v: &[f64],
    negatives: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let d = u.len();
    let g_pos = 1.0 - sigmoid(dot(u, v));
    let mut du: Vec<f64> = (0..d).map(|k| g_pos * v[k]).collect();
    let dv: Vec<f64> = (0..d).map(|k| g_pos * u[k]).collect();
    let mut dnegs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g_neg = sigmoid(dot(u, n));
        for k in 0..d {
            du[k] -= g_neg * n[k];
        }
        dnegs.push((0..d).map(|k| -g_neg * u[k]).collect());
    }
    (du, dv, dnegs)
}

/// Vose alias table for O(1) weighted sampling.
struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// Returns `None` when the weights are empty or sum to zero.
    fn new(weights: &[f64]) -> Option<Self> {
        let n = weights.len();
        let sum: f64 = weights.iter().sum();
        if n == 0 || !(sum > 0.0) {
            return None;
        }
        let mut prob = vec![0.0f64; n];
        let mut alias = vec![0u32; n];
        let scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / sum).collect();
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        let mut scaled = scaled;
        while !small.is_empty() && !large.is_empty() {
            let s = small.pop().expect("checked non-empty");
            let l = large.pop().expect("checked non-empty");
            prob[s as usize] = scaled[s as usize];
            alias[s as usize] = l;
            scaled[l as usize] -= 1.0 - scaled[s as usize];
            if scaled[l as usize] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        for i in small.into_iter().chain(large) {
            prob[i as usize] = 1.0;
        }
        Some(AliasTable { prob, alias })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.prob.len());
        if rng.gen::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{CorpusIndex, PaperRecord};
    use crate::histnet::build_network;

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

    fn toy_network() -> HistoricalNetwork {
        // Path A-B-C-D-E with varying weights.
        let recs = vec![
            rec("p1", 2008, &["A", "B"]),
            rec("p2", 2008, &["A", "B"]),
            rec("p3", 2008, &["B", "C"]),
            rec("p4", 2009, &["C", "D"]),
            rec("p5", 2009, &["D", "E"]),
        ];
        build_network(&CorpusIndex::build(recs), 2010, 5)
    }

    fn small_config(seed: u64) -> TrainConfig {
        TrainConfig {
            dim: 8,
            epochs: 50,
            negatives: 3,
            learning_rate: 0.05,
            seed,
        }
    }

    #[test]
    fn rejects_odd_dim_and_empty_network() {
        let net = toy_network();
        let cfg = TrainConfig {
            dim: 7,
            ..small_config(1)
        };
        assert!(matches!(
            train_embeddings(&net, &cfg),
            Err(EmbedError::BadDim(7))
        ));
        let empty = build_network(&CorpusIndex::build(vec![]), 2010, 5);
        assert!(matches!(
            train_embeddings(&empty, &small_config(1)),
            Err(EmbedError::EmptyNetwork)
        ));
    }

    #[test]
    fn zero_epochs_returns_seeded_initialization() {
        let net = toy_network();
        let cfg = TrainConfig {
            epochs: 0,
            ..small_config(7)
        };
        let t1 = train_embeddings(&net, &cfg).unwrap();
        let t2 = train_embeddings(&net, &cfg).unwrap();
        assert_eq!(t1, t2);
        let bound = 0.5 / cfg.dim as f64;
        for term in t1.terms() {
            let v = t1.vector(term).unwrap();
            // Second-order context half never enters the table; the stored
            // halves are the seeded vertex initializations.
            assert!(v.iter().all(|x| x.abs() <= bound));
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let net = toy_network();
        let a = train_embeddings(&net, &small_config(99)).unwrap();
        let b = train_embeddings(&net, &small_config(99)).unwrap();
        assert_eq!(a, b);
        let c = train_embeddings(&net, &small_config(100)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn table_covers_network_vocabulary() {
        let net = toy_network();
        let table = train_embeddings(&net, &small_config(5)).unwrap();
        assert_eq!(table.len(), net.vocab_size());
        for i in 0..net.vocab_size() as u32 {
            let v = table.vector(net.term_at(i)).expect("every term embedded");
            assert_eq!(v.len(), 8);
            assert!(v.iter().all(|x| x.is_finite()));
        }
        assert_eq!(table.window(), net.window());
    }

    #[test]
    fn objective_improves_on_toy_network() {
        let net = toy_network();
        let (_, stats) = train_with_stats(&net, &small_config(3)).unwrap();
        let first = stats.epoch_mean_objective.first().copied().unwrap();
        let last = stats.epoch_mean_objective.last().copied().unwrap();
        assert!(
            last > first,
            "mean objective should rise: first {first}, last {last}"
        );
    }

    #[test]
    fn cliques_separate() {
        let mut recs = Vec::new();
        let left = ["l0", "l1", "l2", "l3", "l4", "l5"];
        let right = ["r0", "r1", "r2", "r3", "r4", "r5"];
        for k in 0..10 {
            recs.push(rec(&format!("pl{k}"), 2008, &left));
            recs.push(rec(&format!("pr{k}"), 2008, &right));
        }
        let net = build_network(&CorpusIndex::build(recs), 2010, 5);
        let cfg = TrainConfig {
            dim: 16,
            epochs: 200,
            negatives: 5,
            learning_rate: 0.05,
            seed: 11,
        };
        let table = train_embeddings(&net, &cfg).unwrap();

        let cos = |a: &str, b: &str| {
            let (u, v) = (table.vector(a).unwrap(), table.vector(b).unwrap());
            dot(u, v) / (dot(u, u).sqrt() * dot(v, v).sqrt())
        };
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for i in 0..left.len() {
            for j in (i + 1)..left.len() {
                intra.push(cos(left[i], left[j]));
                intra.push(cos(right[i], right[j]));
            }
            for j in 0..right.len() {
                inter.push(cos(left[i], right[j]));
            }
        }
        let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(
            mean(&intra) > mean(&inter),
            "intra {} should exceed inter {}",
            mean(&intra),
            mean(&inter)
        );
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let d = 6;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()
        };
        let u = draw(&mut rng);
        let v = draw(&mut rng);
        let negs: Vec<Vec<f64>> = (0..3).map(|_| draw(&mut rng)).collect();
        let (du, dv, dnegs) = ns_gradients(&u, &v, &negs);

        let h = 1e-6;
        let check = |analytic: f64, plus: f64, minus: f64, what: &str| {
            let numeric = (plus - minus) / (2.0 * h);
            let denom = analytic.abs().max(numeric.abs()).max(1e-12);
            let rel = (analytic - numeric).abs() / denom;
            assert!(rel < 1e-4, "{what}: analytic {analytic}, numeric {numeric}");
        };
        for k in 0..d {
            let mut up = u.clone();
            let mut um = u.clone();
            up[k] += h;
            um[k] -= h;
            check(
                du[k],
                ns_objective(&up, &v, &negs),
                ns_objective(&um, &v, &negs),
                "du",
            );
            let mut vp = v.clone();
            let mut vm = v.clone();
            vp[k] += h;
            vm[k] -= h;
            check(
                dv[k],
                ns_objective(&u, &vp, &negs),
                ns_objective(&u, &vm, &negs),
                "dv",
            );
            for (ni, n) in negs.iter().enumerate() {
                let mut np = negs.clone();
                let mut nm = negs.clone();
                np[ni][k] = n[k] + h;
                nm[ni][k] = n[k] - h;
                check(
                    dnegs[ni][k],
                    ns_objective(&u, &v, &np),
                    ns_objective(&u, &v, &nm),
                    "dneg",
                );
            }
        }
    }

    #[test]
    fn file_roundtrip_is_lossless() {
        let net = toy_network();
        let table = train_embeddings(&net, &small_config(21)).unwrap();
        let mut buf = Vec::new();
        table.save(&mut buf).unwrap();
        let loaded = EmbeddingTable::load(buf.as_slice()).unwrap();
        assert_eq!(table, loaded);
        assert_eq!(loaded.seed(), 21);
    }

    #[test]
    fn file_rejects_bad_header() {
        assert!(matches!(
            EmbeddingTable::load(&b"WRNG\x01\x00"[..]),
            Err(EmbedError::BadMagic)
        ));
        let table = train_embeddings(&toy_network(), &small_config(2)).unwrap();
        let mut buf = Vec::new();
        table.save(&mut buf).unwrap();
        buf[4] = 9;
        assert!(matches!(
            EmbeddingTable::load(buf.as_slice()),
            Err(EmbedError::UnsupportedVersion(9))
        ));
        // Truncation is an i/o error, not a silent partial load.
        let cut = &buf[..buf.len() / 2];
        assert!(EmbeddingTable::load(cut).is_err());
    }

    #[test]
    fn alias_table_matches_weights() {
        let weights = [1.0, 3.0, 6.0];
        let table = AliasTable::new(&weights).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut counts = [0usize; 3];
        let draws = 100_000;
        for _ in 0..draws {
            counts[table.sample(&mut rng)] += 1;
        }
        let total: f64 = weights.iter().sum();
        for (i, &w) in weights.iter().enumerate() {
            let expected = w / total;
            let got = counts[i] as f64 / draws as f64;
            assert!(
                (got - expected).abs() < 0.01,
                "weight {i}: expected {expected}, got {got}"
            );
        }
        assert!(AliasTable::new(&[]).is_none());
        assert!(AliasTable::new(&[0.0, 0.0]).is_none());
    }
}
