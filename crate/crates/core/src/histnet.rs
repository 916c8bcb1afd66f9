//! Historical co-occurrence network for a focal year: the vocabulary of terms
//! seen in the preceding window of papers, per-term document frequencies, and
//! paper-level co-occurrence counts between term pairs.
//!
//! The network is immutable once built and is shared read-only by the
//! distance computations. Node indices are assigned by first occurrence in
//! (year, input) order, so identical corpora produce bit-identical networks.

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusIndex;

/// Magic bytes and format version for the on-disk network cache.
const CACHE_MAGIC: &[u8; 4] = b"CTDN";
const CACHE_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("self-pair {0:?}: pair classification and distances are defined for distinct terms")]
    SelfPair(String),
    #[error("network cache: bad magic (not a network cache file)")]
    BadMagic,
    #[error("network cache: unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("network cache: {0}")]
    Corrupt(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// How a focal term pair relates to the historical network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeClass {
    /// At least one term absent from the historical vocabulary.
    NewNodeNewEdge,
    /// Both terms known historically but never in the same paper.
    OldNodeNewEdge,
    /// The pair co-occurred in at least one historical paper.
    OldNodeOldEdge,
}

impl EdgeClass {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeClass::NewNodeNewEdge => "new_node_new_edge",
            EdgeClass::OldNodeNewEdge => "old_node_new_edge",
            EdgeClass::OldNodeOldEdge => "old_node_old_edge",
        }
    }
}

/// Term co-occurrence network over a fixed inclusive year window.
///
/// Invariants: co-occurrence counts are symmetric, self-pairs are never
/// stored, and `cooc(i,j) <= min(doc_count(i), doc_count(j)) <= paper_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalNetwork {
    window: (i32, i32),
    paper_count: u64,
    terms: Vec<String>,
    vocab: HashMap<String, u32>,
    doc_count: Vec<u32>,
    /// Per node, (neighbor, count) sorted by neighbor index.
    adj: Vec<Vec<(u32, u32)>>,
    /// L2 norm of each node's co-occurrence row (self entry is zero).
    row_norm: Vec<f64>,
}

/// Build the network from all papers with year in
/// `[focal_year - window_len, focal_year - 1]`.
///
/// An empty window yields an empty network rather than an error: every focal
/// term is then new and all pair distances are 1, which keeps the earliest
/// papers scoreable.
pub fn build_network(index: &CorpusIndex, focal_year: i32, window_len: u32) -> HistoricalNetwork {
    assert!(window_len >= 1, "window_len must be at least 1");
    let start = focal_year - window_len as i32;
    let end = focal_year - 1;

    let mut terms: Vec<String> = Vec::new();
    let mut vocab: HashMap<String, u32> = HashMap::new();
    let mut doc_count: Vec<u32> = Vec::new();
    let mut pair_counts: HashMap<(u32, u32), u32> = HashMap::new();
    let mut paper_count: u64 = 0;

    for rec in index.records_in_range(start, end) {
        paper_count += 1;
        let mut ids: Vec<u32> = Vec::with_capacity(rec.terms.len());
        for term in &rec.terms {
            let id = *vocab.entry(term.clone()).or_insert_with(|| {
                terms.push(term.clone());
                doc_count.push(0);
                (terms.len() - 1) as u32
            });
            doc_count[id as usize] += 1;
            ids.push(id);
        }
        // Terms are deduplicated per record, so every unordered pair of
        // distinct indices counts this paper exactly once.
        for a in 0..ids.len() {
            for b in (a + 1)..ids.len() {
                let key = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                *pair_counts.entry(key).or_insert(0) += 1;
            }
        }
    }

    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); terms.len()];
    for (&(i, j), &c) in &pair_counts {
        adj[i as usize].push((j, c));
        adj[j as usize].push((i, c));
    }
    for row in &mut adj {
        row.sort_unstable_by_key(|&(n, _)| n);
    }
    let row_norm = compute_row_norms(&adj);

    HistoricalNetwork {
        window: (start, end),
        paper_count,
        terms,
        vocab,
        doc_count,
        adj,
        row_norm,
    }
}

fn compute_row_norms(adj: &[Vec<(u32, u32)>]) -> Vec<f64> {
    adj.iter()
        .map(|row| {
            row.iter()
                .map(|&(_, c)| (c as f64) * (c as f64))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

impl HistoricalNetwork {
    /// Inclusive (start_year, end_year) the network was built from.
    pub fn window(&self) -> (i32, i32) {
        self.window
    }

    pub fn paper_count(&self) -> u64 {
        self.paper_count
    }

    pub fn vocab_size(&self) -> usize {
        self.terms.len()
    }

    /// True when the window contained no papers; all focal terms are new.
    pub fn is_empty(&self) -> bool {
        self.paper_count == 0
    }

    pub fn index_of(&self, term: &str) -> Option<u32> {
        self.vocab.get(term).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.vocab.contains_key(term)
    }

    pub fn term_at(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    /// Number of historical papers containing the term.
    pub fn doc_count(&self, id: u32) -> u32 {
        self.doc_count[id as usize]
    }

    /// Number of historical papers containing both terms; 0 when the pair
    /// never co-occurred (or `i == j`, since self-pairs are not stored).
    pub fn cooc(&self, i: u32, j: u32) -> u32 {
        let row = &self.adj[i as usize];
        match row.binary_search_by_key(&j, |&(n, _)| n) {
            Ok(pos) => row[pos].1,
            Err(_) => 0,
        }
    }

    /// Sorted (neighbor, count) pairs for a node.
    pub fn neighbors(&self, i: u32) -> &[(u32, u32)] {
        &self.adj[i as usize]
    }

    /// All stored co-occurrence entries as (i, j, count) with i < j.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&(j, _)| (i as u32) < j)
                .map(move |&(j, c)| (i as u32, j, c))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// L2 norm of the node's co-occurrence row.
    pub fn row_norm(&self, i: u32) -> f64 {
        self.row_norm[i as usize]
    }

    /// Dot product of two co-occurrence rows. The rows have zero diagonal and
    /// no self entries, so shared neighbors never include `i` or `j`.
    pub fn row_dot(&self, i: u32, j: u32) -> f64 {
        let (mut a, mut b) = (
            self.adj[i as usize].iter().peekable(),
            self.adj[j as usize].iter().peekable(),
        );
        let mut dot = 0.0;
        while let (Some(&&(na, ca)), Some(&&(nb, cb))) = (a.peek(), b.peek()) {
            match na.cmp(&nb) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    dot += ca as f64 * cb as f64;
                    a.next();
                    b.next();
                }
            }
        }
        dot
    }

    /// Unweighted shortest-path hop count between two nodes, or `None` when
    /// no path exists. BFS suffices since every edge weighs one hop.
    pub fn hops(&self, from: u32, to: u32) -> Option<u32> {
        if from == to {
            return Some(0);
        }
        let mut dist: Vec<u32> = vec![u32::MAX; self.terms.len()];
        let mut queue = VecDeque::new();
        dist[from as usize] = 0;
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            let d = dist[u as usize];
            for &(v, _) in &self.adj[u as usize] {
                if dist[v as usize] == u32::MAX {
                    if v == to {
                        return Some(d + 1);
                    }
                    dist[v as usize] = d + 1;
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Classify a distinct term pair relative to this network.
    pub fn classify_pair(&self, t_i: &str, t_j: &str) -> Result<EdgeClass, NetworkError> {
        if t_i == t_j {
            return Err(NetworkError::SelfPair(t_i.to_string()));
        }
        match (self.index_of(t_i), self.index_of(t_j)) {
            (Some(i), Some(j)) => {
                if self.cooc(i, j) > 0 {
                    Ok(EdgeClass::OldNodeOldEdge)
                } else {
                    Ok(EdgeClass::OldNodeNewEdge)
                }
            }
            _ => Ok(EdgeClass::NewNodeNewEdge),
        }
    }

    /// Serialize to the versioned little-endian cache format.
    pub fn save<W: Write>(&self, mut w: W) -> Result<(), NetworkError> {
        w.write_all(CACHE_MAGIC)?;
        w.write_u16::<LittleEndian>(CACHE_VERSION)?;
        w.write_i32::<LittleEndian>(self.window.0)?;
        w.write_i32::<LittleEndian>(self.window.1)?;
        w.write_u64::<LittleEndian>(self.paper_count)?;
        w.write_u64::<LittleEndian>(self.terms.len() as u64)?;
        for (term, &dc) in self.terms.iter().zip(&self.doc_count) {
            w.write_u32::<LittleEndian>(term.len() as u32)?;
            w.write_all(term.as_bytes())?;
            w.write_u32::<LittleEndian>(dc)?;
        }
        let edges: Vec<(u32, u32, u32)> = self.edges().collect();
        w.write_u64::<LittleEndian>(edges.len() as u64)?;
        for (i, j, c) in edges {
            w.write_u32::<LittleEndian>(i)?;
            w.write_u32::<LittleEndian>(j)?;
            w.write_u32::<LittleEndian>(c)?;
        }
        Ok(())
    }

    /// Deserialize a network previously written by [`HistoricalNetwork::save`].
    pub fn load<R: Read>(mut r: R) -> Result<Self, NetworkError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(NetworkError::BadMagic);
        }
        let version = r.read_u16::<LittleEndian>()?;
        if version != CACHE_VERSION {
            return Err(NetworkError::UnsupportedVersion(version));
        }
        let start = r.read_i32::<LittleEndian>()?;
        let end = r.read_i32::<LittleEndian>()?;
        let paper_count = r.read_u64::<LittleEndian>()?;
        let n = r.read_u64::<LittleEndian>()? as usize;

        let mut terms = Vec::with_capacity(n);
        let mut vocab = HashMap::with_capacity(n);
        let mut doc_count = Vec::with_capacity(n);
        for id in 0..n {
            let len = r.read_u32::<LittleEndian>()? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf)?;
            let term = String::from_utf8(buf)
                .map_err(|_| NetworkError::Corrupt("non-utf8 term".into()))?;
            if vocab.insert(term.clone(), id as u32).is_some() {
                return Err(NetworkError::Corrupt(format!("duplicate term {term:?}")));
            }
            terms.push(term);
            doc_count.push(r.read_u32::<LittleEndian>()?);
        }

        let edge_count = r.read_u64::<LittleEndian>()? as usize;
        let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for _ in 0..edge_count {
            let i = r.read_u32::<LittleEndian>()?;
            let j = r.read_u32::<LittleEndian>()?;
            let c = r.read_u32::<LittleEndian>()?;
            if i >= j || j as usize >= n {
                return Err(NetworkError::Corrupt(format!("bad edge ({i}, {j})")));
            }
            if c == 0 {
                return Err(NetworkError::Corrupt(format!("zero-count edge ({i}, {j})")));
            }
            adj[i as usize].push((j, c));
            adj[j as usize].push((i, c));
        }
        for row in &mut adj {
            row.sort_unstable_by_key(|&(v, _)| v);
        }
        let row_norm = compute_row_norms(&adj);

        Ok(HistoricalNetwork {
            window: (start, end),
            paper_count,
            terms,
            vocab,
            doc_count,
            adj,
            row_norm,
        })
    }

    pub fn save_to(&self, path: &Path) -> Result<(), NetworkError> {
        let file = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(file))
    }

    pub fn load_from(path: &Path) -> Result<Self, NetworkError> {
        let file = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(file))
    }
}
