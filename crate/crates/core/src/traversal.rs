//! Traversal distance: the minimum total weight of a walk visiting all focal
//! terms at least once.
//!
//! Revisits are equivalent to shortcutting through already-seen nodes, so the
//! walk objective reduces exactly to a minimum-weight open Hamiltonian path
//! on the metric closure of the focal matrix. Closure runs first because
//! cosine distances can violate the triangle inequality. Small instances are
//! solved exactly by Held-Karp with a zero-weight virtual depot (free
//! endpoints); larger ones by multi-start nearest-neighbor plus 2-opt and
//! Or-opt refinement. A factorial brute-force solver serves as the oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::SquareMatrix;
use crate::pairdist::FocalDistanceMatrix;

/// Largest n solved exactly by default.
pub const DEFAULT_EXACT_THRESHOLD: usize = 16;

/// Hard ceiling for Held-Karp regardless of configuration; the DP table is
/// n * 2^n entries and past this point memory growth is unreasonable.
pub const HELD_KARP_CAP: usize = 20;

/// Largest n the factorial oracle accepts.
pub const BRUTE_FORCE_MAX: usize = 9;

/// Accepted local-search moves must improve by more than this; guards
/// against cycling on floating-point noise.
const IMPROVE_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TraversalError {
    #[error("n = {n} exceeds the exact-solver limit {limit}; use the heuristic")]
    TooLargeForExact { n: usize, limit: usize },
    #[error("n = {n} exceeds the brute-force limit {max}", max = BRUTE_FORCE_MAX)]
    TooLargeForBrute { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    BruteForce,
    HeldKarp,
    Heuristic,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::BruteForce => "brute_force",
            SolverKind::HeldKarp => "held_karp",
            SolverKind::Heuristic => "heuristic",
        }
    }
}

/// A solved traversal: total weight, visit order over the closed matrix, and
/// solver provenance. `length` always equals the recomputed sum of
/// consecutive closed-matrix distances along `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraversalResult {
    pub length: f64,
    pub order: Vec<usize>,
    pub exact: bool,
    pub solver: SolverKind,
}

fn trivial_result(n: usize, solver: SolverKind, exact: bool) -> TraversalResult {
    TraversalResult {
        length: 0.0,
        order: (0..n).collect(),
        exact,
        solver,
    }
}

/// Direction-canonical order: a path and its reverse are the same traversal,
/// so keep whichever is lexicographically smaller.
fn canonicalize(order: &mut [usize]) {
    let n = order.len();
    for k in 0..n / 2 {
        match order[k].cmp(&order[n - 1 - k]) {
            std::cmp::Ordering::Less => return,
            std::cmp::Ordering::Greater => {
                order.reverse();
                return;
            }
            std::cmp::Ordering::Equal => {}
        }
    }
}

/// All-pairs shortest paths over the focal matrix, with next-hop tracking so
/// closure edges can be expanded back into the underlying revisiting walk.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricClosure {
    pub dist: SquareMatrix,
    /// Row-major next-hop: first step on a shortest path i -> j.
    next: Vec<u32>,
}

/// Floyd-Warshall closure. The focal graph is complete, so every pair stays
/// reachable and `closed(i, j) <= m(i, j)` everywhere.
pub fn metric_closure(m: &SquareMatrix) -> MetricClosure {
    let n = m.n();
    let mut dist = m.clone();
    let mut next: Vec<u32> = (0..n * n).map(|idx| (idx % n) as u32).collect();
    for k in 0..n {
        for i in 0..n {
            let dik = dist.get(i, k);
            for j in 0..n {
                let through = dik + dist.get(k, j);
                if through < dist.get(i, j) {
                    dist.set(i, j, through);
                    next[i * n + j] = next[i * n + k];
                }
            }
        }
    }
    MetricClosure { dist, next }
}

impl MetricClosure {
    /// Shortest underlying path from i to j, endpoints inclusive.
    pub fn path(&self, i: usize, j: usize) -> Vec<usize> {
        let n = self.dist.n();
        let mut walk = vec![i];
        let mut cur = i;
        while cur != j {
            cur = self.next[cur * n + j] as usize;
            walk.push(cur);
        }
        walk
    }

    /// Expand a closure-edge visit order into the full walk with revisits.
    pub fn expand_walk(&self, order: &[usize]) -> Vec<usize> {
        if order.is_empty() {
            return Vec::new();
        }
        let mut walk = vec![order[0]];
        for pair in order.windows(2) {
            let seg = self.path(pair[0], pair[1]);
            walk.extend_from_slice(&seg[1..]);
        }
        walk
    }
}

/// Held-Karp over subsets with free endpoints: seeding `dp[{i}][i] = 0` for
/// every i is equivalent to closing the tour through a zero-weight virtual
/// depot. Exact up to `threshold` (capped at [`HELD_KARP_CAP`]).
pub fn solve_exact(closed: &SquareMatrix, threshold: usize) -> Result<TraversalResult, TraversalError> {
    let n = closed.n();
    let limit = threshold.min(HELD_KARP_CAP);
    if n > limit {
        return Err(TraversalError::TooLargeForExact { n, limit });
    }
    if n <= 1 {
        return Ok(trivial_result(n, SolverKind::HeldKarp, true));
    }

    let full: usize = (1 << n) - 1;
    let mut dp = vec![f64::INFINITY; (full + 1) * n];
    let mut parent = vec![u8::MAX; (full + 1) * n];
    for i in 0..n {
        dp[(1 << i) * n + i] = 0.0;
    }
    for mask in 1..=full {
        for last in 0..n {
            if mask & (1 << last) == 0 {
                continue;
            }
            let cur = dp[mask * n + last];
            if !cur.is_finite() {
                continue;
            }
            for next in 0..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let nm = mask | (1 << next);
                let cand = cur + closed.get(last, next);
                if cand < dp[nm * n + next] {
                    dp[nm * n + next] = cand;
                    parent[nm * n + next] = last as u8;
                }
            }
        }
    }

    let mut end = 0;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let v = dp[full * n + i];
        if v < best {
            best = v;
            end = i;
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    let mut last = end;
    loop {
        order.push(last);
        let p = parent[mask * n + last];
        mask &= !(1 << last);
        if p == u8::MAX {
            break;
        }
        last = p as usize;
    }
    debug_assert_eq!(mask, 0);
    order.reverse();
    canonicalize(&mut order);
    let length = closed.path_length(&order);
    Ok(TraversalResult {
        length,
        order,
        exact: true,
        solver: SolverKind::HeldKarp,
    })
}

/// Factorial-enumeration oracle: all n!/2 undirected orders.
pub fn solve_brute(closed: &SquareMatrix) -> Result<TraversalResult, TraversalError> {
    let n = closed.n();
    if n > BRUTE_FORCE_MAX {
        return Err(TraversalError::TooLargeForBrute { n });
    }
    if n <= 1 {
        return Ok(trivial_result(n, SolverKind::BruteForce, true));
    }

    let mut best_len = f64::INFINITY;
    let mut best: Vec<usize> = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    // Lexicographic enumeration with strict improvement keeps the
    // lexicographically smallest optimal representative. Orders whose first
    // element exceeds their last are the reverses of ones already seen.
    loop {
        if perm[0] < perm[n - 1] {
            let len = closed.path_length(&perm);
            if len < best_len {
                best_len = len;
                best = perm.clone();
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let length = closed.path_length(&best);
    Ok(TraversalResult {
        length,
        order: best,
        exact: true,
        solver: SolverKind::BruteForce,
    })
}

/// In-place lexicographic successor; false once the sequence is descending.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeuristicConfig {
    /// Number of nearest-neighbor starts; `None` starts from every node.
    /// Fewer starts than nodes are drawn without replacement from the seed.
    pub starts: Option<usize>,
    pub seed: u64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            starts: None,
            seed: 42,
        }
    }
}

/// Multi-start nearest-neighbor construction, each start refined by
/// first-improvement 2-opt and Or-opt to joint local optimality. Never
/// better than the exact optimum, deterministic for a fixed seed.
pub fn solve_heuristic(closed: &SquareMatrix, config: &HeuristicConfig) -> TraversalResult {
    let n = closed.n();
    if n <= 1 {
        return trivial_result(n, SolverKind::Heuristic, false);
    }

    let starts: Vec<usize> = match config.starts {
        Some(s) if s < n => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rand::seq::index::sample(&mut rng, n, s.max(1)).into_vec()
        }
        _ => (0..n).collect(),
    };

    let mut best_len = f64::INFINITY;
    let mut best: Vec<usize> = Vec::new();
    for &start in &starts {
        let mut order = nearest_neighbor(closed, start);
        local_search(closed, &mut order);
        let len = closed.path_length(&order);
        if len < best_len - IMPROVE_EPS {
            best_len = len;
            best = order;
        }
    }
    canonicalize(&mut best);
    let length = closed.path_length(&best);
    TraversalResult {
        length,
        order: best,
        exact: false,
        solver: SolverKind::Heuristic,
    }
}

fn nearest_neighbor(m: &SquareMatrix, start: usize) -> Vec<usize> {
    let n = m.n();
    let mut order = Vec::with_capacity(n);
    let mut used = vec![false; n];
    order.push(start);
    used[start] = true;
    for _ in 1..n {
        let last = *order.last().unwrap();
        let mut pick = usize::MAX;
        let mut best = f64::INFINITY;
        for cand in 0..n {
            if !used[cand] && m.get(last, cand) < best {
                best = m.get(last, cand);
                pick = cand;
            }
        }
        order.push(pick);
        used[pick] = true;
    }
    order
}

fn local_search(m: &SquareMatrix, order: &mut Vec<usize>) {
    loop {
        if two_opt_pass(m, order) {
            continue;
        }
        if or_opt_pass(m, order) {
            continue;
        }
        break;
    }
}

/// Reverse one segment if it shortens the path; first improvement wins.
/// Endpoints are free, so boundary edges only exist on the interior side.
fn two_opt_pass(m: &SquareMatrix, order: &mut [usize]) -> bool {
    let n = order.len();
    for i in 0..n - 1 {
        for j in (i + 1)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let mut delta = 0.0;
            if i > 0 {
                delta += m.get(order[i - 1], order[j]) - m.get(order[i - 1], order[i]);
            }
            if j < n - 1 {
                delta += m.get(order[i], order[j + 1]) - m.get(order[j], order[j + 1]);
            }
            if delta < -IMPROVE_EPS {
                order[i..=j].reverse();
                return true;
            }
        }
    }
    false
}

/// Relocate a short segment (lengths 1..=3) elsewhere in the path if that
/// shortens it; candidate lengths are recomputed outright, which keeps the
/// boundary cases trivially correct.
fn or_opt_pass(m: &SquareMatrix, order: &mut Vec<usize>) -> bool {
    let n = order.len();
    let cur_len = m.path_length(order);
    let mut candidate = Vec::with_capacity(n);
    for seg_len in 1..=(n - 1).min(3) {
        for s in 0..=(n - seg_len) {
            for insert in 0..=(n - seg_len) {
                if insert == s {
                    continue;
                }
                candidate.clear();
                candidate.extend(order[..s].iter().chain(&order[s + seg_len..]));
                let tail = candidate.split_off(insert);
                candidate.extend_from_slice(&order[s..s + seg_len]);
                candidate.extend(tail);
                if m.path_length(&candidate) < cur_len - IMPROVE_EPS {
                    order.clear();
                    order.extend_from_slice(&candidate);
                    return true;
                }
            }
        }
    }
    false
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraversalConfig {
    pub exact_threshold: usize,
    pub heuristic: HeuristicConfig,
}

impl Default for TraversalConfig {
    fn default() -> Self {
        TraversalConfig {
            exact_threshold: DEFAULT_EXACT_THRESHOLD,
            heuristic: HeuristicConfig::default(),
        }
    }
}

/// Full traversal distance of a focal matrix: metric closure, then the exact
/// solver up to the configured threshold, the heuristic beyond it.
pub fn ctd(m: &FocalDistanceMatrix, config: &TraversalConfig) -> TraversalResult {
    let closure = metric_closure(m.matrix());
    if m.n() <= config.exact_threshold.min(HELD_KARP_CAP) {
        solve_exact(&closure.dist, config.exact_threshold).expect("within exact threshold")
    } else {
        solve_heuristic(&closure.dist, &config.heuristic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Table-style 4-node instance: AB=1, AC=4, AD=5, BC=3, BD=4, CD=1.
    fn worked_example() -> SquareMatrix {
        SquareMatrix::from_pairs(
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

    fn random_matrix(rng: &mut impl Rng, n: usize) -> SquareMatrix {
        let mut entries = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                entries.push((i, j, rng.gen_range(1e-6..=1.0)));
            }
        }
        SquareMatrix::from_pairs(n, &entries)
    }

    #[test]
    fn closure_leaves_metric_matrices_alone() {
        let m = worked_example();
        let closed = metric_closure(&m);
        assert_eq!(closed.dist, m);
    }

    #[test]
    fn closure_shortcuts_triangle_violations() {
        let m = SquareMatrix::from_pairs(3, &[(0, 1, 0.1), (0, 2, 0.9), (1, 2, 0.1)]);
        let closed = metric_closure(&m);
        assert!((closed.dist.get(0, 2) - 0.2).abs() < 1e-15);
        assert_eq!(closed.path(0, 2), vec![0, 1, 2]);
    }

    #[test]
    fn closure_is_idempotent_and_dominated() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 7);
            let once = metric_closure(&m);
            let twice = metric_closure(&once.dist);
            // Re-closing can re-associate a path sum, so allow rounding slack.
            for (i, j, d) in once.dist.upper_triangle() {
                assert!((d - twice.dist.get(i, j)).abs() <= 1e-12);
            }
            for (i, j, d) in once.dist.upper_triangle() {
                assert!(d <= m.get(i, j) + 1e-15);
                // Triangle inequality on the closure.
                for k in 0..m.n() {
                    assert!(d <= once.dist.get(i, k) + once.dist.get(k, j) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn exact_solves_the_worked_examples() {
        let r = solve_exact(&worked_example(), 16).unwrap();
        assert!((r.length - 5.0).abs() < 1e-12);
        assert_eq!(r.order, vec![0, 1, 2, 3]);
        assert!(r.exact);
        assert_eq!(r.solver, SolverKind::HeldKarp);

        // Uniform instance: every order costs (n-1) * 3.
        let uniform = SquareMatrix::from_pairs(
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
        let r2 = solve_exact(&uniform, 16).unwrap();
        assert!((r2.length - 9.0).abs() < 1e-12);
    }

    #[test]
    fn exact_two_nodes_is_the_single_edge() {
        let m = SquareMatrix::from_pairs(2, &[(0, 1, 0.37)]);
        let r = solve_exact(&m, 16).unwrap();
        assert_eq!(r.length, 0.37);
        assert_eq!(r.order, vec![0, 1]);
    }

    #[test]
    fn exact_rejects_over_limit() {
        let m = random_matrix(&mut ChaCha8Rng::seed_from_u64(1), 6);
        assert!(matches!(
            solve_exact(&m, 5),
            Err(TraversalError::TooLargeForExact { n: 6, limit: 5 })
        ));
    }

    #[test]
    fn brute_small_cases() {
        let m = SquareMatrix::from_pairs(3, &[(0, 1, 1.0), (0, 2, 4.0), (1, 2, 2.0)]);
        let r = solve_brute(&m).unwrap();
        assert_eq!(r.length, 3.0);
        assert_eq!(r.order, vec![0, 1, 2]);

        let r1 = solve_brute(&SquareMatrix::zeros(1)).unwrap();
        assert_eq!(r1.length, 0.0);
        assert_eq!(r1.order, vec![0]);

        let r0 = solve_brute(&SquareMatrix::zeros(0)).unwrap();
        assert_eq!(r0.length, 0.0);
        assert!(r0.order.is_empty());

        let big = random_matrix(&mut ChaCha8Rng::seed_from_u64(2), 10);
        assert!(matches!(
            solve_brute(&big),
            Err(TraversalError::TooLargeForBrute { n: 10 })
        ));
    }

    #[test]
    fn brute_agrees_with_exact_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..60 {
            let n = rng.gen_range(2..=9);
            let m = random_matrix(&mut rng, n);
            let closed = metric_closure(&m).dist;
            let b = solve_brute(&closed).unwrap();
            let e = solve_exact(&closed, 16).unwrap();
            assert!(
                (b.length - e.length).abs() < 1e-9,
                "round {round}: brute {} vs exact {}",
                b.length,
                e.length
            );
        }
    }

    #[test]
    fn heuristic_matches_exact_on_the_worked_example() {
        let r = solve_heuristic(&worked_example(), &HeuristicConfig::default());
        assert!((r.length - 5.0).abs() < 1e-12);
        assert!(!r.exact);
        assert_eq!(r.solver, SolverKind::Heuristic);
        assert_eq!(r.order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn heuristic_on_uniform_matrix_is_edge_count_times_d() {
        let n = 11;
        let mut entries = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                entries.push((i, j, 0.4));
            }
        }
        let m = SquareMatrix::from_pairs(n, &entries);
        let r = solve_heuristic(&m, &HeuristicConfig::default());
        assert!((r.length - 0.4 * (n as f64 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn heuristic_never_beats_exact_and_stays_close() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..30 {
            let m = random_matrix(&mut rng, 12);
            let closed = metric_closure(&m).dist;
            let e = solve_exact(&closed, 16).unwrap();
            let h = solve_heuristic(&closed, &HeuristicConfig::default());
            assert!(
                h.length >= e.length - 1e-9,
                "round {round}: heuristic {} below exact {}",
                h.length,
                e.length
            );
            assert!(
                h.length <= e.length * 1.05 + 1e-9,
                "round {round}: heuristic {} not within 5% of exact {}",
                h.length,
                e.length
            );
        }
    }

    #[test]
    fn heuristic_subset_of_starts_is_deterministic() {
        let m = random_matrix(&mut ChaCha8Rng::seed_from_u64(3), 20);
        let cfg = HeuristicConfig {
            starts: Some(4),
            seed: 9,
        };
        let a = solve_heuristic(&m, &cfg);
        let b = solve_heuristic(&m, &cfg);
        assert_eq!(a, b);
        let full = solve_heuristic(&m, &HeuristicConfig::default());
        assert!(full.length <= a.length + 1e-9, "more starts never hurt");
    }

    #[test]
    fn result_length_matches_its_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = rng.gen_range(2..=12);
            let m = random_matrix(&mut rng, n);
            let closed = metric_closure(&m).dist;
            let r = if n <= 9 {
                solve_brute(&closed).unwrap()
            } else {
                solve_heuristic(&closed, &HeuristicConfig::default())
            };
            let mut seen = r.order.clone();
            seen.sort_unstable();
            assert_eq!(seen, (0..n).collect::<Vec<_>>(), "order is a permutation");
            assert!((r.length - closed.path_length(&r.order)).abs() < 1e-9);
        }
    }

    #[test]
    fn permuting_labels_preserves_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(3..=8);
            let m = random_matrix(&mut rng, n);
            // Rotate labels by one.
            let mut permuted = SquareMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    permuted.set((i + 1) % n, (j + 1) % n, m.get(i, j));
                }
            }
            let a = solve_brute(&metric_closure(&m).dist).unwrap();
            let b = solve_brute(&metric_closure(&permuted).dist).unwrap();
            assert!((a.length - b.length).abs() < 1e-9);
        }
    }

    #[test]
    fn adding_a_distant_node_never_shortens_the_traversal() {
        // With every new distance at least 0.5 and existing entries at most
        // 1, closure cannot shorten old pairs through the new node, and
        // dropping the new node from any path saves at least as much as the
        // detour it caused.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..30 {
            let n = rng.gen_range(2..=7);
            let m = random_matrix(&mut rng, n);
            let base = solve_exact(&metric_closure(&m).dist, 16).unwrap();

            let mut grown = SquareMatrix::zeros(n + 1);
            for i in 0..n {
                for j in 0..n {
                    grown.set(i, j, m.get(i, j));
                }
                let d = rng.gen_range(0.5..=1.0);
                grown.set(i, n, d);
                grown.set(n, i, d);
            }
            let bigger = solve_exact(&metric_closure(&grown).dist, 16).unwrap();
            assert!(
                bigger.length >= base.length - 1e-9,
                "n {n}: grew {} -> {}",
                base.length,
                bigger.length
            );
        }
    }

    #[test]
    fn walk_expansion_revisits_shortcut_nodes() {
        // 0-1 and 1-2 cheap, 0-2 expensive: the closed edge 0-2 expands to
        // the walk 0-1-2.
        let m = SquareMatrix::from_pairs(3, &[(0, 1, 0.1), (0, 2, 0.9), (1, 2, 0.1)]);
        let closure = metric_closure(&m);
        assert_eq!(closure.expand_walk(&[1, 0, 2]), vec![1, 0, 1, 2]);
    }

    #[test]
    fn ties_resolve_to_the_lexicographically_smaller_direction() {
        let uniform = SquareMatrix::from_pairs(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]);
        for r in [
            solve_brute(&uniform).unwrap(),
            solve_exact(&uniform, 16).unwrap(),
            solve_heuristic(&uniform, &HeuristicConfig::default()),
        ] {
            assert!(r.order[0] < r.order[r.order.len() - 1], "{:?}", r.order);
        }
    }
}
