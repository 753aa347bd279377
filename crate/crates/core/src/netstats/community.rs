//! Community detection on the undirected view of a diffusion network.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::diffusion::DiffusionNetwork;
use crate::real::Real;

/// Simple undirected graph. Edges are stored once as `(min, max)` pairs in sorted order; an
/// edge's id is its position in that list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    /// Per node: (neighbour, edge id).
    adj: Vec<Vec<(usize, usize)>>,
}

impl UndirectedGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut es: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        es.sort_unstable();
        es.dedup();
        assert!(es.iter().all(|&(_, b)| b < n), "edge endpoint out of range");
        let mut adj = vec![Vec::new(); n];
        for (id, &(a, b)) in es.iter().enumerate() {
            adj[a].push((b, id));
            adj[b].push((a, id));
        }
        Self { n, edges: es, adj }
    }

    pub fn from_network<T: Real>(g: &DiffusionNetwork<T>) -> Self {
        Self::new(g.n_nodes(), g.edges().iter().map(|e| (e.src, e.dst)))
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }
}

/// Component labels numbered in order of each component's smallest node, using only the
/// edges flagged active.
pub fn connected_components(g: &UndirectedGraph, active: &[bool]) -> Vec<usize> {
    let mut label = vec![usize::MAX; g.n];
    let mut next = 0;
    for s in 0..g.n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = next;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &(w, e) in &g.adj[v] {
                if active[e] && label[w] == usize::MAX {
                    label[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    label
}

fn source_dependencies(g: &UndirectedGraph, active: &[bool], s: usize, acc: &mut [f64]) {
    let n = g.n;
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    sigma[s] = 1.0;
    dist[s] = 0;
    queue.push_back(s);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, e) in &g.adj[v] {
            if !active[e] {
                continue;
            }
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push((v, e));
            }
        }
    }
    let mut delta = vec![0.0f64; n];
    for &w in order.iter().rev() {
        for &(v, e) in &preds[w] {
            let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
            acc[e] += c;
            delta[v] += c;
        }
    }
}

/// Brandes edge betweenness over the active edges (inactive edges score 0). Each unordered
/// pair of endpoints is counted once.
pub fn edge_betweenness(g: &UndirectedGraph, active: &[bool]) -> Vec<f64> {
    const CHUNK: usize = 32;
    let sources: Vec<usize> = (0..g.n).collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; g.edges.len()];
            for &s in chunk {
                source_dependencies(g, active, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; g.edges.len()];
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    total.iter_mut().for_each(|x| *x *= 0.5);
    total
}

/// Girvan-Newman divisive clustering: removes the edge of highest betweenness (lowest edge
/// id among near-ties) until the graph has at least `target` components or no edges remain.
pub fn girvan_newman(g: &UndirectedGraph, target: usize) -> Vec<usize> {
    let mut active = vec![true; g.edges.len()];
    let mut labels = connected_components(g, &active);
    let count = |l: &[usize]| l.iter().max().map_or(0, |m| m + 1);
    while count(&labels) < target && active.iter().any(|&a| a) {
        let bet = edge_betweenness(g, &active);
        let top = bet
            .iter()
            .zip(&active)
            .filter(|&(_, &a)| a)
            .map(|(&b, _)| b)
            .fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-12 * top.abs().max(1.0);
        let remove = (0..bet.len())
            .find(|&e| active[e] && bet[e] >= top - tol)
            .expect("an active edge exists");
        active[remove] = false;
        labels = connected_components(g, &active);
    }
    labels
}

/// Newman modularity `Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)`.
pub fn modularity(g: &UndirectedGraph, labels: &[usize]) -> f64 {
    let m = g.edges.len() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let inside = g
        .edges
        .iter()
        .filter(|&&(a, b)| labels[a] == labels[b])
        .count() as f64;
    let n_comm = labels.iter().max().map_or(0, |x| x + 1);
    let mut deg_sum = vec![0.0; n_comm];
    for v in 0..g.n {
        deg_sum[labels[v]] += g.degree(v) as f64;
    }
    inside / m - deg_sum.iter().map(|d| (d / (2.0 * m)).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPartition {
    pub labels: Vec<usize>,
    /// Modularity recomputed from the final labels.
    pub modularity: f64,
    /// Sum of the modularity gains of the accepted splits.
    pub incremental_modularity: f64,
}

const SPLIT_TOL: f64 = 1e-10;

/// Recursive leading-eigenvector bisection of the modularity matrix `B = A - k k^T / 2m`.
/// Each group is split by the signs of the leading eigenvector of its generalized modularity
/// matrix, refined by single-node moves, and kept whole when no split raises Q.
pub fn spectral_modularity(g: &UndirectedGraph) -> SpectralPartition {
    let n = g.n;
    let m = g.edges.len() as f64;
    if n == 0 || m == 0.0 {
        return SpectralPartition {
            labels: vec![0; n],
            modularity: 0.0,
            incremental_modularity: 0.0,
        };
    }
    let deg: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
    let mut adj = DMatrix::<f64>::zeros(n, n);
    for &(a, b) in &g.edges {
        adj[(a, b)] = 1.0;
        adj[(b, a)] = 1.0;
    }
    let b_full = DMatrix::from_fn(n, n, |i, j| adj[(i, j)] - deg[i] * deg[j] / (2.0 * m));

    let mut done: Vec<Vec<usize>> = Vec::new();
    let mut pending: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut q_total = 0.0;
    while let Some(group) = pending.pop() {
        match split_group(&b_full, &group, m) {
            Some((left, right, dq)) => {
                q_total += dq;
                pending.push(right);
                pending.push(left);
            }
            None => done.push(group),
        }
    }
    done.sort_by_key(|grp| grp.iter().copied().min());
    let mut labels = vec![0; n];
    for (c, grp) in done.iter().enumerate() {
        for &v in grp {
            labels[v] = c;
        }
    }
    SpectralPartition {
        modularity: modularity(g, &labels),
        labels,
        incremental_modularity: q_total,
    }
}

fn split_group(
    b_full: &DMatrix<f64>,
    group: &[usize],
    m: f64,
) -> Option<(Vec<usize>, Vec<usize>, f64)> {
    let size = group.len();
    if size < 2 {
        return None;
    }
    let mut bg = DMatrix::from_fn(size, size, |i, j| b_full[(group[i], group[j])]);
    for i in 0..size {
        let row_sum: f64 = (0..size).map(|j| b_full[(group[i], group[j])]).sum();
        bg[(i, i)] -= row_sum;
    }
    let eig = SymmetricEigen::new(bg.clone());
    let (lead, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
    if lambda <= SPLIT_TOL {
        return None;
    }
    let u = eig.eigenvectors.column(lead);
    let mut s: Vec<f64> = u
        .iter()
        .map(|&x| if x >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    refine(&bg, &mut s);
    let dq = quad(&bg, &s) / (4.0 * m);
    if dq <= SPLIT_TOL || s.iter().all(|&x| x == s[0]) {
        return None;
    }
    let left = group
        .iter()
        .zip(&s)
        .filter(|&(_, &x)| x > 0.0)
        .map(|(&v, _)| v)
        .collect();
    let right = group
        .iter()
        .zip(&s)
        .filter(|&(_, &x)| x < 0.0)
        .map(|(&v, _)| v)
        .collect();
    Some((left, right, dq))
}

fn quad(b: &DMatrix<f64>, s: &[f64]) -> f64 {
    let n = s.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += s[i] * b[(i, j)] * s[j];
        }
    }
    total
}

/// Kernighan-Lin style refinement: repeatedly moves each node once, greedily taking the move
/// with the largest change of `s^T B s`, and keeps the best intermediate state.
fn refine(b: &DMatrix<f64>, s: &mut [f64]) {
    let n = s.len();
    let mut current = quad(b, s);
    loop {
        let mut work = s.to_vec();
        let mut moved = vec![false; n];
        let mut value = current;
        let mut best_value = current;
        let mut best_state = None;
        for _ in 0..n {
            // Flipping s_i changes s^T B s by -4 s_i sum_{j != i} B_ij s_j.
            let mut pick: Option<(usize, f64)> = None;
            for i in (0..n).filter(|&i| !moved[i]) {
                let field: f64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| b[(i, j)] * work[j])
                    .sum();
                let delta = -4.0 * work[i] * field;
                if pick.is_none_or(|(_, d)| delta > d) {
                    pick = Some((i, delta));
                }
            }
            let (i, delta) = pick.expect("unmoved node remains");
            work[i] = -work[i];
            moved[i] = true;
            value += delta;
            if value > best_value + SPLIT_TOL {
                best_value = value;
                best_state = Some(work.clone());
            }
        }
        match best_state {
            Some(state) => {
                s.copy_from_slice(&state);
                current = quad(b, s);
            }
            None => return,
        }
    }
}
