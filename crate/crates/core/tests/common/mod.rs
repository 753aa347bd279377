//! Synthetic data generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use ideaflow::cascade::{Cascade, Hit};
use ideaflow::corpus::{Document, SparseCounts};
use ideaflow::diffusion::{objective, DiffusionConfig, DiffusionNetwork, Node};
use ideaflow::netstats::{modularity, UndirectedGraph};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dirichlet(rng: &mut ChaCha8Rng, alpha: f64, k: usize) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).unwrap();
    let draws: Vec<f64> = (0..k).map(|_| g.sample(rng)).collect();
    let s: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / s).collect()
}

fn categorical(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

pub struct PlantedCorpus {
    pub docs: Vec<Document>,
    pub n_vocab: usize,
    /// K x V generating topics.
    pub beta: Vec<Vec<f64>>,
}

/// LDA corpus whose topics live on disjoint blocks of `block` tokens each.
pub fn planted_corpus(
    k: usize,
    block: usize,
    n_docs: usize,
    doc_len: usize,
    doc_alpha: f64,
    seed: u64,
) -> PlantedCorpus {
    let mut r = rng(seed);
    let v = k * block;
    let beta: Vec<Vec<f64>> = (0..k)
        .map(|t| {
            let w = dirichlet(&mut r, 1.0, block);
            let mut row = vec![0.0; v];
            row[t * block..(t + 1) * block].copy_from_slice(&w);
            row
        })
        .collect();
    let docs = (0..n_docs)
        .map(|d| {
            let theta = dirichlet(&mut r, doc_alpha, k);
            let ids = (0..doc_len).map(|_| {
                let t = categorical(&mut r, &theta);
                categorical(&mut r, &beta[t]) as u32
            });
            doc(&format!("d{d}"), SparseCounts::from_ids(ids.collect::<Vec<_>>()))
        })
        .collect();
    PlantedCorpus {
        docs,
        n_vocab: v,
        beta,
    }
}

pub fn doc(id: &str, counts: SparseCounts) -> Document {
    Document {
        id: id.to_string(),
        constitution_id: id.to_string(),
        position: 0,
        counts,
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Per-topic cosines under the one-to-one matching of estimated to true topics that
/// maximizes the total cosine.
pub fn aligned_cosines(est: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<f64> {
    let k = truth.len();
    let sim: Vec<Vec<f64>> = truth
        .iter()
        .map(|t| est.iter().map(|e| cosine(e, t)).collect())
        .collect();
    permutations(k)
        .into_iter()
        .map(|p| (0..k).map(|t| sim[t][p[t]]).collect::<Vec<f64>>())
        .max_by(|a, b| a.iter().sum::<f64>().total_cmp(&b.iter().sum::<f64>()))
        .unwrap()
}

/// Exact `ln p(w | beta, alpha)` for one short document by summing over every topic
/// assignment, with the Dirichlet integrated out.
pub fn exact_doc_loglik(beta: &[Vec<f64>], alpha: f64, words: &[u32]) -> f64 {
    let k = beta.len();
    let n = words.len();
    let ln_gamma = |x: f64| statrs::function::gamma::ln_gamma(x);
    let mut total = 0.0;
    for code in 0..k.pow(n as u32) {
        let mut z = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            z.push(c % k);
            c /= k;
        }
        let mut counts = vec![0usize; k];
        let mut lik = 1.0;
        for (&t, &w) in z.iter().zip(words) {
            counts[t] += 1;
            lik *= beta[t][w as usize];
        }
        let mut ln_prior = ln_gamma(k as f64 * alpha) - ln_gamma(k as f64 * alpha + n as f64);
        for &m in &counts {
            ln_prior += ln_gamma(alpha + m as f64) - ln_gamma(alpha);
        }
        total += ln_prior.exp() * lik;
    }
    total.ln()
}

pub fn nodes_with_years(years: &[i32]) -> Vec<Node> {
    years
        .iter()
        .enumerate()
        .map(|(i, &y)| Node {
            id: format!("n{i:02}"),
            year: y,
        })
        .collect()
}

pub fn cascade_of(topic: usize, nodes: &[Node], members: &[usize]) -> Cascade {
    let mut hits: Vec<Hit> = members
        .iter()
        .map(|&i| Hit {
            id: nodes[i].id.clone(),
            year: nodes[i].year,
        })
        .collect();
    hits.sort();
    hits.sort_by_key(|h| h.year);
    Cascade { topic, hits }
}

/// Random small diffusion instance: `n` nodes with random (possibly tied) years and
/// `n_cascades` random member sets of size at least two.
pub fn random_instance(r: &mut ChaCha8Rng, n: usize, n_cascades: usize) -> (Vec<Node>, Vec<Cascade>) {
    let years: Vec<i32> = (0..n).map(|_| 1800 + r.random_range(0..6) * 5).collect();
    let nodes = nodes_with_years(&years);
    let ids: Vec<usize> = (0..n).collect();
    let cascades = (0..n_cascades)
        .map(|t| {
            let size = r.random_range(2..=n);
            let members: Vec<usize> = ids.choose_multiple(r, size).copied().collect();
            cascade_of(t, &nodes, &members)
        })
        .collect();
    (nodes, cascades)
}

/// Every time-respecting ordered pair.
pub fn admissible_edges(nodes: &[Node]) -> Vec<(usize, usize)> {
    let mut g = DiffusionNetwork::<f64>::new(nodes.to_vec()).unwrap();
    let n = g.n_nodes();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if g.add_edge(i, j, 0.0).is_ok() {
                out.push((i, j));
            }
        }
    }
    out
}

/// Largest objective over all networks with at most `k_max` edges.
pub fn exhaustive_optimum(nodes: &[Node], cascades: &[Cascade], cfg: &DiffusionConfig<f64>, k_max: usize) -> f64 {
    let edges = admissible_edges(nodes);
    assert!(edges.len() <= 20, "too many candidate edges for enumeration");
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << edges.len()) {
        if mask.count_ones() as usize > k_max {
            continue;
        }
        let mut g = DiffusionNetwork::<f64>::new(nodes.to_vec()).unwrap();
        for (b, &(s, d)) in edges.iter().enumerate() {
            if mask >> b & 1 == 1 {
                g.add_edge(s, d, 0.0).unwrap();
            }
        }
        best = best.max(objective(cascades, &g, cfg).unwrap());
    }
    best
}

/// Directed acyclic network on `n` nodes one year apart, each node after the first few
/// drawing one to three parents among the `window` nodes before it.
pub fn planted_network(r: &mut ChaCha8Rng, n: usize, window: usize) -> (Vec<Node>, BTreeSet<(usize, usize)>) {
    let years: Vec<i32> = (0..n as i32).map(|i| 1800 + i).collect();
    let nodes = nodes_with_years(&years);
    let mut edges = BTreeSet::new();
    for j in 1..n {
        let lo = j.saturating_sub(window);
        let pool: Vec<usize> = (lo..j).collect();
        let m = r.random_range(1..=3).min(pool.len());
        for &i in pool.choose_multiple(r, m) {
            edges.insert((i, j));
        }
    }
    (nodes, edges)
}

/// Independent-cascade spread over a planted network: an infected node infects each child
/// with probability `exp(-dt / alpha_hat)`, where `dt` is the years between them.
pub fn simulate_cascades(
    r: &mut ChaCha8Rng,
    nodes: &[Node],
    edges: &BTreeSet<(usize, usize)>,
    n_cascades: usize,
    alpha_hat: f64,
) -> Vec<Cascade> {
    let n = nodes.len();
    let mut children = vec![Vec::new(); n];
    for &(i, j) in edges {
        children[i].push(j);
    }
    (0..n_cascades)
        .map(|t| {
            let root = r.random_range(0..n);
            let mut infected = BTreeSet::from([root]);
            let mut frontier = vec![root];
            while let Some(i) = frontier.pop() {
                for &j in &children[i] {
                    let dt = (nodes[j].year - nodes[i].year) as f64;
                    if !infected.contains(&j) && r.random::<f64>() < (-dt / alpha_hat).exp() {
                        infected.insert(j);
                        frontier.push(j);
                    }
                }
            }
            let members: Vec<usize> = infected.into_iter().collect();
            cascade_of(t, nodes, &members)
        })
        .collect()
}

/// Two cliques of sizes `a` and `b` joined by the single edge `(a - 1, a)`.
pub fn two_cliques(a: usize, b: usize) -> UndirectedGraph {
    let mut edges = Vec::new();
    for i in 0..a {
        for j in i + 1..a {
            edges.push((i, j));
        }
    }
    for i in a..a + b {
        for j in i + 1..a + b {
            edges.push((i, j));
        }
    }
    edges.push((a - 1, a));
    UndirectedGraph::new(a + b, edges)
}

/// Best modularity over every set partition of the nodes, with one maximizing labelling.
pub fn exhaustive_modularity(g: &UndirectedGraph) -> (f64, Vec<usize>) {
    let n = g.n_nodes();
    let mut best = (f64::NEG_INFINITY, vec![0; n]);
    let mut labels = vec![0usize; n];
    fn rec(g: &UndirectedGraph, i: usize, max_label: usize, labels: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
        if i == labels.len() {
            let q = modularity(g, labels);
            if q > best.0 + 1e-12 {
                *best = (q, labels.clone());
            }
            return;
        }
        for l in 0..=max_label + 1 {
            labels[i] = l;
            rec(g, i + 1, max_label.max(l), labels, best);
        }
    }
    if n > 0 {
        labels[0] = 0;
        rec(g, 1, 0, &mut labels, &mut best);
    }
    best
}

/// Whether two labellings describe the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len()
        && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}
