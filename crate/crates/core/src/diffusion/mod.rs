//! Maximum-likelihood diffusion networks inferred from cascades.
//!
//! A cascade's likelihood under a network G is taken from its best propagation tree: every
//! hit that has a strictly earlier hit in the same cascade picks the earlier hit maximizing
//! `w(i, j)`, where `w(i, j) = exp(-(t_j - t_i) / alpha_hat)` if `(i, j)` is an edge of G and
//! `epsilon` times that otherwise. Because each hit chooses its parent independently, the best
//! tree is found by a per-hit maximum. Roots contribute nothing. The network is grown greedily
//! by marginal log-likelihood gain, which is monotone submodular in the edge set.

mod greedy;
mod io;
mod sweep;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::cascade::Cascade;
use crate::error::{Error, Result};
use crate::real::Real;

pub use greedy::{
    greedy_infer, greedy_infer_naive, greedy_infer_traced, greedy_infer_with_nodes, GreedyOutcome,
    StopReason,
};
pub(crate) use io::dot_escape;
pub use io::{read_network, write_network_csv, write_network_dot, NetworkRow};
pub use sweep::{pearson, tau_sweep, write_sweep, SweepRow, TauSweep};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionConfig<T> {
    /// Diffusion time scale in years.
    pub alpha_hat: T,
    /// Multiplier on the transmission probability of parent candidates outside the network.
    pub epsilon: T,
    /// Edge budget; `None` means ten edges per node.
    pub k_max: Option<usize>,
    /// Stop once the objective reaches this fraction of the running upper bound.
    pub stop_frac: T,
}

impl<T: Real> Default for DiffusionConfig<T> {
    fn default() -> Self {
        Self {
            alpha_hat: T::one(),
            epsilon: T::lit(1e-8),
            k_max: None,
            stop_frac: T::lit(0.85),
        }
    }
}

impl<T: Real> DiffusionConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_hat > T::zero() && self.alpha_hat.is_finite()) {
            return Err(Error::config("diffusion.alpha_hat", "must be positive"));
        }
        if !(self.epsilon > T::zero() && self.epsilon < T::one()) {
            return Err(Error::config("diffusion.epsilon", "must lie in (0, 1)"));
        }
        if !(self.stop_frac > T::zero() && self.stop_frac <= T::one()) {
            return Err(Error::config("diffusion.stop_frac", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn edge_budget(&self, n_nodes: usize) -> usize {
        self.k_max.unwrap_or(n_nodes * 10)
    }

    /// Log of the parent weight for a gap of `dt` years.
    pub(crate) fn log_weight(&self, dt: T, in_network: bool) -> T {
        let base = -dt / self.alpha_hat;
        if in_network {
            base
        } else {
            base + self.epsilon.ln()
        }
    }
}

/// Probability that a cascade passes from a node at time `t_i` to one at `t_j > t_i`.
pub fn transmission_prob<T: Real>(t_i: T, t_j: T, alpha_hat: T) -> Result<T> {
    if t_j.partial_cmp(&t_i) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::TimeOrderViolation {
            src: format!("t={}", t_i),
            dst: format!("t={}", t_j),
            src_time: t_i.as_f64(),
            dst_time: t_j.as_f64(),
        });
    }
    Ok((-(t_j - t_i) / alpha_hat).exp())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub year: i32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub src: usize,
    pub dst: usize,
    /// Marginal log-likelihood gain when the edge was inserted.
    pub gain: T,
}

/// Time-respecting directed graph over constitutions. Nodes are sorted by (year, id) and
/// edges are kept in insertion order.
#[derive(Debug, Clone)]
pub struct DiffusionNetwork<T> {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    edges: Vec<Edge<T>>,
    edge_set: HashSet<(usize, usize)>,
}

impl<T: Real> DiffusionNetwork<T> {
    pub fn new(mut nodes: Vec<Node>) -> Result<Self> {
        nodes.sort_by(|a, b| (a.year, &a.id).cmp(&(b.year, &b.id)));
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate node `{}`", n.id)));
            }
        }
        Ok(Self {
            nodes,
            index,
            edges: Vec::new(),
            edge_set: HashSet::new(),
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains_edge(&self, src: usize, dst: usize) -> bool {
        self.edge_set.contains(&(src, dst))
    }

    fn check_time_order(&self, src: usize, dst: usize) -> Result<()> {
        let (a, b) = (&self.nodes[src], &self.nodes[dst]);
        if a.year >= b.year {
            return Err(Error::TimeOrderViolation {
                src: a.id.clone(),
                dst: b.id.clone(),
                src_time: a.year as f64,
                dst_time: b.year as f64,
            });
        }
        Ok(())
    }

    /// Inserts `src -> dst`; the source must be strictly earlier and the edge new.
    pub fn add_edge(&mut self, src: usize, dst: usize, gain: T) -> Result<()> {
        if src >= self.nodes.len() || dst >= self.nodes.len() {
            return Err(Error::InvalidInput(format!(
                "edge {src} -> {dst} out of range"
            )));
        }
        self.check_time_order(src, dst)?;
        if !self.edge_set.insert((src, dst)) {
            return Err(Error::InvalidInput(format!(
                "duplicate edge {} -> {}",
                self.nodes[src].id, self.nodes[dst].id
            )));
        }
        self.edges.push(Edge { src, dst, gain });
        Ok(())
    }

    pub fn add_edge_by_id(&mut self, src: &str, dst: &str, gain: T) -> Result<()> {
        let s = self.require(src)?;
        let d = self.require(dst)?;
        self.add_edge(s, d, gain)
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.node_index(id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown node `{id}`")))
    }

    pub(crate) fn cascade_nodes(&self, cascade: &Cascade) -> Result<Vec<usize>> {
        let mut idx = cascade
            .hits
            .iter()
            .map(|h| self.require(&h.id))
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    /// Parents (sources of incoming edges) of every node.
    pub fn parents(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            p[e.dst].push(e.src);
        }
        p.iter_mut().for_each(|v| v.sort_unstable());
        p
    }

    /// Children (targets of outgoing edges) of every node.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut c = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            c[e.src].push(e.dst);
        }
        c.iter_mut().for_each(|v| v.sort_unstable());
        c
    }
}

fn year_gap<T: Real>(nodes: &[Node], src: usize, dst: usize) -> T {
    T::from_i32(nodes[dst].year - nodes[src].year).expect("year gap fits the scalar type")
}

/// Best-parent log-weight of `members[pos]` within a cascade whose members are node indices
/// in (year, id) order. `None` for hits with no strictly earlier hit.
fn best_parent<T: Real>(
    g: &DiffusionNetwork<T>,
    members: &[usize],
    pos: usize,
    cfg: &DiffusionConfig<T>,
) -> Option<T> {
    let j = members[pos];
    let tj = g.nodes[j].year;
    members[..pos]
        .iter()
        .filter(|&&i| g.nodes[i].year < tj)
        .map(|&i| cfg.log_weight(year_gap(&g.nodes, i, j), g.contains_edge(i, j)))
        .reduce(T::max)
}

/// Log-likelihood of `cascade` under its best propagation tree in `g`.
pub fn best_tree_loglik<T: Real>(
    cascade: &Cascade,
    g: &DiffusionNetwork<T>,
    cfg: &DiffusionConfig<T>,
) -> Result<T> {
    let members = g.cascade_nodes(cascade)?;
    Ok((0..members.len())
        .filter_map(|pos| best_parent(g, &members, pos, cfg))
        .fold(T::zero(), |acc, x| acc + x))
}

/// Sum of best-tree log-likelihoods over all cascades.
pub fn objective<T: Real>(
    cascades: &[Cascade],
    g: &DiffusionNetwork<T>,
    cfg: &DiffusionConfig<T>,
) -> Result<T> {
    cascades
        .iter()
        .try_fold(T::zero(), |acc, c| Ok(acc + best_tree_loglik(c, g, cfg)?))
}

/// Increase of the summed best-tree log-likelihood when `src -> dst` is added to `g`.
pub fn marginal_gain<T: Real>(
    src: usize,
    dst: usize,
    g: &DiffusionNetwork<T>,
    cascades: &[Cascade],
    cfg: &DiffusionConfig<T>,
) -> Result<T> {
    g.check_time_order(src, dst)?;
    if g.contains_edge(src, dst) {
        return Err(Error::InvalidInput("edge already in the network".into()));
    }
    let direct = cfg.log_weight(year_gap(&g.nodes, src, dst), true);
    let mut gain = T::zero();
    for c in cascades {
        let members = g.cascade_nodes(c)?;
        let (Ok(_), Ok(pos)) = (members.binary_search(&src), members.binary_search(&dst)) else {
            continue;
        };
        let current = best_parent(g, &members, pos, cfg).expect("src precedes dst in the cascade");
        if direct > current {
            gain += direct - current;
        }
    }
    Ok(gain)
}
