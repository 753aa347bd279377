//! Lazy greedy edge selection.
//!
//! Every (cascade, hit) pair with at least one strictly earlier hit is a slot holding that
//! hit's current best-parent log-weight. A candidate edge `i -> j` touches the slots of `j` in
//! cascades that also contain `i`; its gain is the total amount by which it would raise those
//! slots. Gains only shrink as edges are added, so stale gains kept in the priority queue are
//! upper bounds and a popped entry only needs re-evaluation when it is stale.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::{year_gap, DiffusionConfig, DiffusionNetwork, Node};
use crate::cascade::Cascade;
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The edge budget was reached.
    EdgeBudget,
    /// The objective reached `stop_frac` of the running upper bound.
    UpperBound,
    /// No remaining candidate has positive gain.
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct GreedyOutcome<T> {
    pub network: DiffusionNetwork<T>,
    /// Summed best-tree log-likelihood of the empty network.
    pub base_objective: T,
    /// Objective gained over the empty network after each insertion, starting at zero.
    pub improvements: Vec<T>,
    /// Upper bound on the attainable improvement evaluated before each insertion attempt.
    pub upper_bounds: Vec<T>,
    pub stop: StopReason,
}

impl<T: Real> GreedyOutcome<T> {
    pub fn objective(&self) -> T {
        self.base_objective + *self.improvements.last().expect("starts with zero")
    }
}

struct Candidate<T> {
    src: usize,
    dst: usize,
    /// Log-weight of `src` as a parent of `dst` once the edge is in the network.
    direct: T,
    slots: Vec<usize>,
}

struct GainIndex<T> {
    slots: Vec<T>,
    candidates: Vec<Candidate<T>>,
}

impl<T: Real> GainIndex<T> {
    fn build(nodes: &[Node], cascades: &[Vec<usize>], cfg: &DiffusionConfig<T>) -> Self {
        let mut slots = Vec::new();
        let mut pairs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for members in cascades {
            for (pos, &j) in members.iter().enumerate() {
                let earlier: Vec<usize> = members[..pos]
                    .iter()
                    .copied()
                    .filter(|&i| nodes[i].year < nodes[j].year)
                    .collect();
                if earlier.is_empty() {
                    continue;
                }
                let slot = slots.len();
                let best = earlier
                    .iter()
                    .map(|&i| cfg.log_weight(year_gap(nodes, i, j), false))
                    .reduce(T::max)
                    .expect("non-empty");
                slots.push(best);
                for i in earlier {
                    pairs.entry((i, j)).or_default().push(slot);
                }
            }
        }
        let candidates = pairs
            .into_iter()
            .map(|((src, dst), slots)| Candidate {
                src,
                dst,
                direct: cfg.log_weight(year_gap(nodes, src, dst), true),
                slots,
            })
            .collect();
        Self { slots, candidates }
    }

    fn total(&self) -> T {
        self.slots.iter().fold(T::zero(), |acc, &x| acc + x)
    }

    fn gain(&self, cand: usize) -> T {
        let c = &self.candidates[cand];
        c.slots.iter().fold(T::zero(), |acc, &s| {
            let cur = self.slots[s];
            if c.direct > cur {
                acc + (c.direct - cur)
            } else {
                acc
            }
        })
    }

    fn insert(&mut self, cand: usize) {
        let c = &self.candidates[cand];
        for &s in &c.slots {
            if c.direct > self.slots[s] {
                self.slots[s] = c.direct;
            }
        }
    }
}

/// Priority-queue entry ordered by gain (largest first), then by candidate index, which
/// follows (source year, source id, target year, target id).
struct Entry<T> {
    gain: T,
    cand: usize,
    stamp: usize,
}

impl<T: Real> PartialEq for Entry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Entry<T> {}

impl<T: Real> PartialOrd for Entry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Entry<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .gain
            .partial_cmp(&self.gain)
            .unwrap_or(Ordering::Equal)
            .then(self.cand.cmp(&other.cand))
    }
}

fn nodes_from_cascades(cascades: &[Cascade]) -> Vec<Node> {
    let mut seen = BTreeMap::new();
    for h in cascades.iter().flat_map(|c| &c.hits) {
        seen.entry(h.id.clone()).or_insert(h.year);
    }
    seen.into_iter()
        .map(|(id, year)| Node { id, year })
        .collect()
}

fn prepare<T: Real>(
    nodes: Vec<Node>,
    cascades: &[Cascade],
    cfg: &DiffusionConfig<T>,
) -> Result<(DiffusionNetwork<T>, GainIndex<T>)> {
    cfg.validate()?;
    let network = DiffusionNetwork::new(nodes)?;
    let members = cascades
        .iter()
        .map(|c| network.cascade_nodes(c))
        .collect::<Result<Vec<_>>>()?;
    for (c, m) in cascades.iter().zip(&members) {
        if m.len() != c.hits.len() {
            return Err(Error::InvalidInput(format!(
                "cascade {} lists a constitution twice",
                c.topic
            )));
        }
    }
    let index = GainIndex::build(network.nodes(), &members, cfg);
    Ok((network, index))
}

/// Greedy network over the constitutions appearing in `cascades`.
pub fn greedy_infer<T: Real>(
    cascades: &[Cascade],
    cfg: &DiffusionConfig<T>,
) -> Result<DiffusionNetwork<T>> {
    Ok(greedy_infer_traced(nodes_from_cascades(cascades), cascades, cfg)?.network)
}

/// Greedy network over an explicit node set, which must include every cascade hit.
pub fn greedy_infer_with_nodes<T: Real>(
    nodes: Vec<Node>,
    cascades: &[Cascade],
    cfg: &DiffusionConfig<T>,
) -> Result<DiffusionNetwork<T>> {
    Ok(greedy_infer_traced(nodes, cascades, cfg)?.network)
}

/// Lazy greedy maximization of the summed best-tree log-likelihood.
///
/// Before each insertion the upper bound `UB = F + sum of the (budget - edges) largest cached
/// gains` is evaluated, where `F` is the improvement over the empty network; the search stops
/// once `F >= stop_frac * UB`, when the budget is spent, or when no edge has positive gain.
pub fn greedy_infer_traced<T: Real>(
    nodes: Vec<Node>,
    cascades: &[Cascade],
    cfg: &DiffusionConfig<T>,
) -> Result<GreedyOutcome<T>> {
    let (mut network, mut index) = prepare(nodes, cascades, cfg)?;
    let budget = cfg.edge_budget(network.n_nodes());
    let base_objective = index.total();

    let initial: Vec<T> = (0..index.candidates.len())
        .into_par_iter()
        .map(|c| index.gain(c))
        .collect();
    let mut queue: BTreeSet<Entry<T>> = initial
        .into_iter()
        .enumerate()
        .filter(|&(_, g)| g > T::zero())
        .map(|(cand, gain)| Entry {
            gain,
            cand,
            stamp: 0,
        })
        .collect();

    let mut improvement = T::zero();
    let mut improvements = vec![improvement];
    let mut upper_bounds = Vec::new();
    let mut last_gain = T::infinity();
    let stop = loop {
        let step = network.n_edges();
        if step >= budget {
            break StopReason::EdgeBudget;
        }
        let ub = improvement
            + queue
                .iter()
                .take(budget - step)
                .fold(T::zero(), |acc, e| acc + e.gain);
        upper_bounds.push(ub);
        if improvement >= cfg.stop_frac * ub {
            break if queue.is_empty() {
                StopReason::Exhausted
            } else {
                StopReason::UpperBound
            };
        }

        let mut accepted = None;
        while let Some(top) = queue.pop_first() {
            if top.stamp == step {
                accepted = Some(top);
                break;
            }
            let fresh = index.gain(top.cand);
            assert!(
                fresh <= top.gain,
                "submodularity violated: gain rose from {} to {}",
                top.gain,
                fresh
            );
            if fresh > T::zero() {
                queue.insert(Entry {
                    gain: fresh,
                    cand: top.cand,
                    stamp: step,
                });
            }
        }
        let Some(best) = accepted else {
            break StopReason::Exhausted;
        };
        assert!(
            best.gain <= last_gain,
            "accepted gains must not increase: {} after {}",
            best.gain,
            last_gain
        );
        last_gain = best.gain;
        let c = &index.candidates[best.cand];
        network.add_edge(c.src, c.dst, best.gain)?;
        index.insert(best.cand);
        improvement += best.gain;
        improvements.push(improvement);
    };

    Ok(GreedyOutcome {
        network,
        base_objective,
        improvements,
        upper_bounds,
        stop,
    })
}

/// Reference greedy that re-evaluates every candidate at every step. It honours the edge
/// budget but not `stop_frac`, and stops when no candidate has positive gain.
pub fn greedy_infer_naive<T: Real>(
    nodes: Vec<Node>,
    cascades: &[Cascade],
    cfg: &DiffusionConfig<T>,
) -> Result<GreedyOutcome<T>> {
    let (mut network, mut index) = prepare(nodes, cascades, cfg)?;
    let budget = cfg.edge_budget(network.n_nodes());
    let base_objective = index.total();
    let mut used = vec![false; index.candidates.len()];
    let mut improvement = T::zero();
    let mut improvements = vec![improvement];
    let stop = loop {
        if network.n_edges() >= budget {
            break StopReason::EdgeBudget;
        }
        let mut best: Option<(usize, T)> = None;
        for c in (0..index.candidates.len()).filter(|&c| !used[c]) {
            let g = index.gain(c);
            if g > T::zero() && best.is_none_or(|(_, bg)| g > bg) {
                best = Some((c, g));
            }
        }
        let Some((c, g)) = best else {
            break StopReason::Exhausted;
        };
        used[c] = true;
        let cand = &index.candidates[c];
        network.add_edge(cand.src, cand.dst, g)?;
        index.insert(c);
        improvement += g;
        improvements.push(improvement);
    };
    Ok(GreedyOutcome {
        network,
        base_objective,
        improvements,
        upper_bounds: Vec::new(),
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::Hit;
    use crate::diffusion::objective;

    fn cascade(topic: usize, hits: &[(&str, i32)]) -> Cascade {
        Cascade {
            topic,
            hits: hits
                .iter()
                .map(|&(id, year)| Hit {
                    id: id.into(),
                    year,
                })
                .collect(),
        }
    }

    fn exact_cfg(k_max: usize) -> DiffusionConfig<f64> {
        DiffusionConfig {
            alpha_hat: 10.0,
            epsilon: 1e-3,
            k_max: Some(k_max),
            stop_frac: 1.0,
        }
    }

    #[test]
    fn no_cascades_gives_empty_network() {
        let g = greedy_infer::<f64>(&[], &DiffusionConfig::default()).unwrap();
        assert_eq!(g.n_nodes(), 0);
        assert_eq!(g.n_edges(), 0);
    }

    #[test]
    fn chain_cascade_recovers_chain() {
        let cs = vec![
            cascade(0, &[("A", 1800), ("B", 1810), ("C", 1820)]),
            cascade(1, &[("A", 1800), ("B", 1810)]),
        ];
        let out = greedy_infer_traced(nodes_from_cascades(&cs), &cs, &exact_cfg(5)).unwrap();
        let edges: Vec<(usize, usize)> =
            out.network.edges().iter().map(|e| (e.src, e.dst)).collect();
        assert_eq!(edges, [(0, 1), (1, 2)]);
        assert_eq!(out.stop, StopReason::Exhausted);
        let obj = objective(&cs, &out.network, &exact_cfg(5)).unwrap();
        assert!((obj - out.objective()).abs() < 1e-9);
    }

    #[test]
    fn same_year_hits_are_not_linked() {
        let cs = vec![cascade(0, &[("A", 1800), ("B", 1800)])];
        let g = greedy_infer(&cs, &exact_cfg(3)).unwrap();
        assert_eq!(g.n_edges(), 0);
    }

    #[test]
    fn budget_and_upper_bound_stops() {
        let cs = vec![cascade(
            0,
            &[("A", 1800), ("B", 1810), ("C", 1820), ("D", 1830)],
        )];
        let out = greedy_infer_traced(nodes_from_cascades(&cs), &cs, &exact_cfg(1)).unwrap();
        assert_eq!(out.network.n_edges(), 1);
        assert_eq!(out.stop, StopReason::EdgeBudget);

        let cfg = DiffusionConfig {
            stop_frac: 0.5,
            ..exact_cfg(3)
        };
        let out = greedy_infer_traced(nodes_from_cascades(&cs), &cs, &cfg).unwrap();
        // Three equal gains: after two insertions F = 2g >= 0.5 * 3g.
        assert_eq!(out.network.n_edges(), 2);
        assert_eq!(out.stop, StopReason::UpperBound);
    }

    #[test]
    fn duplicate_hits_rejected() {
        let cs = vec![cascade(0, &[("A", 1800), ("A", 1800)])];
        assert!(greedy_infer(&cs, &exact_cfg(3)).is_err());
    }
}
