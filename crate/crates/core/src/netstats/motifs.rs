use serde::Serialize;

use crate::diffusion::DiffusionNetwork;
use crate::real::Real;

/// In- and out-degree of every node, in the network's (year, id) node order.
pub fn degree_sequences<T: Real>(g: &DiffusionNetwork<T>) -> (Vec<usize>, Vec<usize>) {
    let mut din = vec![0; g.n_nodes()];
    let mut dout = vec![0; g.n_nodes()];
    for e in g.edges() {
        din[e.dst] += 1;
        dout[e.src] += 1;
    }
    (din, dout)
}

pub fn median(xs: &[usize]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Taxonomy {
    /// In-degree and out-degree at or below their medians.
    Minor,
    /// Both above their medians.
    Major,
    /// Many parents, few children.
    Idiosyncratic,
    /// Few parents, many children.
    Innovative,
}

impl Taxonomy {
    /// "High" means strictly above the median.
    pub fn classify(indegree: usize, outdegree: usize, median_in: f64, median_out: f64) -> Self {
        match (indegree as f64 > median_in, outdegree as f64 > median_out) {
            (false, false) => Taxonomy::Minor,
            (true, true) => Taxonomy::Major,
            (true, false) => Taxonomy::Idiosyncratic,
            (false, true) => Taxonomy::Innovative,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Taxonomy::Minor => "minor",
            Taxonomy::Major => "major",
            Taxonomy::Idiosyncratic => "idiosyncratic",
            Taxonomy::Innovative => "innovative",
        }
    }
}

/// A constitution's transmission motif: who it borrowed from and who borrowed from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Motif {
    pub constitution_id: String,
    pub year: i32,
    pub parents: Vec<String>,
    pub children: Vec<String>,
    pub taxonomy: Taxonomy,
}

pub fn motifs<T: Real>(g: &DiffusionNetwork<T>) -> Vec<Motif> {
    let (din, dout) = degree_sequences(g);
    let (mi, mo) = (median(&din), median(&dout));
    let parents = g.parents();
    let children = g.children();
    let ids = |v: &[usize]| {
        v.iter()
            .map(|&i| g.nodes()[i].id.clone())
            .collect::<Vec<_>>()
    };
    g.nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| Motif {
            constitution_id: n.id.clone(),
            year: n.year,
            parents: ids(&parents[i]),
            children: ids(&children[i]),
            taxonomy: Taxonomy::classify(din[i], dout[i], mi, mo),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lifespan {
    pub id: String,
    pub year: i32,
    /// Position in order of appearance.
    pub order: usize,
    pub n_children: usize,
    /// Years from the node's own year to its latest child; 0 without children.
    pub span: i32,
}

pub fn lifespans<T: Real>(g: &DiffusionNetwork<T>) -> Vec<Lifespan> {
    let children = g.children();
    g.nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| Lifespan {
            id: n.id.clone(),
            year: n.year,
            order: i,
            n_children: children[i].len(),
            span: children[i]
                .iter()
                .map(|&c| g.nodes()[c].year - n.year)
                .max()
                .unwrap_or(0),
        })
        .collect()
}
