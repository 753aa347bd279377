use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DiffusionNetwork, Node};
use crate::error::Result;
use crate::fsutil;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRow {
    pub src_id: String,
    pub dst_id: String,
    pub src_year: i32,
    pub dst_year: i32,
    pub gain_at_insertion: f64,
}

pub fn write_network_csv<T: Real>(path: &Path, g: &DiffusionNetwork<T>) -> Result<()> {
    let nodes = g.nodes();
    fsutil::write_csv(
        path,
        g.edges().iter().map(|e| NetworkRow {
            src_id: nodes[e.src].id.clone(),
            dst_id: nodes[e.dst].id.clone(),
            src_year: nodes[e.src].year,
            dst_year: nodes[e.dst].year,
            gain_at_insertion: e.gain.as_f64(),
        }),
    )
}

/// Rebuilds a network from `network.csv` over the given node set.
pub fn read_network<T: Real>(path: &Path, nodes: Vec<Node>) -> Result<DiffusionNetwork<T>> {
    let rows: Vec<NetworkRow> = fsutil::read_csv(path)?;
    let mut g = DiffusionNetwork::new(nodes)?;
    for r in rows {
        g.add_edge_by_id(&r.src_id, &r.dst_id, T::lit(r.gain_at_insertion))?;
    }
    Ok(g)
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering with nodes labelled `country\nyear`; `countries` maps node ids to
/// country names and falls back to the id.
pub fn write_network_dot<T: Real>(
    path: &Path,
    g: &DiffusionNetwork<T>,
    countries: &HashMap<String, String>,
) -> Result<()> {
    let mut s = String::from("digraph diffusion {\n  rankdir=LR;\n");
    for n in g.nodes() {
        let country = countries.get(&n.id).unwrap_or(&n.id);
        let _ = writeln!(
            s,
            "  \"{}\" [label=\"{}\\n{}\"];",
            dot_escape(&n.id),
            dot_escape(country),
            n.year
        );
    }
    for e in g.edges() {
        let _ = writeln!(
            s,
            "  \"{}\" -> \"{}\";",
            dot_escape(&g.nodes()[e.src].id),
            dot_escape(&g.nodes()[e.dst].id)
        );
    }
    s.push_str("}\n");
    fsutil::write_string(path, &s)
}
