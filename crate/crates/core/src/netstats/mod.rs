//! Statistics of an inferred diffusion network: degree fits, communities, motifs, growth,
//! lifespans and the Yule birth process.

mod community;
mod fits;
mod growth;
mod motifs;
mod yule;

use std::path::Path;

use serde::Serialize;

pub use community::{
    connected_components, edge_betweenness, girvan_newman, modularity, spectral_modularity,
    SpectralPartition, UndirectedGraph,
};
pub use fits::{fit_gaussian, fit_negbin, fit_poisson, negbin_loglik, FitParams, FitResult};
pub use growth::{cumulative_counts, piecewise_growth, GrowthFit, PiecewiseFit};
pub use motifs::{degree_sequences, lifespans, median, motifs, Lifespan, Motif, Taxonomy};
pub use yule::{simulate_yule, yule_mean, yule_pmf, YuleParams, YuleSimulation};

use crate::diffusion::DiffusionNetwork;
use crate::error::Result;
use crate::fsutil;
use crate::real::Real;

#[derive(Debug, Serialize)]
struct DegreeRow<'a> {
    id: &'a str,
    year: i32,
    indegree: usize,
    outdegree: usize,
}

pub fn write_degrees<T: Real>(path: &Path, g: &DiffusionNetwork<T>) -> Result<()> {
    let (din, dout) = degree_sequences(g);
    fsutil::write_csv(
        path,
        g.nodes().iter().enumerate().map(|(i, n)| DegreeRow {
            id: &n.id,
            year: n.year,
            indegree: din[i],
            outdegree: dout[i],
        }),
    )
}

/// One attempted fit of one degree sample. Degenerate samples are recorded with their
/// error rather than aborting the analysis.
#[derive(Debug, Clone, Serialize)]
pub struct FitRecord<T> {
    pub sample: String,
    pub family: String,
    pub fit: Option<FitResult<T>>,
    pub error: Option<String>,
}

/// Fits all three families to a degree sample.
pub fn fit_all<T: Real>(sample: &str, degrees: &[usize]) -> Vec<FitRecord<T>> {
    let counts: Vec<u64> = degrees.iter().map(|&d| d as u64).collect();
    let reals: Vec<T> = degrees.iter().map(|&d| T::from_usize_lossy(d)).collect();
    let attempts = [
        ("gaussian", fit_gaussian(&reals)),
        ("poisson", fit_poisson(&counts)),
        ("negative_binomial", fit_negbin(&counts)),
    ];
    attempts
        .into_iter()
        .map(|(family, r)| {
            let (fit, error) = match r {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            FitRecord {
                sample: sample.to_owned(),
                family: family.to_owned(),
                fit,
                error,
            }
        })
        .collect()
}

pub fn write_fits<T: Real>(path: &Path, fits: &[FitRecord<T>]) -> Result<()> {
    fsutil::write_json(path, fits)
}

#[derive(Debug, Serialize)]
struct CommunityRow<'a> {
    id: &'a str,
    gn_epoch: usize,
    spectral_cluster: usize,
}

pub fn write_communities<T: Real>(
    path: &Path,
    g: &DiffusionNetwork<T>,
    gn: &[usize],
    spectral: &[usize],
) -> Result<()> {
    fsutil::write_csv(
        path,
        g.nodes().iter().enumerate().map(|(i, n)| CommunityRow {
            id: &n.id,
            gn_epoch: gn[i],
            spectral_cluster: spectral[i],
        }),
    )
}

#[derive(Debug, Serialize)]
struct MotifRow<'a> {
    id: &'a str,
    year: i32,
    n_parents: usize,
    n_children: usize,
    taxonomy: &'static str,
}

pub fn write_motifs(path: &Path, motifs: &[Motif]) -> Result<()> {
    fsutil::write_csv(
        path,
        motifs.iter().map(|m| MotifRow {
            id: &m.constitution_id,
            year: m.year,
            n_parents: m.parents.len(),
            n_children: m.children.len(),
            taxonomy: m.taxonomy.as_str(),
        }),
    )
}

pub fn write_lifespans(path: &Path, spans: &[Lifespan]) -> Result<()> {
    fsutil::write_csv(path, spans)
}

#[derive(Debug, Serialize)]
struct GrowthRow<T> {
    n_segments: usize,
    selected: bool,
    segment: usize,
    start: T,
    end: T,
    slope: T,
    sse: T,
    bic: T,
}

/// One row per segment of every candidate fit.
pub fn write_growth<T: Real>(path: &Path, fit: &GrowthFit<T>, x_end: T) -> Result<()> {
    let mut rows = Vec::new();
    for (c, cand) in fit.candidates.iter().enumerate() {
        let mut bounds = vec![cand.start_x];
        bounds.extend(&cand.breakpoints);
        bounds.push(x_end);
        for (s, &slope) in cand.slopes.iter().enumerate() {
            rows.push(GrowthRow {
                n_segments: cand.n_segments,
                selected: c == fit.selected,
                segment: s + 1,
                start: bounds[s],
                end: bounds[s + 1],
                slope,
                sse: cand.sse,
                bic: cand.bic,
            });
        }
    }
    fsutil::write_csv(path, rows)
}

#[derive(Debug, Serialize)]
struct YuleRow {
    n: u64,
    pmf: f64,
    empirical: f64,
}

/// The closed-form pmf beside the simulated frequencies, up to the largest simulated size.
pub fn write_yule_check<T: Real>(
    path: &Path,
    params: &YuleParams<T>,
    sim: &YuleSimulation,
) -> Result<()> {
    let max_n = sim.counts.keys().next_back().copied().unwrap_or(params.n0);
    let rows = (params.n0..=max_n)
        .map(|n| {
            Ok(YuleRow {
                n,
                pmf: yule_pmf(n, params)?.as_f64(),
                empirical: sim.frequency(n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    fsutil::write_csv(path, rows)
}
