use std::path::Path;

use serde::Serialize;

use super::{greedy_infer_with_nodes, DiffusionConfig, Node};
use crate::cascade::{extract_cascades, CascadeConfig, ConstitutionMixture};
use crate::error::{Error, Result};
use crate::fsutil;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub n_edges: usize,
    pub mean_in: f64,
    pub std_in: f64,
    pub mean_out: f64,
    pub std_out: f64,
}

/// Degree statistics of the networks inferred across a grid of cascade thresholds.
#[derive(Debug, Clone)]
pub struct TauSweep {
    pub rows: Vec<SweepRow>,
    /// Nodes in (year, id) order; degree vectors follow this order.
    pub nodes: Vec<Node>,
    pub in_degrees: Vec<Vec<usize>>,
    pub out_degrees: Vec<Vec<usize>>,
    /// Pearson correlations between the in-degree vectors of every pair of thresholds.
    pub corr_in: Vec<Vec<f64>>,
    pub corr_out: Vec<Vec<f64>>,
}

/// Pearson correlation; NaN when either vector has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return f64::NAN;
    }
    sab / (saa * sbb).sqrt()
}

fn mean_std(xs: &[usize]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<usize>() as f64 / n;
    let var = xs.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn corr_matrix(vectors: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let as_f: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().map(|&x| x as f64).collect())
        .collect();
    let n = as_f.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = 1.0;
        for j in i + 1..n {
            let r = pearson(&as_f[i], &as_f[j]);
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    m
}

/// Infers one network per threshold in `tau_grid` and summarizes its degree distribution.
pub fn tau_sweep<T: Real>(
    mixtures: &[ConstitutionMixture<T>],
    tau_grid: &[f64],
    cfg: &DiffusionConfig<T>,
) -> Result<TauSweep> {
    if tau_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::config("sweep.tau_grid", "must be sorted ascending"));
    }
    if tau_grid.iter().any(|t| !(0.0..=0.8).contains(t)) {
        return Err(Error::config(
            "sweep.tau_grid",
            "values must lie in [0, 0.8]",
        ));
    }
    let nodes: Vec<Node> = mixtures
        .iter()
        .map(|m| Node {
            id: m.constitution_id.clone(),
            year: m.year,
        })
        .collect();
    let mut rows = Vec::with_capacity(tau_grid.len());
    let mut in_degrees = Vec::with_capacity(tau_grid.len());
    let mut out_degrees = Vec::with_capacity(tau_grid.len());
    let mut ordered_nodes = Vec::new();
    for &tau in tau_grid {
        let cascades = extract_cascades(mixtures, &CascadeConfig::with_tau(tau))?;
        let g = greedy_infer_with_nodes(nodes.clone(), &cascades, cfg)?;
        let mut din = vec![0usize; g.n_nodes()];
        let mut dout = vec![0usize; g.n_nodes()];
        for e in g.edges() {
            din[e.dst] += 1;
            dout[e.src] += 1;
        }
        let (mean_in, std_in) = mean_std(&din);
        let (mean_out, std_out) = mean_std(&dout);
        rows.push(SweepRow {
            tau,
            n_edges: g.n_edges(),
            mean_in,
            std_in,
            mean_out,
            std_out,
        });
        in_degrees.push(din);
        out_degrees.push(dout);
        ordered_nodes = g.nodes().to_vec();
    }
    Ok(TauSweep {
        corr_in: corr_matrix(&in_degrees),
        corr_out: corr_matrix(&out_degrees),
        rows,
        nodes: ordered_nodes,
        in_degrees,
        out_degrees,
    })
}

fn write_matrix(path: &Path, taus: &[f64], m: &[Vec<f64>]) -> Result<()> {
    let mut s = String::from("tau");
    for t in taus {
        s.push_str(&format!(",{t}"));
    }
    s.push('\n');
    for (t, row) in taus.iter().zip(m) {
        s.push_str(&t.to_string());
        for x in row {
            s.push_str(&format!(",{x}"));
        }
        s.push('\n');
    }
    fsutil::write_string(path, &s)
}

/// Writes `sweep.csv`, `sweep_corr_in.csv` and `sweep_corr_out.csv` into `dir`.
pub fn write_sweep(dir: &Path, sweep: &TauSweep) -> Result<()> {
    fsutil::write_csv(&dir.join("sweep.csv"), &sweep.rows)?;
    let taus: Vec<f64> = sweep.rows.iter().map(|r| r.tau).collect();
    write_matrix(&dir.join("sweep_corr_in.csv"), &taus, &sweep.corr_in)?;
    write_matrix(&dir.join("sweep_corr_out.csv"), &taus, &sweep.corr_out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_basics() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_nan());
    }

    #[test]
    fn zero_tau_has_no_edges_and_unit_diagonal() {
        let ms: Vec<ConstitutionMixture<f64>> = (0..6)
            .map(|i| ConstitutionMixture {
                constitution_id: format!("c{i}"),
                year: 1800 + 10 * i,
                weights: vec![0.1 * i as f64, 1.0 - 0.1 * i as f64],
            })
            .collect();
        let cfg = DiffusionConfig {
            alpha_hat: 20.0,
            ..Default::default()
        };
        let s = tau_sweep(&ms, &[0.0, 0.5, 0.8], &cfg).unwrap();
        assert_eq!(s.rows[0].n_edges, 0);
        assert_eq!(s.rows[0].mean_in, 0.0);
        for (i, row) in s.corr_in.iter().enumerate() {
            assert_eq!(row[i], 1.0);
            assert_eq!(s.corr_out[i][i], 1.0);
        }
        assert!(s.rows[2].n_edges > 0);
        assert!(tau_sweep(&ms, &[0.5, 0.1], &cfg).is_err());
        assert!(tau_sweep(&ms, &[0.9], &cfg).is_err());
    }
}
