//! Constitution-level topic mixtures and per-topic information cascades.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil;
use crate::real::Real;

/// Mean topic proportions of one constitution's documents.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstitutionMixture<T> {
    pub constitution_id: String,
    pub year: i32,
    pub weights: Vec<T>,
}

/// A constitution observed in a cascade at its year.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hit {
    pub id: String,
    pub year: i32,
}

/// The constitutions where one topic is expressed. Hits are sorted by (year, id).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cascade {
    pub topic: usize,
    pub hits: Vec<Hit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    /// Fraction of constitutions, ranked by topic weight, that enter each cascade.
    pub tau: f64,
    /// When set, a constitution enters a cascade iff its weight is at least this value,
    /// and `tau` is ignored.
    #[serde(default)]
    pub absolute_threshold: Option<f64>,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            tau: 0.3,
            absolute_threshold: None,
        }
    }
}

impl CascadeConfig {
    pub fn with_tau(tau: f64) -> Self {
        Self {
            tau,
            absolute_threshold: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::config("cascade.tau", "must lie in [0, 1]"));
        }
        if let Some(t) = self.absolute_threshold {
            if !t.is_finite() {
                return Err(Error::config(
                    "cascade.absolute_threshold",
                    "must be finite",
                ));
            }
        }
        Ok(())
    }
}

/// Averages document topic proportions per constitution, unweighted. `rows` pairs each
/// document's constitution id with its proportions. Output is sorted by (year, id).
pub fn constitution_mixture<T: Real, S: AsRef<str>>(
    rows: &[(S, Vec<T>)],
    years: &HashMap<String, i32>,
) -> Result<Vec<ConstitutionMixture<T>>> {
    let mut sums: BTreeMap<&str, (Vec<T>, usize)> = BTreeMap::new();
    let k = rows.first().map_or(0, |r| r.1.len());
    for (cid, weights) in rows {
        if weights.len() != k {
            return Err(Error::InvalidInput(
                "documents disagree on topic count".into(),
            ));
        }
        let entry = sums
            .entry(cid.as_ref())
            .or_insert_with(|| (vec![T::zero(); k], 0));
        for (s, &w) in entry.0.iter_mut().zip(weights) {
            *s += w;
        }
        entry.1 += 1;
    }
    let mut out = sums
        .into_iter()
        .map(|(cid, (sum, n))| {
            let year = *years
                .get(cid)
                .ok_or_else(|| Error::MissingYear(cid.to_string()))?;
            let n = T::from_usize_lossy(n);
            Ok(ConstitutionMixture {
                constitution_id: cid.to_string(),
                year,
                weights: sum.into_iter().map(|s| s / n).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(|a, b| (a.year, &a.constitution_id).cmp(&(b.year, &b.constitution_id)));
    Ok(out)
}

/// Number of cascade members for `n` constitutions at fraction `tau`: the ceiling of
/// `tau * n`, ignoring rounding noise just above an integer.
pub fn cascade_size(tau: f64, n: usize) -> usize {
    let x = tau * n as f64;
    ((x - 1e-9 * x.max(1.0)).ceil().max(0.0) as usize).min(n)
}

/// One cascade per topic. Under the rank rule a topic's cascade holds the `cascade_size`
/// constitutions with the largest weight on it; ties are broken by earlier year, then id.
pub fn extract_cascades<T: Real>(
    mixtures: &[ConstitutionMixture<T>],
    cfg: &CascadeConfig,
) -> Result<Vec<Cascade>> {
    cfg.validate()?;
    if mixtures.is_empty() {
        return Err(Error::InvalidInput("no constitution mixtures".into()));
    }
    let k = mixtures[0].weights.len();
    if mixtures.iter().any(|m| m.weights.len() != k) {
        return Err(Error::InvalidInput(
            "mixtures disagree on topic count".into(),
        ));
    }
    let n = mixtures.len();
    let take = cascade_size(cfg.tau, n);
    let cascades = (0..k)
        .map(|topic| {
            let mut members: Vec<&ConstitutionMixture<T>> = match cfg.absolute_threshold {
                Some(thr) => mixtures
                    .iter()
                    .filter(|m| m.weights[topic].as_f64() >= thr)
                    .collect(),
                None => {
                    let mut ranked: Vec<&ConstitutionMixture<T>> = mixtures.iter().collect();
                    ranked.sort_by(|a, b| {
                        b.weights[topic]
                            .partial_cmp(&a.weights[topic])
                            .unwrap_or(Ordering::Equal)
                            .then(a.year.cmp(&b.year))
                            .then(a.constitution_id.cmp(&b.constitution_id))
                    });
                    ranked.truncate(take);
                    ranked
                }
            };
            members.sort_by(|a, b| (a.year, &a.constitution_id).cmp(&(b.year, &b.constitution_id)));
            Cascade {
                topic,
                hits: members
                    .into_iter()
                    .map(|m| Hit {
                        id: m.constitution_id.clone(),
                        year: m.year,
                    })
                    .collect(),
            }
        })
        .collect();
    Ok(cascades)
}

#[derive(Debug, Serialize, Deserialize)]
struct MixtureRow {
    constitution_id: String,
    year: i32,
    topic: usize,
    weight: f64,
}

pub fn write_mixtures<T: Real>(path: &Path, mixtures: &[ConstitutionMixture<T>]) -> Result<()> {
    let rows = mixtures.iter().flat_map(|m| {
        m.weights.iter().enumerate().map(|(topic, w)| MixtureRow {
            constitution_id: m.constitution_id.clone(),
            year: m.year,
            topic,
            weight: w.as_f64(),
        })
    });
    fsutil::write_csv(path, rows)
}

pub fn read_mixtures<T: Real>(path: &Path) -> Result<Vec<ConstitutionMixture<T>>> {
    let rows: Vec<MixtureRow> = fsutil::read_csv(path)?;
    let mut by_id: BTreeMap<(i32, String), Vec<(usize, T)>> = BTreeMap::new();
    for r in rows {
        by_id
            .entry((r.year, r.constitution_id))
            .or_default()
            .push((r.topic, T::lit(r.weight)));
    }
    by_id
        .into_iter()
        .map(|((year, id), mut ws)| {
            ws.sort_by_key(|&(t, _)| t);
            if ws.iter().enumerate().any(|(i, &(t, _))| i != t) {
                return Err(Error::InvalidInput(format!(
                    "mixture for `{id}` has missing topics"
                )));
            }
            Ok(ConstitutionMixture {
                constitution_id: id,
                year,
                weights: ws.into_iter().map(|(_, w)| w).collect(),
            })
        })
        .collect()
}

/// `cascades.json`: topic id -> list of `[id, year]` pairs.
pub fn write_cascades(path: &Path, cascades: &[Cascade]) -> Result<()> {
    let map: BTreeMap<usize, Vec<(&str, i32)>> = cascades
        .iter()
        .map(|c| {
            (
                c.topic,
                c.hits.iter().map(|h| (h.id.as_str(), h.year)).collect(),
            )
        })
        .collect();
    fsutil::write_json(path, &map)
}

pub fn read_cascades(path: &Path) -> Result<Vec<Cascade>> {
    let map: BTreeMap<usize, Vec<(String, i32)>> = fsutil::read_json(path)?;
    Ok(map
        .into_iter()
        .map(|(topic, hits)| {
            let mut hits: Vec<Hit> = hits
                .into_iter()
                .map(|(id, year)| Hit { id, year })
                .collect();
            hits.sort_by(|a, b| (a.year, &a.id).cmp(&(b.year, &b.id)));
            Cascade { topic, hits }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mix(id: &str, year: i32, w: &[f64]) -> ConstitutionMixture<f64> {
        ConstitutionMixture {
            constitution_id: id.into(),
            year,
            weights: w.to_vec(),
        }
    }

    #[test]
    fn mixture_is_mean_of_documents() {
        let years: HashMap<String, i32> = [("a".to_string(), 1800), ("b".to_string(), 1790)].into();
        let rows = vec![
            ("a", vec![0.2f64, 0.8]),
            ("a", vec![0.6, 0.4]),
            ("b", vec![0.3, 0.7]),
        ];
        let m = constitution_mixture(&rows, &years).unwrap();
        assert_eq!(m[0].constitution_id, "b");
        assert_eq!(m[0].weights, [0.3, 0.7]);
        assert!((m[1].weights[0] - 0.4).abs() < 1e-15);
        assert!((m[1].weights[1] - 0.6).abs() < 1e-15);
        assert!((m[1].weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn missing_year_is_reported() {
        let rows = vec![("x", vec![1.0])];
        let err = constitution_mixture(&rows, &HashMap::new()).unwrap_err();
        assert!(matches!(err, Error::MissingYear(id) if id == "x"));
    }

    #[test]
    fn cascade_size_rounding() {
        assert_eq!(cascade_size(0.3, 10), 3);
        assert_eq!(cascade_size(0.0, 10), 0);
        assert_eq!(cascade_size(1.0, 10), 10);
        assert_eq!(cascade_size(0.31, 10), 4);
        assert_eq!(cascade_size(0.7, 10), 7);
    }

    #[test]
    fn tau_extremes() {
        let ms = vec![mix("a", 1800, &[0.5, 0.5]), mix("b", 1810, &[0.1, 0.9])];
        for c in extract_cascades(&ms, &CascadeConfig::with_tau(0.0)).unwrap() {
            assert!(c.hits.is_empty());
        }
        for c in extract_cascades(&ms, &CascadeConfig::with_tau(1.0)).unwrap() {
            assert_eq!(c.hits.len(), 2);
        }
    }

    #[test]
    fn ties_prefer_earlier_year_then_id() {
        let ms = vec![
            mix("c", 1900, &[0.5]),
            mix("b", 1850, &[0.5]),
            mix("a", 1850, &[0.5]),
        ];
        let c = extract_cascades(&ms, &CascadeConfig::with_tau(0.5)).unwrap();
        assert_eq!(
            c[0].hits.iter().map(|h| h.id.as_str()).collect::<Vec<_>>(),
            ["a", "b"]
        );
    }

    #[test]
    fn absolute_threshold_rule() {
        let ms = vec![mix("a", 1800, &[0.6, 0.4]), mix("b", 1810, &[0.2, 0.8])];
        let cfg = CascadeConfig {
            tau: 0.0,
            absolute_threshold: Some(0.5),
        };
        let c = extract_cascades(&ms, &cfg).unwrap();
        assert_eq!(
            c[0].hits,
            [Hit {
                id: "a".into(),
                year: 1800
            }]
        );
        assert_eq!(
            c[1].hits,
            [Hit {
                id: "b".into(),
                year: 1810
            }]
        );
    }
}
