//! Family tree linking every constitution to its closest predecessor in topic space.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::ConstitutionMixture;
use crate::diffusion::dot_escape;
use crate::error::{Error, Result};
use crate::fsutil;
use crate::real::Real;

/// Natural-log Kullback-Leibler divergence `KL(p || q)`. Terms with `p_i = 0` contribute 0.
pub fn kl_divergence<T: Real>(p: &[T], q: &[T]) -> Result<T> {
    if p.len() != q.len() {
        return Err(Error::Domain(format!(
            "distributions have lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    let tol = T::lit(1e-6);
    for (name, v) in [("P", p), ("Q", q)] {
        let s = v.iter().fold(T::zero(), |a, &x| a + x);
        if (s - T::one()).abs() > tol || v.iter().any(|&x| x < T::zero()) {
            return Err(Error::Domain(format!(
                "{name} is not a probability vector (sum {s})"
            )));
        }
    }
    let mut kl = T::zero();
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > T::zero() {
            if qi <= T::zero() {
                return Err(Error::Domain(format!(
                    "Q[{i}] is zero where P[{i}] is positive"
                )));
            }
            kl += pi * (pi / qi).ln();
        }
    }
    Ok(kl)
}

/// Which argument the later constitution takes in the divergence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlDirection {
    /// `KL(child || candidate ancestor)`.
    #[default]
    ChildFirst,
    /// `KL(candidate ancestor || child)`.
    AncestorFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyTree<T> {
    pub root: String,
    pub parent: BTreeMap<String, String>,
    pub divergence: BTreeMap<String, T>,
}

impl<T> FamilyTree<T> {
    pub fn n_edges(&self) -> usize {
        self.parent.len()
    }
}

/// Assigns each constitution the strictly earlier constitution of least divergence; ties go
/// to the earlier year, then the smaller id. The first constitution in (year, id) order is the
/// root. Other constitutions sharing the root's year have no strictly earlier candidate and
/// are attached to the best of those preceding them in (year, id) order.
pub fn build_family_tree<T: Real>(
    mixtures: &[ConstitutionMixture<T>],
    direction: KlDirection,
) -> Result<FamilyTree<T>> {
    if mixtures.is_empty() {
        return Err(Error::InvalidInput(
            "no constitutions to build a tree from".into(),
        ));
    }
    let mut order: Vec<&ConstitutionMixture<T>> = mixtures.iter().collect();
    order.sort_by(|a, b| (a.year, &a.constitution_id).cmp(&(b.year, &b.constitution_id)));
    let root_year = order[0].year;

    let links: Vec<Option<(usize, T)>> = (0..order.len())
        .into_par_iter()
        .map(|c| {
            if c == 0 {
                return Ok(None);
            }
            let child = order[c];
            let strictly_earlier = order[..c]
                .iter()
                .take_while(|m| m.year < child.year)
                .count();
            let pool = if child.year == root_year {
                c
            } else {
                strictly_earlier
            };
            let mut best: Option<(usize, T)> = None;
            for (a, anc) in order[..pool].iter().enumerate() {
                let d = match direction {
                    KlDirection::ChildFirst => kl_divergence(&child.weights, &anc.weights)?,
                    KlDirection::AncestorFirst => kl_divergence(&anc.weights, &child.weights)?,
                };
                // Candidates are visited in (year, id) order, so strict < keeps the earliest.
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((a, d));
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    let mut parent = BTreeMap::new();
    let mut divergence = BTreeMap::new();
    for (c, link) in links.into_iter().enumerate() {
        if let Some((a, d)) = link {
            parent.insert(
                order[c].constitution_id.clone(),
                order[a].constitution_id.clone(),
            );
            divergence.insert(order[c].constitution_id.clone(), d);
        }
    }
    Ok(FamilyTree {
        root: order[0].constitution_id.clone(),
        parent,
        divergence,
    })
}

#[derive(Serialize)]
struct TreeRow<'a> {
    child_id: &'a str,
    parent_id: &'a str,
    kl: f64,
}

pub fn write_family_tree_csv<T: Real>(path: &Path, tree: &FamilyTree<T>) -> Result<()> {
    fsutil::write_csv(
        path,
        tree.parent.iter().map(|(c, p)| TreeRow {
            child_id: c,
            parent_id: p,
            kl: tree.divergence[c].as_f64(),
        }),
    )
}

/// `labels` maps ids to display labels and falls back to the id.
pub fn write_family_tree_dot<T: Real>(
    path: &Path,
    tree: &FamilyTree<T>,
    labels: &HashMap<String, String>,
) -> Result<()> {
    let mut s = String::from("digraph family_tree {\n");
    let ids = std::iter::once(&tree.root).chain(tree.parent.keys());
    for id in ids {
        let label = labels.get(id).unwrap_or(id);
        let _ = writeln!(
            s,
            "  \"{}\" [label=\"{}\"];",
            dot_escape(id),
            dot_escape(label)
        );
    }
    for (c, p) in &tree.parent {
        let _ = writeln!(s, "  \"{}\" -> \"{}\";", dot_escape(p), dot_escape(c));
    }
    s.push_str("}\n");
    fsutil::write_string(path, &s)
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
    fn kl_values() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let ln2 = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!((ln2 - std::f64::consts::LN_2).abs() < 1e-12);
        let pq = kl_divergence(&[0.9f64, 0.1], &[0.5, 0.5]).unwrap();
        let qp = kl_divergence(&[0.5f64, 0.5], &[0.9, 0.1]).unwrap();
        assert!((pq - 0.368_064_207_168_497_1).abs() < 1e-12, "{pq}");
        assert!((qp - 0.510_825_623_765_990_7).abs() < 1e-12, "{qp}");
    }

    #[test]
    fn kl_domain_errors() {
        assert!(matches!(
            kl_divergence(&[0.5, 0.5], &[1.0, 0.0]),
            Err(Error::Domain(_))
        ));
        assert!(kl_divergence(&[0.5, 0.6], &[0.5, 0.5]).is_err());
        assert!(kl_divergence(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn star_and_singleton() {
        let one =
            build_family_tree(&[mix("a", 1789, &[0.5, 0.5])], KlDirection::ChildFirst).unwrap();
        assert_eq!(one.root, "a");
        assert!(one.parent.is_empty());

        let ms = vec![
            mix("a", 1789, &[0.5, 0.5]),
            mix("b", 1800, &[0.1, 0.9]),
            mix("c", 1810, &[0.55, 0.45]),
        ];
        // c is closer to a than to b; b is forced onto a.
        let t = build_family_tree(&ms, KlDirection::ChildFirst).unwrap();
        assert_eq!(t.parent["b"], "a");
        assert_eq!(t.parent["c"], "a");
        assert_eq!(t.n_edges(), 2);
    }

    #[test]
    fn same_year_constitutions_are_not_parents() {
        let ms = vec![
            mix("a", 1789, &[0.5, 0.5]),
            mix("b", 1800, &[0.1, 0.9]),
            mix("c", 1800, &[0.1, 0.9]),
        ];
        let t = build_family_tree(&ms, KlDirection::ChildFirst).unwrap();
        assert_eq!(t.parent["c"], "a");
    }
}
