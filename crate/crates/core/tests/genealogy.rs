mod common;

use std::collections::BTreeSet;

use ideaflow::genealogy::{build_family_tree, kl_divergence, KlDirection};
use ideaflow::{Error, Mixture};
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn random_mixtures(seed: u64, n: usize, k: usize, year_span: i32) -> Vec<Mixture> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| Mixture {
            constitution_id: format!("c{i:02}"),
            year: 1800 + r.random_range(0..year_span),
            weights: dirichlet(&mut r, 0.8, k),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kl_is_nonnegative_and_zero_on_self(seed in 0u64..10_000, k in 1usize..12) {
        let mut r = rng(seed);
        let p = dirichlet(&mut r, 0.5, k);
        let q = dirichlet(&mut r, 0.5, k);
        prop_assert!(kl_divergence(&p, &q).unwrap() >= -1e-12);
        prop_assert!(kl_divergence(&p, &p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn tree_has_n_minus_one_edges_and_no_cycles(seed in 0u64..10_000, n in 1usize..30, k in 2usize..6, span in 1i32..15) {
        let m = random_mixtures(seed, n, k, span);
        for dir in [KlDirection::ChildFirst, KlDirection::AncestorFirst] {
            let tree = build_family_tree(&m, dir).unwrap();
            prop_assert_eq!(tree.n_edges(), n - 1);
            prop_assert!(!tree.parent.contains_key(&tree.root));
            let year = |id: &str| m.iter().find(|x| x.constitution_id == id).unwrap().year;
            for (child, parent) in &tree.parent {
                prop_assert!(year(parent) <= year(child));
                prop_assert!(tree.divergence[child] >= -1e-12);
            }
            // Following parents from any node reaches the root without revisiting a node.
            for start in m.iter().map(|x| &x.constitution_id) {
                let mut seen = BTreeSet::new();
                let mut cur = start;
                while let Some(p) = tree.parent.get(cur) {
                    prop_assert!(seen.insert(cur.clone()));
                    cur = p;
                }
                prop_assert_eq!(cur, &tree.root);
            }
        }
    }

    #[test]
    fn tree_ignores_input_order(seed in 0u64..10_000, n in 2usize..20) {
        let m = random_mixtures(seed, n, 3, 5);
        let mut rev = m.clone();
        rev.reverse();
        let a = build_family_tree(&m, KlDirection::ChildFirst).unwrap();
        let b = build_family_tree(&rev, KlDirection::ChildFirst).unwrap();
        prop_assert_eq!(a.parent, b.parent);
    }
}

#[test]
fn kl_examples() {
    let p = [0.9f64, 0.1];
    let q = [0.5f64, 0.5];
    let pq = kl_divergence(&p, &q).unwrap();
    let qp = kl_divergence(&q, &p).unwrap();
    assert!((pq - 0.3680642071684971).abs() < 1e-12);
    assert!((qp - 0.5108256237659907).abs() < 1e-12);
    assert!((kl_divergence(&[1.0f64, 0.0], &q).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
    let single = kl_divergence(&[0.9f32, 0.1], &[0.5, 0.5]).unwrap();
    assert!((single as f64 - pq).abs() < 1e-5);
}

#[test]
fn kl_rejects_bad_inputs() {
    assert!(matches!(kl_divergence(&[0.5f64, 0.5], &[1.0, 0.0]), Err(Error::Domain(_))));
    assert!(matches!(kl_divergence(&[0.5f64, 0.5], &[1.0]), Err(Error::Domain(_))));
    assert!(matches!(kl_divergence(&[0.7f64, 0.7], &[0.5, 0.5]), Err(Error::Domain(_))));
}

#[test]
fn direction_changes_the_tree() {
    // c2 is closest to c0 one way and to c1 the other way.
    let mk = |id: &str, year, w: [f64; 2]| Mixture {
        constitution_id: id.into(),
        year,
        weights: w.to_vec(),
    };
    let m = vec![
        mk("c0", 1800, [0.5, 0.5]),
        mk("c1", 1801, [0.99, 0.01]),
        mk("c2", 1802, [0.8, 0.2]),
    ];
    let child_first = build_family_tree(&m, KlDirection::ChildFirst).unwrap();
    let ancestor_first = build_family_tree(&m, KlDirection::AncestorFirst).unwrap();
    let cf = |p: &str| kl_divergence(&m[2].weights, &m.iter().find(|x| x.constitution_id == p).unwrap().weights).unwrap();
    assert!(cf(&child_first.parent["c2"]) <= cf("c0").min(cf("c1")));
    // KL(c2||c0) = 0.193 < KL(c2||c1) = 0.429, but KL(c1||c2) = 0.181 < KL(c0||c2) = 0.223.
    assert_eq!(child_first.parent["c2"], "c0");
    assert_eq!(ancestor_first.parent["c2"], "c1");
}

#[test]
fn empty_input_is_rejected() {
    assert!(build_family_tree::<f64>(&[], KlDirection::ChildFirst).is_err());
}
