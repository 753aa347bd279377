mod common;

use ideaflow::corpus::SparseCounts;
use ideaflow::topic_model::{
    assign_folds, cross_validate, gibbs_train, heldout_loglik, CvConfig, HeldOutConfig,
    LdaHyperParams,
};
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn quick(k: usize, seed: u64) -> LdaHyperParams {
    LdaHyperParams {
        iters: 300,
        seed,
        ..LdaHyperParams::new(k)
    }
}

#[test]
fn recovers_two_planted_topics() {
    let corpus = planted_corpus(2, 20, 60, 100, 0.5, 1);
    let model = gibbs_train(&corpus.docs, corpus.n_vocab, &quick(2, 7)).unwrap();
    let est: Vec<Vec<f64>> = model.beta.iter_rows().map(<[f64]>::to_vec).collect();
    for c in aligned_cosines(&est, &corpus.beta) {
        assert!(c >= 0.95, "cosine {c}");
    }
    for row in model.theta.iter_rows() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
    assert!(model.state.counts_consistent());
}

#[test]
fn heldout_matches_enumeration_at_small_alpha_with_many_particles() {
    let mut r = rng(5);
    for inst in 0..20 {
        let v = r.random_range(2..=4u32);
        let train: Vec<_> = (0..6)
            .map(|d| doc(&format!("t{d}"), SparseCounts::from_ids((0..8).map(|_| r.random_range(0..v)).collect::<Vec<_>>())))
            .collect();
        let hyper = LdaHyperParams {
            alpha: Some(r.random_range(0.1..2.0)),
            eta: 0.5,
            iters: 200,
            seed: inst,
            ..LdaHyperParams::new(2)
        };
        let model = gibbs_train(&train, v as usize, &hyper).unwrap();
        let beta: Vec<Vec<f64>> = model.beta.iter_rows().map(<[f64]>::to_vec).collect();
        let len = r.random_range(1..=3);
        let test = doc("h", SparseCounts::from_ids((0..len).map(|_| r.random_range(0..v)).collect::<Vec<_>>()));
        let cfg = HeldOutConfig { particles: 2000, seed: inst, ..HeldOutConfig::default() };
        let est = heldout_loglik(&model, std::slice::from_ref(&test), &cfg).loglik;
        let exact = exact_doc_loglik(&beta, model.alpha(), &test.counts.expand());
        assert!((est - exact).abs() < 0.05, "instance {inst}: {est} vs {exact}");
    }
}

#[test]
fn heldout_single_token_is_exact() {
    // With one token the predictive is the prior mixture of topics: no sampling error.
    let corpus = planted_corpus(3, 5, 30, 40, 1.0, 2);
    let model = gibbs_train(&corpus.docs, corpus.n_vocab, &quick(3, 1)).unwrap();
    for w in 0..corpus.n_vocab as u32 {
        let d = doc("x", SparseCounts::from_ids([w]));
        let est = heldout_loglik(&model, &[d], &HeldOutConfig::default()).loglik;
        let p: f64 = (0..3).map(|t| model.beta.row(t)[w as usize] / 3.0).sum();
        assert!((est - p.ln()).abs() < 1e-12);
    }
}

#[test]
fn heldout_skips_out_of_vocabulary_tokens() {
    let corpus = planted_corpus(2, 5, 10, 30, 1.0, 3);
    let model = gibbs_train(&corpus.docs, corpus.n_vocab, &quick(2, 1)).unwrap();
    let d = doc("x", SparseCounts::from_ids([0u32, 1, 99]));
    let s = heldout_loglik(&model, &[d], &HeldOutConfig::default());
    assert_eq!((s.n_tokens, s.skipped_tokens), (2, 1));
    assert!(s.loglik < 0.0);
}

#[test]
fn cross_validation_is_seeded() {
    let corpus = planted_corpus(3, 10, 40, 60, 0.5, 4);
    let cv = CvConfig { folds: 3, ..CvConfig::default() };
    let a = cross_validate(&corpus.docs, corpus.n_vocab, &[1, 3], &quick(3, 9), &cv).unwrap();
    let b = cross_validate(&corpus.docs, corpus.n_vocab, &[1, 3], &quick(3, 9), &cv).unwrap();
    assert_eq!(a.scores, b.scores);
    assert_eq!(a.fold_of, b.fold_of);
    assert_eq!(a.selected_k, 3);
}

#[test]
fn cross_validation_rejects_bad_candidates() {
    let corpus = planted_corpus(2, 5, 10, 20, 0.5, 5);
    let cv = CvConfig::default();
    assert!(cross_validate(&corpus.docs, corpus.n_vocab, &[], &quick(2, 0), &cv).is_err());
    assert!(cross_validate(&corpus.docs, corpus.n_vocab, &[0], &quick(2, 0), &cv).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn folds_partition_documents(n in 1usize..200, folds in 2usize..8, seed in 0u64..1000) {
        let f = assign_folds(n, folds, seed);
        prop_assert_eq!(f.len(), n);
        let mut sizes = vec![0usize; folds];
        for &x in &f {
            prop_assert!(x < folds);
            sizes[x] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
    }

    #[test]
    fn beta_rows_are_distributions(seed in 0u64..1000, k in 1usize..5) {
        let corpus = planted_corpus(2, 4, 8, 15, 1.0, seed);
        let hyper = LdaHyperParams { iters: 30, ..quick(k, seed) };
        let model = gibbs_train(&corpus.docs, corpus.n_vocab, &hyper).unwrap();
        for row in model.beta.iter_rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(row.iter().all(|&b| b > 0.0));
        }
        prop_assert!(model.state.counts_consistent());
    }
}
