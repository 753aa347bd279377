use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gibbs_train, heldout_loglik, HeldOutConfig, LdaHyperParams};
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, FOLD_SPLIT_STREAM, HELDOUT_STREAM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    pub heldout: HeldOutConfig,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            heldout: HeldOutConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub fold_logliks: Vec<f64>,
    /// Sum over folds.
    pub total: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub selected_k: usize,
    pub scores: Vec<KScore>,
    /// Fold index of every document, in input order.
    pub fold_of: Vec<usize>,
}

/// Assigns documents to `folds` near-equal folds through a seeded permutation.
pub fn assign_folds(n_docs: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n_docs).collect();
    order.shuffle(&mut stream_rng(seed, FOLD_SPLIT_STREAM));
    let mut fold_of = vec![0; n_docs];
    for (pos, &doc) in order.iter().enumerate() {
        fold_of[doc] = pos % folds;
    }
    fold_of
}

/// K-fold cross-validation over `candidates`: every (K, fold) pair trains on the other folds
/// and scores the held-out fold. Selects the K with the largest summed held-out
/// log-likelihood, the smaller K on exact ties.
pub fn cross_validate(
    docs: &[Document],
    n_vocab: usize,
    candidates: &[usize],
    template: &LdaHyperParams,
    cfg: &CvConfig,
) -> Result<CvResult> {
    if cfg.folds < 2 {
        return Err(Error::config("select_k.folds", "need at least 2 folds"));
    }
    if docs.len() < cfg.folds {
        return Err(Error::InvalidInput(format!(
            "{} documents cannot fill {} folds",
            docs.len(),
            cfg.folds
        )));
    }
    if candidates.is_empty() {
        return Err(Error::config("select_k.candidates", "no candidate K given"));
    }
    for &k in candidates {
        template.with_k(k).validate()?;
    }

    let fold_of = assign_folds(docs.len(), cfg.folds, template.seed);
    let jobs: Vec<(usize, usize)> = (0..candidates.len())
        .flat_map(|c| (0..cfg.folds).map(move |f| (c, f)))
        .collect();
    let results: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let train: Vec<Document> = docs
                .iter()
                .zip(&fold_of)
                .filter(|&(_, &df)| df != f)
                .map(|(d, _)| d.clone())
                .collect();
            let test: Vec<Document> = docs
                .iter()
                .zip(&fold_of)
                .filter(|&(_, &df)| df == f)
                .map(|(d, _)| d.clone())
                .collect();
            let stream = 1 + (f * candidates.len() + c) as u64;
            let hyper = LdaHyperParams {
                stream,
                ..template.with_k(candidates[c])
            };
            let model = gibbs_train(&train, n_vocab, &hyper)?;
            let scoring = HeldOutConfig {
                stream: HELDOUT_STREAM | stream,
                ..cfg.heldout.clone()
            };
            Ok(heldout_loglik(&model, &test, &scoring).loglik)
        })
        .collect();

    let mut scores: Vec<KScore> = candidates
        .iter()
        .map(|&k| KScore {
            k,
            fold_logliks: Vec::with_capacity(cfg.folds),
            total: 0.0,
            mean: 0.0,
        })
        .collect();
    for (&(c, _), r) in jobs.iter().zip(results) {
        scores[c].fold_logliks.push(r?);
    }
    for s in &mut scores {
        s.total = s.fold_logliks.iter().sum();
        s.mean = s.total / cfg.folds as f64;
    }
    let best = scores
        .iter()
        .max_by(|a, b| a.total.total_cmp(&b.total).then(b.k.cmp(&a.k)))
        .expect("candidates non-empty");
    Ok(CvResult {
        selected_k: best.k,
        scores: scores.clone(),
        fold_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_are_balanced_and_seeded() {
        let a = assign_folds(23, 5, 9);
        assert_eq!(a, assign_folds(23, 5, 9));
        for f in 0..5 {
            let n = a.iter().filter(|&&x| x == f).count();
            assert!(n == 4 || n == 5);
        }
    }
}
