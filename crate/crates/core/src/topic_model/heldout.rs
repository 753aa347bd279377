use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TopicModel;
use crate::corpus::Document;
use crate::rng::{item_rng, ChainRng, HELDOUT_STREAM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldOutConfig {
    /// Number of particles in the left-to-right estimator.
    pub particles: usize,
    pub seed: u64,
    #[serde(default = "default_stream")]
    pub stream: u64,
}

fn default_stream() -> u64 {
    HELDOUT_STREAM
}

impl Default for HeldOutConfig {
    fn default() -> Self {
        Self {
            particles: 20,
            seed: 0,
            stream: HELDOUT_STREAM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeldOutScore {
    /// Estimated log p(W_test | beta, alpha) in nats.
    pub loglik: f64,
    /// Tokens scored.
    pub n_tokens: usize,
    /// Tokens skipped because their id lies outside the model vocabulary.
    pub skipped_tokens: usize,
}

/// Left-to-right particle estimate of the held-out log-likelihood of `docs` under the
/// model's topics and its symmetric document prior.
///
/// For each position n every particle first refreshes the labels of positions `< n` with one
/// Gibbs sweep, the predictive probability of token n is averaged over particles, particles
/// are resampled in proportion to their predictive probability, and each then draws a label
/// for token n. The product of predictive averages estimates p(w); the resampling step keeps
/// it unbiased, which the unweighted variant is not.
pub fn heldout_loglik(model: &TopicModel, docs: &[Document], cfg: &HeldOutConfig) -> HeldOutScore {
    let v = model.n_vocab();
    let per_doc: Vec<(f64, usize, usize)> = docs
        .par_iter()
        .enumerate()
        .map(|(i, d)| {
            let all = d.counts.expand();
            let skipped = all.iter().filter(|&&w| w as usize >= v).count();
            let words: Vec<u32> = all.into_iter().filter(|&w| (w as usize) < v).collect();
            let mut rng = item_rng(cfg.seed, cfg.stream, i as u64);
            let ll = left_to_right(model, &words, cfg.particles.max(1), &mut rng);
            (ll, words.len(), skipped)
        })
        .collect();
    per_doc.into_iter().fold(
        HeldOutScore {
            loglik: 0.0,
            n_tokens: 0,
            skipped_tokens: 0,
        },
        |acc, (ll, n, s)| HeldOutScore {
            loglik: acc.loglik + ll,
            n_tokens: acc.n_tokens + n,
            skipped_tokens: acc.skipped_tokens + s,
        },
    )
}

fn left_to_right(model: &TopicModel, words: &[u32], particles: usize, rng: &mut ChainRng) -> f64 {
    let k = model.n_topics();
    let alpha = model.alpha();
    let k_alpha = k as f64 * alpha;
    let beta = &model.beta;

    let mut labels = vec![vec![0usize; words.len()]; particles];
    let mut counts = vec![vec![0u32; k]; particles];
    let mut cum = vec![0.0; k];
    let sample = |counts: &[u32], w: usize, rng: &mut ChainRng, cum: &mut [f64]| -> usize {
        let mut total = 0.0;
        for t in 0..k {
            total += (counts[t] as f64 + alpha) * beta[(t, w)];
            cum[t] = total;
        }
        let u = rng.random::<f64>() * total;
        cum.iter().position(|&c| c > u).unwrap_or(k - 1)
    };

    let mut ll = 0.0;
    let mut pred = vec![0.0; particles];
    for (n, &w) in words.iter().enumerate() {
        let w = w as usize;
        let denom = n as f64 + k_alpha;
        for r in 0..particles {
            let (z, c) = (&mut labels[r], &mut counts[r]);
            for prev in 0..n {
                c[z[prev]] -= 1;
                z[prev] = sample(c, words[prev] as usize, rng, &mut cum);
                c[z[prev]] += 1;
            }
            pred[r] = (0..k)
                .map(|t| (c[t] as f64 + alpha) / denom * beta[(t, w)])
                .sum::<f64>();
        }
        let total: f64 = pred.iter().sum();
        ll += (total / particles as f64).ln();
        if n > 0 {
            let keep = systematic_resample(&pred, total, rng);
            labels = keep.iter().map(|&i| labels[i].clone()).collect();
            counts = keep.iter().map(|&i| counts[i].clone()).collect();
        }
        for r in 0..particles {
            let (z, c) = (&mut labels[r], &mut counts[r]);
            z[n] = sample(c, w, rng, &mut cum);
            c[z[n]] += 1;
        }
    }
    ll
}

/// Indices of `weights.len()` particles drawn with one uniform offset and evenly spaced
/// pointers, each index appearing in proportion to its weight.
fn systematic_resample(weights: &[f64], total: f64, rng: &mut ChainRng) -> Vec<usize> {
    let m = weights.len();
    let step = total / m as f64;
    let mut u = rng.random::<f64>() * step;
    let mut out = Vec::with_capacity(m);
    let mut acc = weights[0];
    let mut i = 0;
    for _ in 0..m {
        while u >= acc && i + 1 < m {
            i += 1;
            acc += weights[i];
        }
        out.push(i);
        u += step;
    }
    out
}
