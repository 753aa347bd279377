use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TopicModel;
use crate::corpus::{Document, Vocabulary};
use crate::error::Result;
use crate::fsutil;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub k: usize,
    pub alpha: f64,
    pub eta: f64,
    pub iters: usize,
    pub burn_in: usize,
    pub sample_lag: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub n_documents: usize,
    pub n_vocab: usize,
    pub vocabulary_sha256: String,
    pub final_log_likelihood: f64,
}

impl ModelMeta {
    pub fn new(model: &TopicModel, vocab: &Vocabulary) -> Self {
        Self {
            k: model.n_topics(),
            alpha: model.alpha(),
            eta: model.hyper.eta,
            iters: model.hyper.iters,
            burn_in: model.hyper.burn_in(),
            sample_lag: model.hyper.sample_lag,
            n_samples: model.n_samples,
            seed: model.hyper.seed,
            n_documents: model.theta.rows(),
            n_vocab: model.n_vocab(),
            vocabulary_sha256: fsutil::sha256_hex(vocab.tokens().join("\n").as_bytes()),
            final_log_likelihood: model.state.log_likelihood(),
        }
    }
}

pub fn write_model_json(path: &Path, meta: &ModelMeta) -> Result<()> {
    fsutil::write_json(path, meta)
}

#[derive(Debug, Serialize)]
struct BetaRow<'a> {
    topic: usize,
    token: &'a str,
    probability: f64,
}

/// Writes the `top_n` most probable tokens of every topic (all tokens when `top_n` is 0).
pub fn write_beta(path: &Path, model: &TopicModel, vocab: &Vocabulary, top_n: usize) -> Result<()> {
    let mut rows = Vec::new();
    for (t, row) in model.beta.iter_rows().enumerate() {
        let mut order: Vec<usize> = (0..row.len()).collect();
        order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        let n = if top_n == 0 {
            row.len()
        } else {
            top_n.min(row.len())
        };
        for &w in &order[..n] {
            rows.push(BetaRow {
                topic: t,
                token: vocab.token(w as u32).unwrap_or("?"),
                probability: row[w],
            });
        }
    }
    fsutil::write_csv(path, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub document_id: String,
    pub topic: usize,
    pub proportion: f64,
}

pub fn write_theta(path: &Path, model: &TopicModel, docs: &[Document]) -> Result<()> {
    let rows = docs
        .iter()
        .zip(model.theta.iter_rows())
        .flat_map(|(d, row)| {
            row.iter().enumerate().map(|(t, &p)| ThetaRow {
                document_id: d.id.clone(),
                topic: t,
                proportion: p,
            })
        });
    fsutil::write_csv(path, rows)
}

pub fn read_theta(path: &Path) -> Result<Vec<ThetaRow>> {
    fsutil::read_csv(path)
}
