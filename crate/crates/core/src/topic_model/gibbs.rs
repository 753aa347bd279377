use rand::Rng;
use statrs::function::gamma::ln_gamma;

use super::{LdaHyperParams, RowMatrix, TopicModel};
use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, ChainRng};

/// Collapsed Gibbs sampler state: per-token topic labels plus the three count tables.
#[derive(Debug, Clone)]
pub struct GibbsState {
    k: usize,
    n_vocab: usize,
    alpha: f64,
    eta: f64,
    /// Token ids per document.
    words: Vec<Vec<u32>>,
    /// Topic label per token, parallel to `words`.
    assignments: Vec<Vec<u32>>,
    doc_topic: RowMatrix<u32>,
    topic_word: RowMatrix<u32>,
    topic_totals: Vec<u32>,
}

impl GibbsState {
    /// Random initial labels drawn uniformly over topics.
    pub fn init(
        words: Vec<Vec<u32>>,
        n_vocab: usize,
        k: usize,
        alpha: f64,
        eta: f64,
        rng: &mut ChainRng,
    ) -> Self {
        let assignments: Vec<Vec<u32>> = words
            .iter()
            .map(|doc| doc.iter().map(|_| rng.random_range(0..k as u32)).collect())
            .collect();
        let mut state = Self {
            k,
            n_vocab,
            alpha,
            eta,
            doc_topic: RowMatrix::zeros(words.len(), k),
            topic_word: RowMatrix::zeros(k, n_vocab),
            topic_totals: vec![0; k],
            words,
            assignments,
        };
        state.recount();
        state
    }

    fn recount(&mut self) {
        let (dt, tw, tt) = self.tables_from_assignments();
        self.doc_topic = dt;
        self.topic_word = tw;
        self.topic_totals = tt;
    }

    fn tables_from_assignments(&self) -> (RowMatrix<u32>, RowMatrix<u32>, Vec<u32>) {
        let mut dt = RowMatrix::zeros(self.words.len(), self.k);
        let mut tw = RowMatrix::zeros(self.k, self.n_vocab);
        let mut tt = vec![0u32; self.k];
        for (d, (ws, zs)) in self.words.iter().zip(&self.assignments).enumerate() {
            for (&w, &z) in ws.iter().zip(zs) {
                dt[(d, z as usize)] += 1;
                tw[(z as usize, w as usize)] += 1;
                tt[z as usize] += 1;
            }
        }
        (dt, tw, tt)
    }

    /// Recounts the tables from the assignments and compares with the maintained tables.
    pub fn counts_consistent(&self) -> bool {
        let (dt, tw, tt) = self.tables_from_assignments();
        dt == self.doc_topic && tw == self.topic_word && tt == self.topic_totals
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.assignments
    }

    pub fn words(&self) -> &[Vec<u32>] {
        &self.words
    }

    pub fn doc_topic(&self) -> &RowMatrix<u32> {
        &self.doc_topic
    }

    pub fn topic_word(&self) -> &RowMatrix<u32> {
        &self.topic_word
    }

    pub fn topic_totals(&self) -> &[u32] {
        &self.topic_totals
    }

    /// One full sweep over every token.
    pub fn sweep(&mut self, rng: &mut ChainRng, probs: &mut Vec<f64>) {
        let k = self.k;
        let v_eta = self.n_vocab as f64 * self.eta;
        probs.resize(k, 0.0);
        for d in 0..self.words.len() {
            for i in 0..self.words[d].len() {
                let w = self.words[d][i] as usize;
                let old = self.assignments[d][i] as usize;
                self.doc_topic[(d, old)] -= 1;
                self.topic_word[(old, w)] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for (t, p) in probs.iter_mut().enumerate() {
                    total += (self.doc_topic[(d, t)] as f64 + self.alpha)
                        * (self.topic_word[(t, w)] as f64 + self.eta)
                        / (self.topic_totals[t] as f64 + v_eta);
                    *p = total;
                }
                let u = rng.random::<f64>() * total;
                let new = probs.iter().position(|&c| c > u).unwrap_or(k - 1);

                self.assignments[d][i] = new as u32;
                self.doc_topic[(d, new)] += 1;
                self.topic_word[(new, w)] += 1;
                self.topic_totals[new] += 1;
            }
        }
    }

    /// Collapsed log p(w | z) with the topic-word distributions integrated out.
    pub fn log_likelihood(&self) -> f64 {
        let v = self.n_vocab as f64;
        let mut ll = self.k as f64 * (ln_gamma(v * self.eta) - v * ln_gamma(self.eta));
        for t in 0..self.k {
            ll -= ln_gamma(self.topic_totals[t] as f64 + v * self.eta);
            ll += self
                .topic_word
                .row(t)
                .iter()
                .map(|&c| ln_gamma(c as f64 + self.eta))
                .sum::<f64>();
        }
        ll
    }

    fn accumulate(&self, beta: &mut RowMatrix<f64>, theta: &mut RowMatrix<f64>) {
        let v_eta = self.n_vocab as f64 * self.eta;
        for t in 0..self.k {
            let denom = self.topic_totals[t] as f64 + v_eta;
            for (b, &c) in beta.row_mut(t).iter_mut().zip(self.topic_word.row(t)) {
                *b += (c as f64 + self.eta) / denom;
            }
        }
        let k_alpha = self.k as f64 * self.alpha;
        for d in 0..self.words.len() {
            let denom = self.words[d].len() as f64 + k_alpha;
            for (th, &c) in theta.row_mut(d).iter_mut().zip(self.doc_topic.row(d)) {
                *th += (c as f64 + self.alpha) / denom;
            }
        }
    }
}

/// Trains LDA on `docs` over a vocabulary of `n_vocab` tokens.
pub fn gibbs_train(
    docs: &[Document],
    n_vocab: usize,
    hyper: &LdaHyperParams,
) -> Result<TopicModel> {
    gibbs_train_monitored(docs, n_vocab, hyper, 0, |_, _| {})
}

/// Like [`gibbs_train`], calling `monitor(sweep, log p(w|z))` every `every` sweeps
/// (never when `every == 0`).
pub fn gibbs_train_monitored(
    docs: &[Document],
    n_vocab: usize,
    hyper: &LdaHyperParams,
    every: usize,
    mut monitor: impl FnMut(usize, f64),
) -> Result<TopicModel> {
    hyper.validate()?;
    if docs.is_empty() {
        return Err(Error::InvalidInput("no training documents".into()));
    }
    if n_vocab == 0 {
        return Err(Error::InvalidInput("empty vocabulary".into()));
    }
    let words: Vec<Vec<u32>> = docs.iter().map(|d| d.counts.expand()).collect();
    if let Some(&w) = words.iter().flatten().find(|&&w| w as usize >= n_vocab) {
        return Err(Error::InvalidInput(format!(
            "token id {w} out of range for vocabulary of {n_vocab}"
        )));
    }

    let k = hyper.k;
    let burn_in = hyper.burn_in();
    let mut rng = stream_rng(hyper.seed, hyper.stream);
    let mut state = GibbsState::init(words, n_vocab, k, hyper.alpha(), hyper.eta, &mut rng);
    let mut beta = RowMatrix::zeros(k, n_vocab);
    let mut theta = RowMatrix::zeros(docs.len(), k);
    let mut n_samples = 0usize;
    let mut probs = Vec::with_capacity(k);

    for sweep in 1..=hyper.iters {
        state.sweep(&mut rng, &mut probs);
        if cfg!(debug_assertions) && sweep % 100 == 0 {
            debug_assert!(
                state.counts_consistent(),
                "count tables drifted at sweep {sweep}"
            );
        }
        if every > 0 && sweep % every == 0 {
            monitor(sweep, state.log_likelihood());
        }
        if sweep > burn_in && (sweep - burn_in).is_multiple_of(hyper.sample_lag) {
            state.accumulate(&mut beta, &mut theta);
            n_samples += 1;
        }
    }
    if n_samples == 0 {
        state.accumulate(&mut beta, &mut theta);
        n_samples = 1;
    }
    let scale = 1.0 / n_samples as f64;
    for m in [&mut beta, &mut theta] {
        for r in 0..m.rows() {
            let row = m.row_mut(r);
            row.iter_mut().for_each(|x| *x *= scale);
            // Renormalize away accumulated rounding.
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
    }
    Ok(TopicModel {
        hyper: hyper.clone(),
        beta,
        theta,
        state,
        n_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SparseCounts;

    fn doc(ids: &[u32]) -> Document {
        Document {
            id: String::new(),
            constitution_id: String::new(),
            position: 0,
            counts: SparseCounts::from_ids(ids.iter().copied()),
        }
    }

    fn small_hyper(k: usize) -> LdaHyperParams {
        LdaHyperParams {
            iters: 50,
            seed: 3,
            ..LdaHyperParams::new(k)
        }
    }

    #[test]
    fn single_topic_is_smoothed_frequency() {
        let docs = vec![doc(&[0, 0, 1]), doc(&[1, 2, 2, 2])];
        let h = small_hyper(1);
        let m = gibbs_train(&docs, 4, &h).unwrap();
        for r in m.theta.iter_rows() {
            assert_eq!(r, [1.0]);
        }
        let n = 7.0;
        let denom = n + 4.0 * h.eta;
        let expected = [
            (2.0 + h.eta) / denom,
            (2.0 + h.eta) / denom,
            (3.0 + h.eta) / denom,
            h.eta / denom,
        ];
        for (b, e) in m.beta.row(0).iter().zip(expected) {
            assert!((b - e).abs() < 1e-12, "{b} vs {e}");
        }
    }

    #[test]
    fn rows_are_distributions_and_counts_consistent() {
        let docs = vec![doc(&[0, 1, 2, 3]), doc(&[3, 3, 4]), doc(&[0, 0, 0, 1, 4])];
        let m = gibbs_train(&docs, 5, &small_hyper(3)).unwrap();
        for r in m.beta.iter_rows().chain(m.theta.iter_rows()) {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(r.iter().all(|&x| x > 0.0));
        }
        assert!(m.state.counts_consistent());
        assert_eq!(m.state.topic_totals().iter().sum::<u32>(), 12);
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let docs = vec![doc(&[0, 1, 2, 3, 1]), doc(&[3, 3, 4, 2])];
        let a = gibbs_train(&docs, 5, &small_hyper(2)).unwrap();
        let b = gibbs_train(&docs, 5, &small_hyper(2)).unwrap();
        assert_eq!(a.beta, b.beta);
        assert_eq!(a.theta, b.theta);
        assert_eq!(a.state.assignments(), b.state.assignments());
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut h = small_hyper(2);
        h.alpha = Some(-1.0);
        assert!(matches!(
            gibbs_train(&[doc(&[0])], 1, &h),
            Err(Error::InvalidHyper(_))
        ));
        assert!(gibbs_train(&[], 1, &small_hyper(2)).is_err());
        assert!(gibbs_train(&[doc(&[5])], 2, &small_hyper(2)).is_err());
    }
}
