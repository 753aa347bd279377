//! Latent Dirichlet allocation trained by collapsed Gibbs sampling, with a left-to-right
//! held-out likelihood estimator and K selection by cross-validation.

mod cv;
mod gibbs;
mod heldout;
mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cv::{assign_folds, cross_validate, CvConfig, CvResult, KScore};
pub use gibbs::{gibbs_train, gibbs_train_monitored, GibbsState};
pub use heldout::{heldout_loglik, HeldOutConfig, HeldOutScore};
pub use io::{read_theta, write_beta, write_model_json, write_theta, ModelMeta, ThetaRow};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RowMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy + Default> RowMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }
}

impl<T> RowMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        let n = rows.len();
        Ok(Self {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.rows).map(move |i| self.row(i))
    }
}

impl<T> std::ops::Index<(usize, usize)> for RowMatrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for RowMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaHyperParams {
    /// Number of topics.
    pub k: usize,
    /// Symmetric Dirichlet prior on document-topic proportions. `None` means `50 / k`.
    pub alpha: Option<f64>,
    /// Symmetric Dirichlet prior on topic-word distributions.
    pub eta: f64,
    /// Total Gibbs sweeps.
    pub iters: usize,
    /// Sweeps discarded before posterior averaging. `None` means 20% of `iters`.
    pub burn_in: Option<usize>,
    /// Sweeps between retained samples after burn-in.
    pub sample_lag: usize,
    pub seed: u64,
    /// ChaCha stream id; see [`crate::rng`].
    #[serde(default)]
    pub stream: u64,
}

impl LdaHyperParams {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            alpha: None,
            eta: 0.01,
            iters: 10_000,
            burn_in: None,
            sample_lag: 10,
            seed: 0,
            stream: 0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k as f64)
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.iters / 5)
    }

    /// Same settings for a different topic count. An unset alpha keeps following `50 / k`.
    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidHyper("k must be at least 1".into()));
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidHyper(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidHyper(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if self.iters <= self.burn_in() {
            return Err(Error::InvalidHyper(format!(
                "iters ({}) must exceed burn_in ({})",
                self.iters,
                self.burn_in()
            )));
        }
        if self.sample_lag == 0 {
            return Err(Error::InvalidHyper("sample_lag must be at least 1".into()));
        }
        Ok(())
    }
}

/// A trained topic model.
#[derive(Debug, Clone)]
pub struct TopicModel {
    pub hyper: LdaHyperParams,
    /// K x V posterior-mean topic-word probabilities.
    pub beta: RowMatrix<f64>,
    /// D x K posterior-mean document-topic proportions, rows in training-document order.
    pub theta: RowMatrix<f64>,
    /// Final sampler state (assignments and count tables).
    pub state: GibbsState,
    /// Number of post-burn-in samples averaged into `beta` and `theta`.
    pub n_samples: usize,
}

impl TopicModel {
    pub fn n_topics(&self) -> usize {
        self.beta.rows()
    }

    pub fn n_vocab(&self) -> usize {
        self.beta.cols()
    }

    pub fn alpha(&self) -> f64 {
        self.hyper.alpha()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hyper_defaults() {
        let h = LdaHyperParams::new(5);
        assert_eq!(h.alpha(), 10.0);
        assert_eq!(h.eta, 0.01);
        assert_eq!(h.burn_in(), 2000);
        assert!(h.validate().is_ok());
        assert_eq!(h.with_k(10).alpha(), 5.0);
    }

    #[test]
    fn hyper_validation() {
        let mut h = LdaHyperParams::new(2);
        h.alpha = Some(0.0);
        assert!(matches!(h.validate(), Err(Error::InvalidHyper(_))));
        let mut h = LdaHyperParams::new(2);
        h.eta = -1.0;
        assert!(matches!(h.validate(), Err(Error::InvalidHyper(_))));
        let mut h = LdaHyperParams::new(2);
        h.burn_in = Some(h.iters);
        assert!(h.validate().is_err());
        assert!(LdaHyperParams::new(0).validate().is_err());
    }
}
