//! Maximum-likelihood fits of degree distributions.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FitParams<T> {
    Gaussian {
        mu: T,
        sigma: T,
    },
    Poisson {
        lambda_rate: T,
    },
    /// `P(X = x) = C(x + r - 1, x) p^r (1 - p)^x`, real `r > 0`.
    NegativeBinomial {
        r: T,
        p: T,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult<T> {
    #[serde(flatten)]
    pub params: FitParams<T>,
    pub loglik: T,
    pub n: usize,
    pub aic: T,
    pub bic: T,
}

impl<T: Real> FitResult<T> {
    fn new(params: FitParams<T>, loglik: f64, n: usize) -> Self {
        let k = match params {
            FitParams::Poisson { .. } => 1.0,
            _ => 2.0,
        };
        Self {
            params,
            loglik: T::lit(loglik),
            n,
            aic: T::lit(2.0 * k - 2.0 * loglik),
            bic: T::lit(k * (n as f64).ln() - 2.0 * loglik),
        }
    }

    pub fn family(&self) -> &'static str {
        match self.params {
            FitParams::Gaussian { .. } => "gaussian",
            FitParams::Poisson { .. } => "poisson",
            FitParams::NegativeBinomial { .. } => "negative_binomial",
        }
    }
}

fn require_two(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    Ok(())
}

/// Gaussian MLE: sample mean and the standard deviation with divisor n.
pub fn fit_gaussian<T: Real>(samples: &[T]) -> Result<FitResult<T>> {
    require_two(samples.len())?;
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|x| x.as_f64()).collect();
    let mu = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return Err(Error::DegenerateSample("zero variance".into()));
    }
    let sigma = var.sqrt();
    let loglik = -0.5 * n * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * n;
    Ok(FitResult::new(
        FitParams::Gaussian {
            mu: T::lit(mu),
            sigma: T::lit(sigma),
        },
        loglik,
        samples.len(),
    ))
}

fn histogram(counts: &[u64]) -> BTreeMap<u64, usize> {
    let mut h = BTreeMap::new();
    for &c in counts {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}

/// Poisson MLE: the sample mean.
pub fn fit_poisson<T: Real>(counts: &[u64]) -> Result<FitResult<T>> {
    require_two(counts.len())?;
    let n = counts.len() as f64;
    let lambda = counts.iter().sum::<u64>() as f64 / n;
    if lambda <= 0.0 {
        return Err(Error::DegenerateSample("all counts are zero".into()));
    }
    let loglik = histogram(counts)
        .into_iter()
        .map(|(x, c)| c as f64 * (x as f64 * lambda.ln() - lambda - ln_gamma(x as f64 + 1.0)))
        .sum();
    Ok(FitResult::new(
        FitParams::Poisson {
            lambda_rate: T::lit(lambda),
        },
        loglik,
        counts.len(),
    ))
}

pub fn negbin_loglik(counts: &[u64], r: f64, p: f64) -> f64 {
    histogram(counts)
        .into_iter()
        .map(|(x, c)| {
            let x = x as f64;
            c as f64
                * (ln_gamma(x + r) - ln_gamma(r) - ln_gamma(x + 1.0)
                    + r * p.ln()
                    + x * (1.0 - p).ln())
        })
        .sum()
}

/// Negative-binomial MLE by profile likelihood: for a given `r` the optimal `p` is
/// `r / (r + mean)`, and `r` solves the profile score
/// `sum psi(x_i + r) - n psi(r) + n ln(r / (r + mean)) = 0`, located by bracketing and
/// bisection in `ln r`.
pub fn fit_negbin<T: Real>(counts: &[u64]) -> Result<FitResult<T>> {
    require_two(counts.len())?;
    let n = counts.len() as f64;
    let hist = histogram(counts);
    let mean = counts.iter().sum::<u64>() as f64 / n;
    if mean <= 0.0 {
        return Err(Error::DegenerateSample("all counts are zero".into()));
    }
    let var = hist
        .iter()
        .map(|(&x, &c)| c as f64 * (x as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    if var <= 0.0 {
        return Err(Error::DegenerateSample("zero variance".into()));
    }
    if var <= mean {
        return Err(Error::DegenerateSample(format!(
            "sample is not overdispersed (variance {var:.4} <= mean {mean:.4}); the MLE of r is infinite"
        )));
    }
    let score = |r: f64| -> f64 {
        let s: f64 = hist
            .iter()
            .map(|(&x, &c)| c as f64 * (digamma(x as f64 + r) - digamma(r)))
            .sum();
        s + n * (r / (r + mean)).ln()
    };

    let moment = mean * mean / (var - mean);
    let (mut lo, mut hi) = (moment, moment);
    while score(lo) <= 0.0 {
        lo /= 2.0;
        if lo < 1e-12 {
            return Err(Error::DegenerateSample(
                "profile score has no positive bracket".into(),
            ));
        }
    }
    while score(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::DegenerateSample(
                "negative-binomial r diverges".into(),
            ));
        }
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if score(mid.exp()) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    let r = (0.5 * (a + b)).exp();
    let p = r / (r + mean);
    Ok(FitResult::new(
        FitParams::NegativeBinomial {
            r: T::lit(r),
            p: T::lit(p),
        },
        negbin_loglik(counts, r, p),
        counts.len(),
    ))
}
