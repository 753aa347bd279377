//! The Yule pure-birth process: closed-form offspring distribution and exact simulation.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng::{item_rng, SIMULATION_STREAM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YuleParams<T> {
    /// Per-capita birth rate, per year.
    pub lambda_rate: T,
    pub n0: u64,
    /// Elapsed time in years.
    pub t: T,
}

impl<T: Real> YuleParams<T> {
    pub fn new(lambda_rate: T, n0: u64, t: T) -> Result<Self> {
        let p = Self { lambda_rate, n0, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_rate > T::zero() && self.lambda_rate.is_finite()) {
            return Err(Error::Domain(format!(
                "lambda_rate must be positive, got {}",
                self.lambda_rate
            )));
        }
        if self.n0 == 0 {
            return Err(Error::Domain("n0 must be at least 1".into()));
        }
        if !(self.t >= T::zero() && self.t.is_finite()) {
            return Err(Error::Domain(format!(
                "t must be non-negative, got {}",
                self.t
            )));
        }
        Ok(())
    }
}

/// `P_n(t) = C(n-1, n-n0) e^{-lambda n0 t} (1 - e^{-lambda t})^{n-n0}`, evaluated in log space.
pub fn yule_pmf<T: Real>(n: u64, params: &YuleParams<T>) -> Result<T> {
    params.validate()?;
    if n < params.n0 {
        return Err(Error::Domain(format!(
            "n = {n} is below n0 = {}",
            params.n0
        )));
    }
    let lt = params.lambda_rate.as_f64() * params.t.as_f64();
    let extra = n - params.n0;
    if extra == 0 {
        return Ok(T::lit((-lt * params.n0 as f64).exp()));
    }
    if lt == 0.0 {
        return Ok(T::zero());
    }
    let log_q = (-(-lt).exp_m1()).ln();
    let log_p = ln_binomial(n - 1, extra) - lt * params.n0 as f64 + extra as f64 * log_q;
    Ok(T::lit(log_p.exp()))
}

/// `n0 e^{lambda t}`.
pub fn yule_mean<T: Real>(params: &YuleParams<T>) -> T {
    T::lit(params.n0 as f64 * (params.lambda_rate.as_f64() * params.t.as_f64()).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct YuleSimulation {
    pub trials: usize,
    /// Population size at time t, and how many trials ended there.
    pub counts: BTreeMap<u64, usize>,
}

impl YuleSimulation {
    pub fn mean(&self) -> f64 {
        self.counts
            .iter()
            .map(|(&n, &c)| n as f64 * c as f64)
            .sum::<f64>()
            / self.trials as f64
    }

    pub fn frequency(&self, n: u64) -> f64 {
        self.counts.get(&n).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    /// Total-variation distance to the closed-form pmf. Mass beyond the largest simulated
    /// size is accounted for through the pmf's complement.
    pub fn tv_distance<T: Real>(&self, params: &YuleParams<T>) -> Result<f64> {
        let max_n = self.counts.keys().next_back().copied().unwrap_or(params.n0);
        let mut diff = 0.0;
        let mut covered = 0.0;
        for n in params.n0..=max_n {
            let p = yule_pmf(n, params)?.as_f64();
            covered += p;
            diff += (self.frequency(n) - p).abs();
        }
        diff += (1.0 - covered).max(0.0);
        Ok(0.5 * diff)
    }
}

/// Simulates the birth process to time `t` once per trial. While the population is `n`, the
/// next birth arrives after an exponential wait with rate `n * lambda`. Each trial draws from
/// its own stream, so results do not depend on thread count.
pub fn simulate_yule<T: Real>(
    params: &YuleParams<T>,
    trials: usize,
    seed: u64,
) -> Result<YuleSimulation> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let lambda = params.lambda_rate.as_f64();
    let t_end = params.t.as_f64();
    let finals: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = item_rng(seed, SIMULATION_STREAM, i as u64);
            let mut n = params.n0;
            let mut t = 0.0;
            loop {
                let u: f64 = rng.random();
                t += -(-u).ln_1p() / (n as f64 * lambda);
                if t > t_end {
                    return n;
                }
                n += 1;
            }
        })
        .collect();
    let mut counts = BTreeMap::new();
    for n in finals {
        *counts.entry(n).or_insert(0) += 1;
    }
    Ok(YuleSimulation { trials, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let p = YuleParams::new(std::f64::consts::LN_2, 1, 1.0).unwrap();
        assert!((yule_pmf(1, &p).unwrap() - 0.5).abs() < 1e-15);
        assert!((yule_pmf(2, &p).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            yule_pmf(1, &YuleParams::new(1.0, 2, 1.0).unwrap()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn time_zero_is_point_mass() {
        let p = YuleParams::new(0.3, 3, 0.0).unwrap();
        assert_eq!(yule_pmf(3, &p).unwrap(), 1.0);
        assert_eq!(yule_pmf(4, &p).unwrap(), 0.0);
        let sim = simulate_yule(&p, 50, 1).unwrap();
        assert_eq!(sim.counts, BTreeMap::from([(3, 50)]));
    }

    #[test]
    fn pmf_sums_to_one_for_several_n0() {
        for n0 in [1, 2, 5] {
            let p = YuleParams::new(0.2, n0, 4.0).unwrap();
            let mut total = 0.0f64;
            let mut n = n0;
            loop {
                let v = yule_pmf(n, &p).unwrap();
                total += v;
                if v < 1e-16 && n > n0 + 10 {
                    break;
                }
                n += 1;
            }
            assert!((total - 1.0).abs() < 1e-9, "n0 = {n0}: {total}");
        }
    }

    #[test]
    fn invalid_params() {
        assert!(YuleParams::new(0.0, 1, 1.0).is_err());
        assert!(YuleParams::new(1.0, 0, 1.0).is_err());
        assert!(YuleParams::new(1.0, 1, -1.0).is_err());
    }
}
