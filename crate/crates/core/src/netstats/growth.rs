//! Continuous piecewise-linear growth fits with integer breakpoints.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseFit<T> {
    pub n_segments: usize,
    /// Interior breakpoints, ascending.
    pub breakpoints: Vec<T>,
    /// Slope of each segment, left to right.
    pub slopes: Vec<T>,
    /// Fitted value at the smallest x.
    pub start_value: T,
    pub start_x: T,
    pub sse: T,
    pub bic: T,
}

impl<T: Real> PiecewiseFit<T> {
    pub fn predict(&self, x: T) -> T {
        let mut y = self.start_value + self.slopes[0] * (x - self.start_x);
        for (k, &b) in self.breakpoints.iter().enumerate() {
            if x > b {
                y += (self.slopes[k + 1] - self.slopes[k]) * (x - b);
            }
        }
        y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit<T> {
    /// Best fit for each segment count 1..=n_max.
    pub candidates: Vec<PiecewiseFit<T>>,
    /// Index into `candidates` of the BIC-selected fit.
    pub selected: usize,
}

impl<T> GrowthFit<T> {
    pub fn best(&self) -> &PiecewiseFit<T> {
        &self.candidates[self.selected]
    }
}

/// Number of items with year at most y, for every integer year from the first to the last.
pub fn cumulative_counts(years: &[i32]) -> Vec<(i32, usize)> {
    let (Some(&lo), Some(&hi)) = (years.iter().min(), years.iter().max()) else {
        return Vec::new();
    };
    let mut sorted = years.to_vec();
    sorted.sort_unstable();
    (lo..=hi)
        .map(|y| (y, sorted.partition_point(|&v| v <= y)))
        .collect()
}

/// Suffix sums over points sorted by x.
struct Sums {
    xs: Vec<f64>,
    s0: Vec<f64>,
    s1: Vec<f64>,
    s2: Vec<f64>,
    sy: Vec<f64>,
    sxy: Vec<f64>,
    syy: f64,
}

impl Sums {
    fn new(xs: Vec<f64>, ys: &[f64]) -> Self {
        let n = xs.len();
        let mut s = Sums {
            s0: vec![0.0; n + 1],
            s1: vec![0.0; n + 1],
            s2: vec![0.0; n + 1],
            sy: vec![0.0; n + 1],
            sxy: vec![0.0; n + 1],
            syy: ys.iter().map(|y| y * y).sum(),
            xs,
        };
        for i in (0..n).rev() {
            let (x, y) = (s.xs[i], ys[i]);
            s.s0[i] = s.s0[i + 1] + 1.0;
            s.s1[i] = s.s1[i + 1] + x;
            s.s2[i] = s.s2[i + 1] + x * x;
            s.sy[i] = s.sy[i + 1] + y;
            s.sxy[i] = s.sxy[i + 1] + x * y;
        }
        s
    }

    /// Least-squares coefficients for the hinge basis `[1, x, (x - b_1)+, ...]` and the SSE
    /// they attain, from the normal equations.
    #[allow(clippy::needless_range_loop)]
    fn solve(&self, knots: &[f64]) -> Option<(Vec<f64>, f64)> {
        let p = knots.len() + 2;
        let first: Vec<usize> = knots
            .iter()
            .map(|&b| self.xs.partition_point(|&x| x <= b))
            .collect();
        let mut g = vec![vec![0.0; p]; p];
        let mut rhs = vec![0.0; p];
        g[0][0] = self.s0[0];
        g[0][1] = self.s1[0];
        g[1][1] = self.s2[0];
        rhs[0] = self.sy[0];
        rhs[1] = self.sxy[0];
        for (k, (&b, &i)) in knots.iter().zip(&first).enumerate() {
            g[0][k + 2] = self.s1[i] - b * self.s0[i];
            g[1][k + 2] = self.s2[i] - b * self.s1[i];
            rhs[k + 2] = self.sxy[i] - b * self.sy[i];
            for l in k..knots.len() {
                let (c, j) = (knots[l], first[l]);
                g[k + 2][l + 2] = self.s2[j] - (b + c) * self.s1[j] + b * c * self.s0[j];
            }
        }
        for i in 0..p {
            for j in 0..i {
                g[i][j] = g[j][i];
            }
        }
        let beta = cholesky_solve(g, &rhs)?;
        let fitted: f64 = beta.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        Some((beta, self.syy - fitted))
    }
}

#[allow(clippy::needless_range_loop)]
fn cholesky_solve(mut a: Vec<Vec<f64>>, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(1.0);
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if d <= 1e-12 * scale {
            return None;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| a[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / a[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / a[i][i];
    }
    Some(x)
}

/// Minimum number of data points in every segment.
const MIN_SEGMENT_POINTS: usize = 2;

/// Fits continuous piecewise-linear curves with 1..=`n_max` segments by exact least squares
/// over every admissible set of integer breakpoints, then selects the segment count by BIC
/// (`N ln(SSE/N) + 2n ln N`, counting n + 1 line parameters and n - 1 breakpoints).
pub fn piecewise_growth<T: Real>(points: &[(T, T)], n_max: usize) -> Result<GrowthFit<T>> {
    if n_max == 0 {
        return Err(Error::config("stats.growth_n_max", "must be at least 1"));
    }
    if points.len() < 2 * (n_max + 1) {
        return Err(Error::InvalidInput(format!(
            "{} points are too few for up to {n_max} segments",
            points.len()
        )));
    }
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .map(|(x, y)| (x.as_f64(), y.as_f64()))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let x0 = pts[0].0;
    let x_last = pts[pts.len() - 1].0;
    let xs: Vec<f64> = pts.iter().map(|p| p.0 - x0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let sums = Sums::new(xs.clone(), &ys);
    let n_obs = pts.len() as f64;
    let y_mean = ys.iter().sum::<f64>() / n_obs;
    let sst: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let sse_floor = 1e-12 * sst + f64::MIN_POSITIVE;

    // Integer breakpoints strictly inside the x range, in shifted coordinates.
    let candidates: Vec<f64> = ((x0.floor() as i64 + 1)..=(x_last.ceil() as i64 - 1))
        .map(|b| b as f64)
        .filter(|&b| b > x0 && b < x_last)
        .map(|b| b - x0)
        .collect();
    let count_le = |b: f64| xs.partition_point(|&x| x <= b);

    let mut fits = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        let mut knots = Vec::with_capacity(n - 1);
        search(
            &candidates,
            &count_le,
            xs.len(),
            n - 1,
            0,
            &mut knots,
            &mut |knots| {
                if let Some((beta, sse)) = sums.solve(knots) {
                    if best.as_ref().is_none_or(|(b, _, _)| sse < *b) {
                        best = Some((sse, knots.to_vec(), beta));
                    }
                }
            },
        );
        let Some((_, knots, beta)) = best else {
            break;
        };
        let mut slopes = vec![beta[1]];
        for c in &beta[2..] {
            slopes.push(slopes.last().expect("non-empty") + c);
        }
        let sse: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let mut f = beta[0] + beta[1] * x;
                for (k, &b) in knots.iter().enumerate() {
                    f += beta[k + 2] * (x - b).max(0.0);
                }
                (y - f).powi(2)
            })
            .sum();
        let bic = n_obs * (sse.max(sse_floor) / n_obs).ln() + 2.0 * n as f64 * n_obs.ln();
        fits.push(PiecewiseFit {
            n_segments: n,
            breakpoints: knots.iter().map(|&b| T::lit(b + x0)).collect(),
            slopes: slopes.into_iter().map(T::lit).collect(),
            start_value: T::lit(beta[0]),
            start_x: T::lit(x0),
            sse: T::lit(sse),
            bic: T::lit(bic),
        });
    }
    let selected = fits
        .iter()
        .enumerate()
        .min_by(|a, b| {
            a.1.bic
                .partial_cmp(&b.1.bic)
                .expect("finite BIC")
                .then(a.0.cmp(&b.0))
        })
        .map(|(i, _)| i)
        .expect("the one-segment fit always exists");
    Ok(GrowthFit {
        candidates: fits,
        selected,
    })
}

/// Enumerates ascending knot sets of size `remaining` from `candidates[from..]` such that
/// every segment keeps at least `MIN_SEGMENT_POINTS` points.
fn search(
    candidates: &[f64],
    count_le: &dyn Fn(f64) -> usize,
    n_points: usize,
    remaining: usize,
    from: usize,
    knots: &mut Vec<f64>,
    visit: &mut dyn FnMut(&[f64]),
) {
    let prev_count = knots.last().map_or(0, |&b| count_le(b));
    if remaining == 0 {
        if n_points - prev_count >= MIN_SEGMENT_POINTS {
            visit(knots);
        }
        return;
    }
    for i in from..candidates.len() {
        let b = candidates[i];
        let c = count_le(b);
        if c - prev_count < MIN_SEGMENT_POINTS {
            continue;
        }
        if n_points - c < MIN_SEGMENT_POINTS * remaining {
            break;
        }
        knots.push(b);
        search(
            candidates,
            count_le,
            n_points,
            remaining - 1,
            i + 1,
            knots,
            visit,
        );
        knots.pop();
    }
}
