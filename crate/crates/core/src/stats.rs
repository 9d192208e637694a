//! Reductions over replicate datasets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("bin edges must be strictly increasing and at least two")]
    BadEdges,
    #[error("inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("correlation is undefined: an input has zero variance")]
    UndefinedCorrelation,
    #[error("regressor has zero variance")]
    DegenerateRegressor,
    #[error("share {0} is outside [0, 1]")]
    ShareOutOfRange(f64),
    #[error("expected probabilities must be positive and sum to 1")]
    BadExpected,
}

/// Counts of `values` in the bins `[e_i, e_{i+1})`; the last bin is closed.
/// Values outside `[e_0, e_last]` (and NaN) are not counted.
pub fn histogram(values: &[f64], edges: &[f64]) -> Result<Vec<u64>, StatsError> {
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(StatsError::BadEdges);
    }
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut counts = vec![0u64; bins];
    for &v in values {
        if !(v >= lo && v <= hi) {
            continue;
        }
        let bin = (edges.partition_point(|&e| e <= v) - 1).min(bins - 1);
        counts[bin] += 1;
    }
    Ok(counts)
}

/// `bins + 1` evenly spaced edges from `lo` to `hi`.
pub fn equal_width_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = (hi - lo) / bins as f64;
    (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect()
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let mu = mean(values);
    values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// A fitted line `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points_used: usize,
}

/// Ordinary least squares of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<SlopeFit, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            got: x.len(),
        });
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    if sxx == 0.0 {
        return Err(StatsError::DegenerateRegressor);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual_rms: (sse / x.len() as f64).sqrt(),
        points_used: x.len(),
    })
}

/// Party-1 summary of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub popular_share: f64,
    pub seat_share: f64,
    pub district1_share: f64,
    pub north_share: f64,
    pub south_share: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub district_shares: Option<Vec<f64>>,
}

impl ReplicateRow {
    fn shares(&self) -> impl Iterator<Item = f64> + '_ {
        [
            self.popular_share,
            self.seat_share,
            self.district1_share,
            self.north_share,
            self.south_share,
        ]
        .into_iter()
        .chain(self.district_shares.iter().flatten().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateDataset {
    rows: Vec<ReplicateRow>,
}

impl ReplicateDataset {
    pub fn new(rows: Vec<ReplicateRow>) -> Result<Self, StatsError> {
        if rows.is_empty() {
            return Err(StatsError::TooFewPoints { needed: 1, got: 0 });
        }
        if let Some(bad) = rows
            .iter()
            .flat_map(|r| r.shares())
            .find(|s| !(0.0..=1.0).contains(s))
        {
            return Err(StatsError::ShareOutOfRange(bad));
        }
        Ok(ReplicateDataset { rows })
    }

    pub fn rows(&self) -> &[ReplicateRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn popular_shares(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.popular_share).collect()
    }

    pub fn seat_shares(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.seat_share).collect()
    }

    pub fn district1_shares(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.district1_share).collect()
    }

    pub fn north_shares(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.north_share).collect()
    }

    pub fn south_shares(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.south_share).collect()
    }

    /// Correlation of party-1 share between the north and south regions.
    pub fn north_south_correlation(&self) -> Result<f64, StatsError> {
        pearson(&self.north_shares(), &self.south_shares())
    }
}

/// OLS of seat share on popular share over replicates whose popular share
/// is within `halfwidth` of ½. `halfwidth = 1` uses every replicate.
pub fn central_slope_fit(data: &ReplicateDataset, halfwidth: f64) -> Result<SlopeFit, StatsError> {
    let (x, y): (Vec<f64>, Vec<f64>) = data
        .rows()
        .iter()
        .filter(|r| (r.popular_share - 0.5).abs() <= halfwidth)
        .map(|r| (r.popular_share, r.seat_share))
        .unzip();
    ols(&x, &y)
}

fn logit(v: f64) -> f64 {
    (v / (1.0 - v)).ln()
}

/// Exponent `k` of `y/(1-y) = (x/(1-x))^k`, by least squares of `logit y`
/// on `logit x` through the origin. Points with either coordinate at 0 or 1
/// are skipped.
pub fn cube_exponent_fit_points(points: &[(f64, f64)]) -> Result<f64, StatsError> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *x < 1.0 && *y > 0.0 && *y < 1.0)
        .map(|&(x, y)| (logit(x), logit(y)))
        .collect();
    if usable.len() < 2 {
        return Err(StatsError::TooFewPoints {
            needed: 2,
            got: usable.len(),
        });
    }
    let sxx: f64 = usable.iter().map(|(lx, _)| lx * lx).sum();
    if sxx == 0.0 {
        return Err(StatsError::DegenerateRegressor);
    }
    let sxy: f64 = usable.iter().map(|(lx, ly)| lx * ly).sum();
    Ok(sxy / sxx)
}

pub fn cube_exponent_fit(data: &ReplicateDataset) -> Result<f64, StatsError> {
    let points: Vec<(f64, f64)> = data
        .rows()
        .iter()
        .map(|r| (r.popular_share, r.seat_share))
        .collect();
    cube_exponent_fit_points(&points)
}

/// District-level change between two elections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwingRecord {
    pub original_district_share: f64,
    pub local_swing: f64,
    pub national_swing: f64,
}

/// OLS of `local − national` swing on the original district share. A flat
/// line is what uniform swing predicts.
pub fn swing_regression(records: &[SwingRecord]) -> Result<SlopeFit, StatsError> {
    let x: Vec<f64> = records.iter().map(|r| r.original_district_share).collect();
    let y: Vec<f64> = records
        .iter()
        .map(|r| r.local_swing - r.national_swing)
        .collect();
    ols(&x, &y)
}

/// One-sample Kolmogorov–Smirnov statistic
/// `D = max_i max(i/n − F(x_(i)), F(x_(i)) − (i−1)/n)`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / n) - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of the one-sample KS statistic at level `alpha`,
/// `sqrt(-ln(alpha/2) / 2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Pearson chi-square statistic of observed counts against expected
/// probabilities, with adjacent cells pooled (left to right) until each
/// pooled cell expects at least `min_expected`. Returns the statistic and
/// the number of pooled cells.
pub fn chi_square_pooled(
    observed: &[u64],
    expected_probs: &[f64],
    min_expected: f64,
) -> Result<(f64, usize), StatsError> {
    if observed.len() != expected_probs.len() {
        return Err(StatsError::LengthMismatch(observed.len(), expected_probs.len()));
    }
    if expected_probs.iter().any(|&p| p < 0.0)
        || (expected_probs.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(StatsError::BadExpected);
    }
    let n = observed.iter().sum::<u64>() as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(expected_probs) {
        obs += o as f64;
        exp += p * n;
        if exp >= min_expected {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => cells.push((obs, exp)),
        }
    }
    let stat = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    Ok((stat, cells.len()))
}
