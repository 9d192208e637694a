//! Exact distributions and seat–vote curves.
//!
//! Everything here is deterministic and used to check the sampler: the
//! Pólya (Dirichlet-multinomial) law of a single urn, brute-force
//! enumeration of the multi-urn process for tiny instances, integer-parameter
//! Beta CDFs for the limiting district shares, and the seat–vote curves of
//! the cube law and of independent uniform districts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, SimulationConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("argument {0} is outside the domain")]
    OutOfDomain(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("counts sum to {found}, expected {expected}")]
    CountsMismatch { expected: u64, found: u64 },
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// CDF of Beta(a, b) for integer `a, b ≥ 1`:
/// `I_x(a, b) = Σ_{j=a}^{a+b-1} C(a+b-1, j) x^j (1-x)^{a+b-1-j}`.
pub fn beta_cdf_int(a: u32, b: u32, x: f64) -> Result<f64, AnalyticError> {
    if a == 0 || b == 0 {
        return Err(AnalyticError::InvalidParameter(format!(
            "Beta parameters must be positive integers, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(AnalyticError::OutOfDomain(x));
    }
    let n = a + b - 1;
    let mut sum = 0.0;
    for j in a..=n {
        sum += binomial(n, j) * x.powi(j as i32) * (1.0 - x).powi((n - j) as i32);
    }
    Ok(sum.clamp(0.0, 1.0))
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

fn ln_rising(a: u64, len: u64) -> f64 {
    (0..len).map(|j| ((a + j) as f64).ln()).sum()
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Probability that `n` draws from a single urn with initial counts `a`
/// (each drawn ball returned with one more of its colour) add exactly
/// `counts` balls of each colour.
///
/// Colours with `a_i = 0` are allowed; they can never be drawn.
pub fn dirichlet_multinomial_pmf(a: &[u64], n: u64, counts: &[u64]) -> Result<f64, AnalyticError> {
    if a.len() != counts.len() {
        return Err(AnalyticError::InvalidParameter(format!(
            "{} initial counts but {} observed counts",
            a.len(),
            counts.len()
        )));
    }
    let total_a: u64 = a.iter().sum();
    if total_a == 0 {
        return Err(AnalyticError::InvalidParameter("urn starts empty".into()));
    }
    let found: u64 = counts.iter().sum();
    if found != n {
        return Err(AnalyticError::CountsMismatch { expected: n, found });
    }
    let mut ln_p = ln_factorial(n) - ln_rising(total_a, n);
    for (&ai, &ci) in a.iter().zip(counts) {
        if ai == 0 && ci > 0 {
            return Ok(0.0);
        }
        ln_p += ln_rising(ai, ci) - ln_factorial(ci);
    }
    Ok(ln_p.exp())
}

/// A finite distribution over row-major count matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPmf {
    pub support: Vec<Vec<u64>>,
    pub probabilities: Vec<f64>,
}

impl ExactPmf {
    fn from_map(map: BTreeMap<Vec<u64>, f64>) -> Self {
        let (support, probabilities) = map.into_iter().unzip();
        ExactPmf {
            support,
            probabilities,
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn probability_of(&self, state: &[u64]) -> f64 {
        self.support
            .iter()
            .position(|s| s.as_slice() == state)
            .map_or(0.0, |i| self.probabilities[i])
    }

    /// Distribution of the counts in columns `range` (e.g. one district's row).
    pub fn marginal(&self, range: std::ops::Range<usize>) -> ExactPmf {
        let mut map = BTreeMap::new();
        for (s, &p) in self.support.iter().zip(&self.probabilities) {
            *map.entry(s[range.clone()].to_vec()).or_insert(0.0) += p;
        }
        ExactPmf::from_map(map)
    }

    /// Total variation distance to the empirical distribution of `observed`
    /// (state → number of occurrences).
    pub fn total_variation<'a, I>(&self, observed: I) -> f64
    where
        I: IntoIterator<Item = (&'a Vec<u64>, &'a u64)>,
    {
        let observed: BTreeMap<&Vec<u64>, u64> = observed.into_iter().map(|(k, &v)| (k, v)).collect();
        let samples: u64 = observed.values().sum();
        let mut dist = 0.0;
        for (s, &p) in self.support.iter().zip(&self.probabilities) {
            let f = observed.get(s).copied().unwrap_or(0) as f64 / samples as f64;
            dist += (p - f).abs();
        }
        for (s, &count) in &observed {
            if self.support.binary_search(s).is_err() {
                dist += count as f64 / samples as f64;
            }
        }
        dist / 2.0
    }
}

pub const MAX_ENUM_DISTRICTS: usize = 3;
pub const MAX_ENUM_COLOURS: usize = 3;
pub const MAX_ENUM_STEPS: u32 = 8;

/// Exact distribution of the count matrix after `n_steps` steps of the
/// multi-urn process, by summing path probabilities over the event tree
/// (target urn × source urn × colour).
pub fn enumerate_multiurn(config: &SimulationConfig, n_steps: u32) -> Result<ExactPmf, AnalyticError> {
    if config.num_districts > MAX_ENUM_DISTRICTS
        || config.num_colours > MAX_ENUM_COLOURS
        || n_steps > MAX_ENUM_STEPS
    {
        return Err(AnalyticError::TooLarge(format!(
            "N={} m={} steps={} (limits N<={MAX_ENUM_DISTRICTS}, m<={MAX_ENUM_COLOURS}, steps<={MAX_ENUM_STEPS})",
            config.num_districts, config.num_colours, n_steps
        )));
    }
    config.validate()?;
    let n = config.num_districts;
    let m = config.num_colours;
    let p = config.imitation_prob;
    let k = config.reinforcement;

    let mut current = BTreeMap::new();
    current.insert(config.initial_allocation.expand(), 1.0);
    for _ in 0..n_steps {
        let mut next: BTreeMap<Vec<u64>, f64> = BTreeMap::new();
        for (state, &prob) in &current {
            for target in 0..n {
                for source in 0..n {
                    let source_prob = if n == 1 {
                        1.0
                    } else if source == target {
                        1.0 - p
                    } else {
                        p / (n - 1) as f64
                    };
                    if source_prob == 0.0 {
                        continue;
                    }
                    let row = &state[source * m..(source + 1) * m];
                    let row_total: u64 = row.iter().sum();
                    for (colour, &count) in row.iter().enumerate() {
                        if count == 0 {
                            continue;
                        }
                        let path = prob / n as f64 * source_prob * count as f64 / row_total as f64;
                        let mut after = state.clone();
                        after[target * m + colour] += k;
                        *next.entry(after).or_insert(0.0) += path;
                    }
                }
            }
        }
        current = next;
    }
    Ok(ExactPmf::from_map(current))
}

/// `x^k / (x^k + (1-x)^k)`, the seat share implied by the cube law with exponent `k`.
pub fn cube_curve(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    1.0 / (1.0 + ((1.0 - x) / x).powf(k))
}

/// Expected seat share at popular vote `x` for two equal districts with
/// independent Uniform[0,1] vote shares.
pub fn seatvote_exact_n2(x: f64) -> f64 {
    if x <= 0.25 {
        0.0
    } else if x <= 0.5 {
        1.0 - 1.0 / (4.0 * x)
    } else if x < 0.75 {
        1.0 / (4.0 * (1.0 - x))
    } else {
        1.0
    }
}

/// Density of the sum of `n` independent Uniform[0,1] variables.
pub fn irwin_hall_pdf(n: u32, y: f64) -> f64 {
    let nf = f64::from(n);
    if n == 0 || !(0.0..=nf).contains(&y) {
        return 0.0;
    }
    if n == 1 {
        return 1.0;
    }
    // the density is symmetric about n/2; the short side has fewer alternating terms
    let y = if y > nf / 2.0 { nf - y } else { y };
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 0..=(y.floor() as u32) {
        sum += sign * binomial(n, k) * (y - f64::from(k)).powi(n as i32 - 1);
        sign = -sign;
    }
    let norm: f64 = (1..n).map(f64::from).product();
    (sum / norm).max(0.0)
}

const SIMPSON_TOL: f64 = 1e-12;
const SIMPSON_MAX_DEPTH: u32 = 40;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive_simpson_rec(&f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)
}

/// `∫_lo^hi f_{n}(s - t) dt`, split at the knots where `s - t` is an integer.
fn convolved_mass(n: u32, s: f64, lo: f64, hi: f64) -> f64 {
    let mut cuts = vec![lo];
    let first = (s - hi).ceil() as i64;
    let last = (s - lo).floor() as i64;
    let mut knots: Vec<f64> = (first..=last)
        .map(|k| s - k as f64)
        .filter(|&t| t > lo && t < hi)
        .collect();
    knots.sort_by(f64::total_cmp);
    cuts.extend(knots);
    cuts.push(hi);
    cuts.windows(2)
        .map(|w| adaptive_simpson(|t| irwin_hall_pdf(n, s - t), w[0], w[1], SIMPSON_TOL))
        .sum()
}

/// `P(X₁ > ½ | mean(X₁..X_N) = x)` for i.i.d. Uniform[0,1] district shares,
/// i.e. the expected seat share at popular vote `x` under independent
/// equal-sized districts.
pub fn seatvote_numeric(num_districts: u32, x: f64) -> Result<f64, AnalyticError> {
    if num_districts < 2 {
        return Err(AnalyticError::InvalidParameter(format!(
            "need at least 2 districts, got {num_districts}"
        )));
    }
    if !(x > 0.0 && x < 1.0) {
        return Err(AnalyticError::OutOfDomain(x));
    }
    let rest = num_districts - 1;
    let s = f64::from(num_districts) * x;
    let won = convolved_mass(rest, s, 0.5, 1.0);
    let all = convolved_mass(rest, s, 0.0, 0.5) + won;
    Ok((won / all).clamp(0.0, 1.0))
}

/// Central finite difference `(f(x+h) - f(x-h)) / 2h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Default finite-difference step for slope checks on `[0, 1]`.
pub const SLOPE_STEP: f64 = 1e-4;

/// A closed-form or numerically evaluated curve on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnalyticCurve {
    BetaCdf { a: u32, b: u32 },
    UniformCdf,
    CubeCurve { k: f64 },
    SeatvoteN2,
    SeatvoteN { n: u32 },
}

impl AnalyticCurve {
    pub fn validate(&self) -> Result<(), AnalyticError> {
        match *self {
            AnalyticCurve::BetaCdf { a, b } if a == 0 || b == 0 => Err(
                AnalyticError::InvalidParameter(format!("Beta({a}, {b}) needs positive integers")),
            ),
            AnalyticCurve::CubeCurve { k } if !(k > 0.0) => {
                Err(AnalyticError::InvalidParameter(format!("cube exponent {k} must be positive")))
            }
            AnalyticCurve::SeatvoteN { n } if n < 2 => {
                Err(AnalyticError::InvalidParameter(format!("seat-vote curve needs N >= 2, got {n}")))
            }
            _ => Ok(()),
        }
    }

    /// Value at `x`. Arguments outside `[0, 1]` are clamped, so CDFs read 0 / 1
    /// beyond their support.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match *self {
            AnalyticCurve::BetaCdf { a, b } => beta_cdf_int(a, b, x).unwrap_or(f64::NAN),
            AnalyticCurve::UniformCdf => x,
            AnalyticCurve::CubeCurve { k } => cube_curve(k, x),
            AnalyticCurve::SeatvoteN2 => seatvote_exact_n2(x),
            AnalyticCurve::SeatvoteN { n } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    seatvote_numeric(n, x).unwrap_or(f64::NAN)
                }
            }
        }
    }

    /// `(x, y)` pairs on `points` evenly spaced abscissae covering `[0, 1]`.
    pub fn grid(&self, points: usize) -> Vec<(f64, f64)> {
        let last = points.max(2) - 1;
        (0..=last)
            .map(|i| {
                let x = i as f64 / last as f64;
                (x, self.eval(x))
            })
            .collect()
    }
}
