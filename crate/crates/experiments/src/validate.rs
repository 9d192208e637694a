//! Oracle battery: compares the sampler against exact distributions and
//! checks the closed-form curves, printing one line per check.

use std::collections::BTreeMap;
use std::fmt;

use polya_core::analytic::{
    beta_cdf_int, central_difference, cube_curve, dirichlet_multinomial_pmf, enumerate_multiurn,
    seatvote_exact_n2, seatvote_numeric, AnalyticCurve, ExactPmf, SLOPE_STEP,
};
use polya_core::rng::seeded_rng;
use polya_core::stats::{chi_square_pooled, ks_critical_value, ks_statistic, pearson};
use polya_core::{
    init_state, tally, AllocationBlock, InitialAllocation, SimulationConfig, TieRule, UrnProcess,
};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

use crate::harness::run_replicates;
use crate::scenarios::scenario;

pub const TV_TOLERANCE: f64 = 0.02;
pub const KS_ALPHA: f64 = 0.01;
/// Smallest acceptable chi-square p-value for the seat-count check.
pub const CHI_SQUARE_LEVEL: f64 = 0.001;
pub const INDEPENDENCE_BOUND: f64 = 0.1;
pub const CURVE_TOL: f64 = 1e-8;
pub const SLOPE_TOL: f64 = 1e-3;
pub const GRID_STEP: f64 = 1e-3;
/// Ball count for the desk-scale replicate checks.
pub const DESK_TARGET: u64 = 100_000;

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Monte Carlo samples for each exact-distribution comparison.
    pub samples: usize,
    /// Replicates for the desk-scale checks.
    pub replicates: usize,
    /// Test hook: when set, the sampler runs with this imitation probability
    /// while the oracle keeps the configured one.
    pub corrupt_imitation: Option<f64>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            seed: 0,
            samples: 1_000_000,
            replicates: 1000,
            corrupt_imitation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// Informational lines with no pass/fail meaning.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        for n in &self.notes {
            writeln!(f, "NOTE {n}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Two districts, two colours, K = 1, each urn starting with one ball of
/// each colour.
pub fn oracle_config(p: f64) -> SimulationConfig {
    SimulationConfig::from_allocation(InitialAllocation::uniform(2, [1, 1]), p, 1, u64::MAX, 0)
        .expect("valid oracle config")
}

/// Empirical distribution of the full count matrix after `steps` steps,
/// sampled with imitation probability `sampler_p`.
pub fn sample_states(
    config: &SimulationConfig,
    sampler_p: f64,
    steps: u32,
    samples: usize,
    seed: u64,
) -> BTreeMap<Vec<u64>, u64> {
    let start = init_state(config).expect("validated config");
    let mut rng = seeded_rng(seed);
    let mut freq = BTreeMap::new();
    for _ in 0..samples {
        let mut process = UrnProcess::from_state(start.clone(), sampler_p, config.reinforcement)
            .expect("validated config");
        for _ in 0..steps {
            process.step(&mut rng);
        }
        *freq.entry(process.state().counts().to_vec()).or_insert(0) += 1;
    }
    freq
}

/// Total variation between exact enumeration and Monte Carlo frequencies.
pub fn multiurn_tv(config: &SimulationConfig, steps: u32, samples: usize, seed: u64, sampler_p: Option<f64>) -> f64 {
    let exact = enumerate_multiurn(config, steps).expect("small oracle config");
    let observed = sample_states(config, sampler_p.unwrap_or(config.imitation_prob), steps, samples, seed);
    exact.total_variation(&observed)
}

fn check_multiurn(opts: &ValidateOptions, out: &mut ValidationReport) {
    for (i, p) in [0.0, 0.3, 1.0].into_iter().enumerate() {
        let config = oracle_config(p);
        let tv = multiurn_tv(&config, 4, opts.samples, opts.seed.wrapping_add(i as u64), opts.corrupt_imitation);
        out.checks.push(Check::new(
            format!("multi_urn_oracle_p{p}"),
            tv < TV_TOLERANCE,
            format!("N=2 m=2 K=1, 4 steps, {} samples: TV = {tv:.5} (< {TV_TOLERANCE})", opts.samples),
        ));
    }
}

/// Dirichlet-multinomial pmf of colour additions as an [`ExactPmf`] over
/// final single-urn counts.
fn single_urn_pmf(a: &[u64], n: u64) -> ExactPmf {
    let mut support = Vec::new();
    let mut probabilities = Vec::new();
    for added in compositions(n, a.len()) {
        let state: Vec<u64> = a.iter().zip(&added).map(|(x, y)| x + y).collect();
        probabilities.push(dirichlet_multinomial_pmf(a, n, &added).expect("valid counts"));
        support.push(state);
    }
    let mut pairs: Vec<_> = support.into_iter().zip(probabilities).collect();
    pairs.sort_by(|x, y| x.0.cmp(&y.0));
    let (support, probabilities) = pairs.into_iter().unzip();
    ExactPmf {
        support,
        probabilities,
    }
}

/// All vectors of `parts` nonnegative integers summing to `n`.
fn compositions(n: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            compositions(n - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn check_single_urn(opts: &ValidateOptions, out: &mut ValidationReport) {
    let a = [1u64, 1];
    let config = SimulationConfig::from_allocation(InitialAllocation::uniform(1, a), 0.0, 1, u64::MAX, 0)
        .expect("valid");
    let observed = sample_states(&config, 0.0, 6, opts.samples, opts.seed.wrapping_add(10));
    let tv = single_urn_pmf(&a, 6).total_variation(&observed);
    out.checks.push(Check::new(
        "single_urn_exchangeability",
        tv < TV_TOLERANCE,
        format!("a=(1,1), 6 draws, {} samples: TV = {tv:.5} (< {TV_TOLERANCE})", opts.samples),
    ));
}

fn check_pmf_sums(out: &mut ValidationReport) {
    let mut worst: f64 = 0.0;
    for a in [&[1u64, 1][..], &[2, 1], &[2, 2], &[1, 2, 2], &[3, 1, 1]] {
        for n in 0..=8 {
            let total: f64 = compositions(n, a.len())
                .iter()
                .map(|c| dirichlet_multinomial_pmf(a, n, c).unwrap())
                .sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    out.checks.push(Check::new(
        "dirichlet_multinomial_sums",
        worst < 1e-12,
        format!("n <= 8, five parameter vectors: max |sum - 1| = {worst:.2e}"),
    ));

    let mut worst: f64 = 0.0;
    let mut reduction: f64 = 0.0;
    for p in [0.0, 0.3, 1.0] {
        let pmf = enumerate_multiurn(&oracle_config(p), 6).unwrap();
        worst = worst.max((pmf.total() - 1.0).abs());
    }
    // N = 1 reduces to the single-urn law.
    let single = SimulationConfig::from_allocation(InitialAllocation::uniform(1, [2, 1]), 0.0, 1, u64::MAX, 0).unwrap();
    let pmf = enumerate_multiurn(&single, 6).unwrap();
    let dm = single_urn_pmf(&[2, 1], 6);
    for (s, &q) in dm.support.iter().zip(&dm.probabilities) {
        reduction = reduction.max((pmf.probability_of(s) - q).abs());
    }
    // With p = 0 each urn is a Pólya urn driven by a Binomial(n, 1/2) number of draws.
    let pmf = enumerate_multiurn(&oracle_config(0.0), 6).unwrap().marginal(0..2);
    let draws = Binomial::new(0.5, 6).unwrap();
    for (s, &q) in pmf.support.iter().zip(&pmf.probabilities) {
        let j = s[0] + s[1] - 2;
        let added = [s[0] - 1, s[1] - 1];
        let expect = draws.pmf(j) * dirichlet_multinomial_pmf(&[1, 1], j, &added).unwrap();
        reduction = reduction.max((q - expect).abs());
    }
    out.checks.push(Check::new(
        "enumeration_sums",
        worst < 1e-12,
        format!("N=2 m=2, 6 steps, p in {{0, 0.3, 1}}: max |sum - 1| = {worst:.2e}"),
    ));
    out.checks.push(Check::new(
        "enumeration_reduces_to_single_urn",
        reduction < 1e-12,
        format!("N=1 and p=0 marginals vs Dirichlet-multinomial: max diff = {reduction:.2e}"),
    ));
}

fn grid() -> impl Iterator<Item = f64> {
    let steps = (1.0 / GRID_STEP).round() as usize;
    (0..=steps).map(move |i| i as f64 / steps as f64)
}

fn check_curves(out: &mut ValidationReport) {
    let sym = grid()
        .flat_map(|x| {
            [
                cube_curve(3.0, x) + cube_curve(3.0, 1.0 - x) - 1.0,
                cube_curve(30.0, x) + cube_curve(30.0, 1.0 - x) - 1.0,
                seatvote_exact_n2(x) + seatvote_exact_n2(1.0 - x) - 1.0,
            ]
        })
        .fold(0.0f64, |m, d| m.max(d.abs()));
    out.checks.push(Check::new(
        "curve_symmetry",
        sym < 1e-12,
        format!("cube (k=3, 30) and N=2 curves: max |f(x) + f(1-x) - 1| = {sym:.2e}"),
    ));

    let curves = [
        AnalyticCurve::CubeCurve { k: 3.0 },
        AnalyticCurve::SeatvoteN2,
        AnalyticCurve::SeatvoteN { n: 3 },
        AnalyticCurve::SeatvoteN { n: 5 },
        AnalyticCurve::BetaCdf { a: 2, b: 2 },
    ];
    let mut drops = 0;
    for c in curves {
        let ys: Vec<f64> = grid().map(|x| c.eval(x)).collect();
        drops += ys.windows(2).filter(|w| w[1] < w[0] - 1e-12).count();
    }
    out.checks.push(Check::new(
        "curve_monotonicity",
        drops == 0,
        format!("{} curves on a {GRID_STEP} grid: {drops} decreases", curves.len()),
    ));

    let logit = |v: f64| (v / (1.0 - v)).ln();
    let dev = (1..100)
        .map(|i| i as f64 / 100.0)
        .map(|x| (logit(cube_curve(3.0, x)) - 3.0 * logit(x)).abs())
        .fold(0.0f64, f64::max);
    out.checks.push(Check::new(
        "cube_logit_identity",
        dev < 1e-10,
        format!("k=3, x in [0.01, 0.99]: max |logit y - k logit x| = {dev:.2e}"),
    ));

    let diff = grid()
        .map(|x| (AnalyticCurve::SeatvoteN { n: 2 }.eval(x) - seatvote_exact_n2(x)).abs())
        .fold(0.0f64, f64::max);
    out.checks.push(Check::new(
        "seatvote_n2_numeric_vs_closed_form",
        diff < CURVE_TOL,
        format!("{GRID_STEP} grid: max diff = {diff:.2e} (< {CURVE_TOL:e})"),
    ));

    for (n, expect) in [(2u32, 1.0), (3, 2.0)] {
        let slope = central_difference(|x| seatvote_numeric(n, x).unwrap(), 0.5, SLOPE_STEP);
        out.checks.push(Check::new(
            format!("seatvote_central_slope_n{n}"),
            (slope - expect).abs() < SLOPE_TOL,
            format!("slope at 1/2 = {slope:.6} (expected {expect} within {SLOPE_TOL})"),
        ));
    }
    for n in [4u32, 5, 10] {
        let slope = central_difference(|x| seatvote_numeric(n, x).unwrap(), 0.5, SLOPE_STEP);
        out.notes.push(format!("seat-vote central slope N={n}: {slope:.6}"));
    }

    let beta = beta_cdf_int(2, 1, 0.5).unwrap();
    out.checks.push(Check::new(
        "beta_cdf_triangular",
        (beta - 0.25).abs() < 1e-15,
        format!("Beta(2,1) CDF at 1/2 = {beta}"),
    ));
}

fn check_process_invariants(opts: &ValidateOptions, out: &mut ValidationReport) {
    // Colour 2 is absent everywhere and must stay absent.
    let config = SimulationConfig::from_allocation(
        InitialAllocation::new(vec![AllocationBlock::new(3, [1, 2, 0]), AllocationBlock::new(2, [3, 1, 0])]),
        0.4,
        3,
        20_000,
        opts.seed,
    )
    .unwrap();
    let mut process = UrnProcess::new(&config).unwrap();
    let mut rng = seeded_rng(opts.seed);
    let mut previous = process.state().counts().to_vec();
    let (mut conserved, mut monotone, mut absent) = (true, true, true);
    while process.state().grand_total() < config.target_total_balls {
        process.step(&mut rng);
        let s = process.state();
        conserved &= s.grand_total() == s.initial_total() + config.reinforcement * s.step_count();
        monotone &= s.counts().iter().zip(&previous).all(|(a, b)| a >= b);
        absent &= (0..s.num_districts()).all(|u| s.count(u, 2) == 0);
        previous.copy_from_slice(s.counts());
    }
    out.checks.push(Check::new(
        "conservation_and_monotonicity",
        conserved && monotone && absent,
        format!(
            "{} steps: conserved={conserved} monotone={monotone} absent colour stays absent={absent}",
            process.state().step_count()
        ),
    ));

    let run = |seed| {
        let mut p = UrnProcess::new(&config).unwrap();
        let mut rng = seeded_rng(seed);
        let events: Vec<_> = (0..5000).map(|_| p.step(&mut rng)).collect();
        (events, p.into_state())
    };
    let (a, b) = (run(opts.seed), run(opts.seed));
    out.checks.push(Check::new(
        "determinism",
        a.0 == b.0 && a.1 == b.1,
        "same config and seed give identical events and final state",
    ));

    let state = process.into_state();
    let result = tally(&state, TieRule::LowestIndex, &mut rng);
    let seats: u64 = result.seats.iter().sum();
    let shares: f64 = result.popular_shares.iter().sum();
    out.checks.push(Check::new(
        "tally_totals",
        seats == state.num_districts() as u64 && (shares - 1.0).abs() < 1e-12,
        format!("seats sum to {seats} of {}, popular shares sum to {shares}", state.num_districts()),
    ));
}

fn check_desk_scale(opts: &ValidateOptions, out: &mut ValidationReport) {
    let seed = opts.seed;
    let r = opts.replicates;
    let p = opts.corrupt_imitation.unwrap_or(0.0);
    let config = |name: &str| scenario(name, p).unwrap().with_target(DESK_TARGET).with_seed(seed);

    let records = run_replicates(&config("sym_1_1"), r, TieRule::Random).expect("valid config");
    let crit = ks_critical_value(r, KS_ALPHA);
    let d1: Vec<f64> = records.iter().map(|x| x.district1_share).collect();
    let d = ks_statistic(&d1, |x| x.clamp(0.0, 1.0));
    out.checks.push(Check::new(
        "district_share_uniform_ks",
        d < crit,
        format!("init 1:1, {r} replicates: D = {d:.4} (< {crit:.4})"),
    ));

    let d2: Vec<f64> = records.iter().map(|x| x.district_shares[1]).collect();
    let cross = pearson(&d1, &d2).unwrap_or(f64::NAN);
    out.checks.push(Check::new(
        "district_independence",
        cross.abs() < INDEPENDENCE_BOUND,
        format!("corr(district 1, district 2) = {cross:.4} (|r| < {INDEPENDENCE_BOUND})"),
    ));

    // Each of N districts is won by party 1 with probability 1/2, independently.
    let n = records[0].num_districts();
    let binom = Binomial::new(0.5, n).unwrap();
    let mut observed = vec![0u64; n as usize + 1];
    for rec in &records {
        observed[rec.seats[0] as usize] += 1;
    }
    let expected: Vec<f64> = (0..=n).map(|s| binom.pmf(s)).collect();
    let (stat, cells) = chi_square_pooled(&observed, &expected, 5.0).expect("valid probabilities");
    let p_value = if cells > 1 {
        1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
    } else {
        f64::NAN
    };
    out.checks.push(Check::new(
        "seat_count_binomial_chi_square",
        p_value > CHI_SQUARE_LEVEL,
        format!("chi2 = {stat:.2} on {} df, p = {p_value:.4} (> {CHI_SQUARE_LEVEL})", cells.saturating_sub(1)),
    ));

    let records = run_replicates(&config("sym_2_2"), r, TieRule::Random).expect("valid config");
    let d1: Vec<f64> = records.iter().map(|x| x.district1_share).collect();
    let d = ks_statistic(&d1, |x| AnalyticCurve::BetaCdf { a: 2, b: 2 }.eval(x));
    out.checks.push(Check::new(
        "district_share_beta22_ks",
        d < crit,
        format!("init 2:2, {r} replicates: D = {d:.4} (< {crit:.4})"),
    ));
}

/// Runs the whole battery.
pub fn validate(opts: &ValidateOptions) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_multiurn(opts, &mut report);
    check_single_urn(opts, &mut report);
    check_pmf_sums(&mut report);
    check_curves(&mut report);
    check_process_invariants(opts, &mut report);
    check_desk_scale(opts, &mut report);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_are_complete() {
        let c = compositions(3, 3);
        assert_eq!(c.len(), 10);
        assert!(c.iter().all(|v| v.iter().sum::<u64>() == 3));
    }

    #[test]
    fn single_urn_pmf_is_uniform_for_one_one() {
        // a = (1,1): every split of n draws is equally likely.
        let pmf = single_urn_pmf(&[1, 1], 6);
        assert_eq!(pmf.len(), 7);
        for &q in &pmf.probabilities {
            assert!((q - 1.0 / 7.0).abs() < 1e-14);
        }
    }

    #[test]
    fn corrupted_sampler_is_detectable() {
        // The oracle itself separates p = 0 from p = 1 by far more than the tolerance.
        let a = enumerate_multiurn(&oracle_config(0.0), 4).unwrap();
        let b = enumerate_multiurn(&oracle_config(1.0), 4).unwrap();
        let counts: BTreeMap<Vec<u64>, u64> = b
            .support
            .iter()
            .zip(&b.probabilities)
            .map(|(s, &q)| (s.clone(), (q * 1e9).round() as u64))
            .collect();
        assert!(a.total_variation(&counts) > 5.0 * TV_TOLERANCE);
    }

    #[test]
    fn report_formatting() {
        let report = ValidationReport {
            checks: vec![Check::new("a", true, "ok"), Check::new("b", false, "bad")],
            notes: vec!["n".into()],
        };
        assert!(!report.passed());
        let text = report.to_string();
        assert!(text.contains("PASS a: ok"));
        assert!(text.contains("FAIL b: bad"));
        assert!(text.ends_with("2 checks, 1 failed"));
    }
}
