//! Public-API checks of the sampler and closed forms against independent
//! references.

use polya_core::analytic::{beta_cdf_int, dirichlet_multinomial_pmf, enumerate_multiurn, AnalyticCurve};
use polya_core::rng::{replicate_rng, seeded_rng};
use polya_core::stats::{ks_critical_value, ks_statistic};
use polya_core::{simulate, simulate_with, tally, InitialAllocation, SimulationConfig, TieRule, UrnProcess};
use proptest::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

fn config(n: usize, counts: &[u64], p: f64, target: u64, seed: u64) -> SimulationConfig {
    SimulationConfig::from_allocation(InitialAllocation::uniform(n, counts.to_vec()), p, 1, target, seed).unwrap()
}

#[test]
fn beta_cdf_matches_statrs() {
    for (a, b) in [(1, 1), (2, 1), (2, 2), (3, 5), (7, 2), (10, 10)] {
        let reference = Beta::new(a as f64, b as f64).unwrap();
        for i in 0..=50 {
            let x = i as f64 / 50.0;
            let ours = beta_cdf_int(a, b, x).unwrap();
            assert!((ours - reference.cdf(x)).abs() < 1e-10, "Beta({a},{b}) at {x}");
        }
    }
}

#[test]
fn one_step_law_matches_enumeration_by_hand() {
    // N=2, urn 0 = (2,1), urn 1 = (1,3), p = 0.3. Colour 0 lands in urn 0
    // with probability 1/2 · (0.7·2/3 + 0.3·1/4).
    let c = SimulationConfig::from_allocation(
        InitialAllocation::new(vec![
            polya_core::AllocationBlock::new(1, [2, 1]),
            polya_core::AllocationBlock::new(1, [1, 3]),
        ]),
        0.3,
        1,
        100,
        0,
    )
    .unwrap();
    let pmf = enumerate_multiurn(&c, 1).unwrap();
    let expected = 0.5 * (0.7 * 2.0 / 3.0 + 0.3 * 0.25);
    assert!((pmf.probability_of(&[3, 1, 1, 3]) - expected).abs() < 1e-15);
    assert_eq!(pmf.len(), 4);
}

#[test]
fn single_urn_limit_is_beta() {
    // 2:2 start: the long-run share of colour 0 is Beta(2,2).
    let mut shares = Vec::new();
    for r in 0..400 {
        let mut rng = replicate_rng(99, r);
        let state = simulate_with(&config(1, &[2, 2], 0.0, 20_000, 0), &mut rng).unwrap();
        shares.push(state.district_shares(0)[0]);
    }
    let curve = AnalyticCurve::BetaCdf { a: 2, b: 2 };
    let d = ks_statistic(&shares, |x| curve.eval(x));
    assert!(d < ks_critical_value(shares.len(), 0.001), "D = {d}");
}

#[test]
fn dirichlet_multinomial_matches_sequence_count() {
    // a = (2,1), 3 draws ending with counts (2,1): sequences AAB, ABA, BAA
    // have probabilities 2/3·3/4·1/5 + 2/3·1/4·3/5 + 1/3·2/4·3/5 = 3/10.
    let p = dirichlet_multinomial_pmf(&[2, 1], 3, &[2, 1]).unwrap();
    assert!((p - 0.3).abs() < 1e-15);
}

#[test]
fn simulate_is_reproducible_from_config_seed() {
    let c = config(10, &[1, 1], 0.2, 5_000, 1234);
    assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
    assert_ne!(simulate(&c).unwrap(), simulate(&c.clone().with_seed(1235)).unwrap());
}

proptest! {
    #[test]
    fn runs_stop_at_first_crossing(k in 1u64..6, target in 10u64..400, seed: u64) {
        let c = SimulationConfig::from_allocation(InitialAllocation::uniform(3, [1, 2]), 0.5, k, target.max(9), seed).unwrap();
        let mut process = UrnProcess::new(&c).unwrap();
        let steps = process.run_until(c.target_total_balls, &mut seeded_rng(seed));
        let s = process.state();
        prop_assert_eq!(s.grand_total(), 9 + k * steps);
        prop_assert!(s.grand_total() >= c.target_total_balls);
        prop_assert!(s.grand_total() < c.target_total_balls + k);
    }

    #[test]
    fn seats_sum_to_district_count(n in 1usize..30, p in 0.0f64..1.0, seed: u64) {
        let p = if n == 1 { 0.0 } else { p };
        let c = config(n, &[1, 1, 1], p, 3 * n as u64 + 200, seed);
        let state = simulate(&c).unwrap();
        let result = tally(&state, TieRule::Random, &mut seeded_rng(seed));
        prop_assert_eq!(result.seats.iter().sum::<u64>(), n as u64);
    }
}
