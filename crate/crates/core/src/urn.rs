//! The multi-urn reinforcement process.

use rand::distr::{Bernoulli, Distribution};
use rand::Rng;

use crate::config::{ConfigError, SimulationConfig};

/// Ball counts per (district, colour).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrnState {
    num_districts: usize,
    num_colours: usize,
    /// Row-major `num_districts × num_colours`.
    counts: Vec<u64>,
    urn_totals: Vec<u64>,
    grand_total: u64,
    initial_total: u64,
    step_count: u64,
}

impl UrnState {
    /// Builds a state from a row-major count matrix. Every urn must hold at
    /// least one ball.
    pub fn from_counts(
        num_districts: usize,
        num_colours: usize,
        counts: Vec<u64>,
    ) -> Result<Self, ConfigError> {
        if num_districts == 0 {
            return Err(ConfigError::NoDistricts);
        }
        if num_districts > u32::MAX as usize {
            return Err(ConfigError::TooManyDistricts(num_districts));
        }
        if num_colours == 0 {
            return Err(ConfigError::NoColours);
        }
        assert_eq!(
            counts.len(),
            num_districts * num_colours,
            "count matrix has the wrong size"
        );
        let urn_totals: Vec<u64> = counts
            .chunks_exact(num_colours)
            .map(|row| row.iter().sum())
            .collect();
        if let Some(district) = urn_totals.iter().position(|&t| t == 0) {
            return Err(ConfigError::EmptyUrn { district });
        }
        let grand_total = urn_totals.iter().sum();
        Ok(UrnState {
            num_districts,
            num_colours,
            counts,
            urn_totals,
            grand_total,
            initial_total: grand_total,
            step_count: 0,
        })
    }

    pub fn num_districts(&self) -> usize {
        self.num_districts
    }

    pub fn num_colours(&self) -> usize {
        self.num_colours
    }

    /// Counts of district `u`, one entry per colour.
    pub fn district(&self, u: usize) -> &[u64] {
        &self.counts[u * self.num_colours..(u + 1) * self.num_colours]
    }

    pub fn count(&self, u: usize, colour: usize) -> u64 {
        self.counts[u * self.num_colours + colour]
    }

    /// Row-major count matrix.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn urn_totals(&self) -> &[u64] {
        &self.urn_totals
    }

    pub fn urn_total(&self, u: usize) -> u64 {
        self.urn_totals[u]
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    pub fn initial_total(&self) -> u64 {
        self.initial_total
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Total balls of each colour over all districts.
    pub fn colour_totals(&self) -> Vec<u64> {
        let mut totals = vec![0; self.num_colours];
        for row in self.counts.chunks_exact(self.num_colours) {
            for (t, &c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }

    /// Share of each colour within each district.
    pub fn vote_shares(&self) -> Vec<Vec<f64>> {
        (0..self.num_districts).map(|u| self.district_shares(u)).collect()
    }

    pub fn district_shares(&self, u: usize) -> Vec<f64> {
        let total = self.urn_totals[u] as f64;
        self.district(u).iter().map(|&c| c as f64 / total).collect()
    }

    /// Draws a colour from urn `u` with probability proportional to its count:
    /// the colour is the number of cumulative counts not exceeding a uniform
    /// draw from `0..total`. Branch-free, since the outcome is unpredictable.
    fn sample_colour<R: Rng + ?Sized>(&self, u: usize, rng: &mut R) -> usize {
        let total = self.urn_totals[u];
        let r = match u32::try_from(total) {
            Ok(t) => u64::from(rng.random_range(0..t)),
            Err(_) => rng.random_range(0..total),
        };
        let row = self.district(u);
        let mut cumulative = 0;
        let mut colour = 0;
        for &n in &row[..row.len() - 1] {
            cumulative += n;
            colour += usize::from(r >= cumulative);
        }
        colour
    }

    fn add(&mut self, u: usize, colour: usize, k: u64) {
        self.counts[u * self.num_colours + colour] += k;
        self.urn_totals[u] += k;
        self.grand_total += k;
        self.step_count += 1;
    }
}

/// Expands the config's initial allocation into a fresh state.
pub fn init_state(config: &SimulationConfig) -> Result<UrnState, ConfigError> {
    config.validate()?;
    UrnState::from_counts(
        config.num_districts,
        config.num_colours,
        config.initial_allocation.expand(),
    )
}

/// One step of the process: `colour` was drawn from `source` and added to `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawEvent {
    pub target: usize,
    pub source: usize,
    pub colour: usize,
}

impl DrawEvent {
    pub fn was_cross_district(&self) -> bool {
        self.target != self.source
    }
}

/// An [`UrnState`] together with the dynamics that drive it.
#[derive(Debug, Clone)]
pub struct UrnProcess {
    state: UrnState,
    imitation_prob: f64,
    /// `None` when no step can ever imitate (p = 0 or a single district).
    imitate: Option<Bernoulli>,
    reinforcement: u64,
}

impl UrnProcess {
    pub fn new(config: &SimulationConfig) -> Result<Self, ConfigError> {
        let state = init_state(config)?;
        Self::from_state(state, config.imitation_prob, config.reinforcement)
    }

    /// Continues the process from an arbitrary state.
    pub fn from_state(
        state: UrnState,
        imitation_prob: f64,
        reinforcement: u64,
    ) -> Result<Self, ConfigError> {
        if reinforcement == 0 {
            return Err(ConfigError::ZeroReinforcement);
        }
        if !(0.0..=1.0).contains(&imitation_prob) {
            return Err(ConfigError::ImitationOutOfRange(imitation_prob));
        }
        if state.num_districts == 1 && imitation_prob > 0.0 {
            return Err(ConfigError::SingleDistrictImitation(imitation_prob));
        }
        let imitate = if imitation_prob > 0.0 {
            Some(Bernoulli::new(imitation_prob).expect("probability checked above"))
        } else {
            None
        };
        Ok(UrnProcess {
            state,
            imitation_prob,
            imitate,
            reinforcement,
        })
    }

    pub fn state(&self) -> &UrnState {
        &self.state
    }

    pub fn into_state(self) -> UrnState {
        self.state
    }

    pub fn imitation_prob(&self) -> f64 {
        self.imitation_prob
    }

    pub fn reinforcement(&self) -> u64 {
        self.reinforcement
    }

    /// Advances one step. Randomness is consumed in a fixed order: target
    /// urn, then the imitation decision and source urn, then the colour.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> DrawEvent {
        let n = self.state.num_districts as u32;
        let target = rng.random_range(0..n) as usize;
        let source = match &self.imitate {
            Some(b) if b.sample(rng) => {
                let other = rng.random_range(0..n - 1) as usize;
                if other >= target {
                    other + 1
                } else {
                    other
                }
            }
            _ => target,
        };
        let colour = self.state.sample_colour(source, rng);
        self.state.add(target, colour, self.reinforcement);
        debug_assert_eq!(
            self.state.grand_total,
            self.state.initial_total + self.reinforcement * self.state.step_count
        );
        DrawEvent {
            target,
            source,
            colour,
        }
    }

    /// Steps until the grand total first reaches or passes `target_total`.
    /// Returns the number of steps taken.
    pub fn run_until<R: Rng + ?Sized>(&mut self, target_total: u64, rng: &mut R) -> u64 {
        let start = self.state.step_count;
        while self.state.grand_total < target_total {
            self.step(rng);
        }
        self.state.step_count - start
    }
}

/// Runs `config` to its target with the generator seeded from `config.seed`.
pub fn simulate(config: &SimulationConfig) -> Result<UrnState, ConfigError> {
    let mut rng = crate::rng::seeded_rng(config.seed);
    simulate_with(config, &mut rng)
}

pub fn simulate_with<R: Rng + ?Sized>(
    config: &SimulationConfig,
    rng: &mut R,
) -> Result<UrnState, ConfigError> {
    let mut process = UrnProcess::new(config)?;
    process.run_until(config.target_total_balls, rng);
    Ok(process.into_state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{AllocationBlock, InitialAllocation};
    use crate::rng::seeded_rng;

    fn config(blocks: Vec<AllocationBlock>, p: f64, k: u64) -> SimulationConfig {
        SimulationConfig::from_allocation(InitialAllocation::new(blocks), p, k, 1_000_000, 1)
            .unwrap()
    }

    #[test]
    fn init_symmetric() {
        let c = config(vec![AllocationBlock::new(100, [1, 1])], 0.0, 1);
        let s = init_state(&c).unwrap();
        assert!(s.counts().iter().all(|&x| x == 1));
        assert_eq!(s.grand_total(), 200);
        assert_eq!(s.step_count(), 0);
        assert!(s.urn_totals().iter().all(|&t| t == 2));
    }

    #[test]
    fn init_polarised() {
        let c = config(
            vec![AllocationBlock::new(50, [2, 1]), AllocationBlock::new(50, [1, 2])],
            0.2,
            1,
        );
        let s = init_state(&c).unwrap();
        for u in 0..50 {
            assert_eq!(s.district(u), &[2, 1]);
        }
        for u in 50..100 {
            assert_eq!(s.district(u), &[1, 2]);
        }
    }

    #[test]
    fn init_single_urn_with_absent_colour() {
        let c = config(vec![AllocationBlock::new(1, [0, 1])], 0.0, 1);
        let s = init_state(&c).unwrap();
        assert_eq!(s.district(0), &[0, 1]);
    }

    #[test]
    fn init_rejects_empty_urn_and_lone_imitation() {
        let alloc = InitialAllocation::new(vec![AllocationBlock::new(1, [0, 0])]);
        assert!(SimulationConfig::from_allocation(alloc, 0.0, 1, 10, 0).is_err());
        assert_eq!(
            UrnState::from_counts(2, 2, vec![1, 0, 0, 0]),
            Err(ConfigError::EmptyUrn { district: 1 })
        );
        let s = UrnState::from_counts(1, 2, vec![1, 1]).unwrap();
        assert!(matches!(
            UrnProcess::from_state(s, 0.5, 1),
            Err(ConfigError::SingleDistrictImitation(_))
        ));
    }

    #[test]
    fn vote_share_rows() {
        let s = UrnState::from_counts(3, 3, vec![1, 1, 0, 2, 1, 0, 0, 2, 2]).unwrap();
        let v = s.vote_shares();
        assert_eq!(v[0], vec![0.5, 0.5, 0.0]);
        assert_eq!(v[1], vec![2.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert_eq!(v[2], vec![0.0, 0.5, 0.5]);
        for row in v {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn run_until_counts_steps() {
        let c = config(vec![AllocationBlock::new(100, [1, 1])], 0.1, 1);
        let mut rng = seeded_rng(3);
        let mut proc = UrnProcess::new(&c).unwrap();
        assert_eq!(proc.run_until(200, &mut rng), 0);
        assert_eq!(proc.state().grand_total(), 200);
        assert_eq!(proc.run_until(100_000, &mut rng), 99_800);
        assert_eq!(proc.state().grand_total(), 100_000);
    }

    #[test]
    fn run_until_overshoots_with_large_k() {
        let c = config(vec![AllocationBlock::new(100, [1, 1])], 0.0, 5);
        let mut rng = seeded_rng(3);
        let mut proc = UrnProcess::new(&c).unwrap();
        assert_eq!(proc.run_until(204, &mut rng), 1);
        assert_eq!(proc.state().grand_total(), 205);
    }

    #[test]
    fn full_imitation_always_crosses() {
        let c = config(vec![AllocationBlock::new(2, [1, 1])], 1.0, 1);
        let mut rng = seeded_rng(9);
        let mut proc = UrnProcess::new(&c).unwrap();
        for _ in 0..1000 {
            let ev = proc.step(&mut rng);
            assert_eq!(ev.source, 1 - ev.target);
            assert!(ev.was_cross_district());
        }
    }

    #[test]
    fn no_imitation_never_crosses() {
        let c = config(vec![AllocationBlock::new(5, [1, 1])], 0.0, 1);
        let mut rng = seeded_rng(9);
        let mut proc = UrnProcess::new(&c).unwrap();
        for _ in 0..1000 {
            assert!(!proc.step(&mut rng).was_cross_district());
        }
    }

    #[test]
    fn single_urn_first_draw_is_fair() {
        let c = config(vec![AllocationBlock::new(1, [1, 1])], 0.0, 1);
        let mut rng = seeded_rng(11);
        let n = 200_000;
        let hits = (0..n)
            .filter(|_| UrnProcess::new(&c).unwrap().step(&mut rng).colour == 0)
            .count();
        let freq = hits as f64 / n as f64;
        // 5 sigma of Binomial(n, 1/2)
        assert!((freq - 0.5).abs() < 5.0 * (0.25 / n as f64).sqrt(), "{freq}");
    }

    #[test]
    fn step_law_matches_hand_computation() {
        // P(target 0, colour 0) = 1/2 (0.7 * 2/3 + 0.3 * 1/2)
        let expected: f64 = 0.5 * (0.7 * 2.0 / 3.0 + 0.3 * 0.5);
        assert!((expected - 0.308_333_333_333).abs() < 1e-9);
        let c = config(
            vec![AllocationBlock::new(1, [2, 1]), AllocationBlock::new(1, [1, 1])],
            0.3,
            1,
        );
        let base = UrnProcess::new(&c).unwrap();
        let mut rng = seeded_rng(2024);
        let n = 10_000_000u64;
        let mut hits = 0u64;
        for _ in 0..n {
            let ev = base.clone().step(&mut rng);
            if ev.target == 0 && ev.colour == 0 {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((freq - expected).abs() < 5.0 * sigma, "{freq} vs {expected}");
    }

    #[test]
    fn conservation_and_monotonicity() {
        let c = config(
            vec![AllocationBlock::new(3, [0, 2, 1]), AllocationBlock::new(2, [1, 0, 1])],
            0.4,
            3,
        );
        let mut rng = seeded_rng(5);
        let mut proc = UrnProcess::new(&c).unwrap();
        let initial = proc.state().grand_total();
        let mut prev = proc.state().counts().to_vec();
        for s in 1..=5_000u64 {
            proc.step(&mut rng);
            let st = proc.state();
            assert_eq!(st.grand_total(), initial + 3 * s);
            for (a, b) in prev.iter().zip(st.counts()) {
                assert!(b >= a);
            }
            prev = st.counts().to_vec();
        }
    }

    #[test]
    fn absent_colour_never_appears() {
        let c = config(vec![AllocationBlock::new(10, [3, 0, 2])], 0.5, 1);
        let s = simulate(&c.with_target(20_000)).unwrap();
        assert_eq!(s.colour_totals()[1], 0);
    }

    #[test]
    fn same_seed_same_run() {
        let c = config(vec![AllocationBlock::new(10, [1, 1])], 0.3, 1).with_target(10_000);
        let run = |seed| {
            let mut rng = seeded_rng(seed);
            let mut proc = UrnProcess::new(&c).unwrap();
            let events: Vec<DrawEvent> = (0..2_000).map(|_| proc.step(&mut rng)).collect();
            (events, proc.into_state())
        };
        assert_eq!(run(17), run(17));
        assert_ne!(run(17).1, run(18).1);
    }
}
