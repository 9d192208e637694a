//! Simulation parameters.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("number of districts must be at least 1")]
    NoDistricts,
    #[error("{0} districts is more than the sampler supports (2^32 - 1)")]
    TooManyDistricts(usize),
    #[error("number of colours must be at least 1")]
    NoColours,
    #[error("reinforcement K must be at least 1")]
    ZeroReinforcement,
    #[error("imitation probability {0} is outside [0, 1]")]
    ImitationOutOfRange(f64),
    #[error("a single district cannot imitate another (p = {0}, expected 0)")]
    SingleDistrictImitation(f64),
    #[error("allocation block {block} has zero districts")]
    EmptyBlock { block: usize },
    #[error("allocation covers {found} districts, config has {expected}")]
    DistrictCountMismatch { expected: usize, found: usize },
    #[error("allocation block {block} has {found} colours, config has {expected}")]
    ColourCountMismatch {
        block: usize,
        expected: usize,
        found: usize,
    },
    #[error("district {district} starts with no balls")]
    EmptyUrn { district: usize },
    #[error("target of {target} balls is below the initial total {initial}")]
    TargetBelowInitial { target: u64, initial: u64 },
}

/// `district_count` consecutive districts sharing the same initial counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationBlock {
    pub district_count: usize,
    pub counts: Vec<u64>,
}

impl AllocationBlock {
    pub fn new(district_count: usize, counts: impl Into<Vec<u64>>) -> Self {
        AllocationBlock {
            district_count,
            counts: counts.into(),
        }
    }
}

/// Initial ball counts, in block form: the blocks are laid out in order,
/// so `[(50, [2, 1]), (50, [1, 2])]` gives districts 0..50 the counts
/// `[2, 1]` and districts 50..100 the counts `[1, 2]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InitialAllocation {
    pub blocks: Vec<AllocationBlock>,
}

impl InitialAllocation {
    pub fn new(blocks: Vec<AllocationBlock>) -> Self {
        InitialAllocation { blocks }
    }

    /// Every district starts with the same counts.
    pub fn uniform(num_districts: usize, counts: impl Into<Vec<u64>>) -> Self {
        InitialAllocation {
            blocks: vec![AllocationBlock::new(num_districts, counts)],
        }
    }

    pub fn num_districts(&self) -> usize {
        self.blocks.iter().map(|b| b.district_count).sum()
    }

    pub fn total_balls(&self) -> u64 {
        self.blocks
            .iter()
            .map(|b| b.district_count as u64 * b.counts.iter().sum::<u64>())
            .sum()
    }

    /// Row-major `N × m` count matrix.
    pub fn expand(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for block in &self.blocks {
            for _ in 0..block.district_count {
                out.extend_from_slice(&block.counts);
            }
        }
        out
    }

    fn validate(&self, num_districts: usize, num_colours: usize) -> Result<(), ConfigError> {
        let mut district = 0;
        for (i, block) in self.blocks.iter().enumerate() {
            if block.district_count == 0 {
                return Err(ConfigError::EmptyBlock { block: i });
            }
            if block.counts.len() != num_colours {
                return Err(ConfigError::ColourCountMismatch {
                    block: i,
                    expected: num_colours,
                    found: block.counts.len(),
                });
            }
            if block.counts.iter().all(|&c| c == 0) {
                return Err(ConfigError::EmptyUrn { district });
            }
            district += block.district_count;
        }
        if district != num_districts {
            return Err(ConfigError::DistrictCountMismatch {
                expected: num_districts,
                found: district,
            });
        }
        Ok(())
    }
}

/// Parameters of one run of the multi-urn process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub num_districts: usize,
    pub num_colours: usize,
    pub imitation_prob: f64,
    pub reinforcement: u64,
    pub initial_allocation: InitialAllocation,
    pub target_total_balls: u64,
    pub seed: u64,
}

impl SimulationConfig {
    /// Builds a config whose district and colour counts are read off the allocation.
    pub fn from_allocation(
        initial_allocation: InitialAllocation,
        imitation_prob: f64,
        reinforcement: u64,
        target_total_balls: u64,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        let num_districts = initial_allocation.num_districts();
        let num_colours = initial_allocation
            .blocks
            .first()
            .map(|b| b.counts.len())
            .unwrap_or(0);
        let config = SimulationConfig {
            num_districts,
            num_colours,
            imitation_prob,
            reinforcement,
            initial_allocation,
            target_total_balls,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_districts == 0 {
            return Err(ConfigError::NoDistricts);
        }
        if self.num_districts > u32::MAX as usize {
            return Err(ConfigError::TooManyDistricts(self.num_districts));
        }
        if self.num_colours == 0 {
            return Err(ConfigError::NoColours);
        }
        if self.reinforcement == 0 {
            return Err(ConfigError::ZeroReinforcement);
        }
        let p = self.imitation_prob;
        if !(0.0..=1.0).contains(&p) {
            return Err(ConfigError::ImitationOutOfRange(p));
        }
        if self.num_districts == 1 && p > 0.0 {
            return Err(ConfigError::SingleDistrictImitation(p));
        }
        self.initial_allocation
            .validate(self.num_districts, self.num_colours)?;
        let initial = self.initial_allocation.total_balls();
        if self.target_total_balls < initial {
            return Err(ConfigError::TargetBelowInitial {
                target: self.target_total_balls,
                initial,
            });
        }
        Ok(())
    }

    pub fn with_imitation_prob(mut self, p: f64) -> Self {
        self.imitation_prob = p;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_target(mut self, target_total_balls: u64) -> Self {
        self.target_total_balls = target_total_balls;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_party(n: usize, p: f64) -> SimulationConfig {
        SimulationConfig {
            num_districts: n,
            num_colours: 2,
            imitation_prob: p,
            reinforcement: 1,
            initial_allocation: InitialAllocation::uniform(n, [1, 1]),
            target_total_balls: 1000,
            seed: 7,
        }
    }

    #[test]
    fn accepts_baseline() {
        assert_eq!(two_party(100, 0.2).validate(), Ok(()));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            two_party(100, 1.5).validate(),
            Err(ConfigError::ImitationOutOfRange(1.5))
        );
        assert!(matches!(
            two_party(100, f64::NAN).validate(),
            Err(ConfigError::ImitationOutOfRange(_))
        ));
        let mut c = two_party(1, 0.0);
        assert_eq!(c.validate(), Ok(()));
        c.imitation_prob = 0.1;
        assert_eq!(c.validate(), Err(ConfigError::SingleDistrictImitation(0.1)));

        let mut c = two_party(100, 0.0);
        c.reinforcement = 0;
        assert_eq!(c.validate(), Err(ConfigError::ZeroReinforcement));

        let mut c = two_party(100, 0.0);
        c.target_total_balls = 199;
        assert_eq!(
            c.validate(),
            Err(ConfigError::TargetBelowInitial {
                target: 199,
                initial: 200
            })
        );
    }

    #[test]
    fn rejects_bad_allocations() {
        let mut c = two_party(100, 0.0);
        c.initial_allocation = InitialAllocation::new(vec![
            AllocationBlock::new(50, [1, 1]),
            AllocationBlock::new(49, [1, 1]),
        ]);
        assert_eq!(
            c.validate(),
            Err(ConfigError::DistrictCountMismatch {
                expected: 100,
                found: 99
            })
        );

        c.initial_allocation = InitialAllocation::new(vec![
            AllocationBlock::new(50, [1, 1]),
            AllocationBlock::new(50, [0, 0]),
        ]);
        assert_eq!(c.validate(), Err(ConfigError::EmptyUrn { district: 50 }));

        c.initial_allocation = InitialAllocation::uniform(100, [1, 1, 1]);
        assert!(matches!(
            c.validate(),
            Err(ConfigError::ColourCountMismatch { block: 0, .. })
        ));
    }

    #[test]
    fn expands_blocks_in_order() {
        let alloc = InitialAllocation::new(vec![
            AllocationBlock::new(2, [2, 1]),
            AllocationBlock::new(1, [1, 2]),
        ]);
        assert_eq!(alloc.expand(), vec![2, 1, 2, 1, 1, 2]);
        assert_eq!(alloc.total_balls(), 9);
        assert_eq!(alloc.num_districts(), 3);
    }

    #[test]
    fn from_allocation_infers_shape() {
        let c = SimulationConfig::from_allocation(
            InitialAllocation::uniform(1, [0, 1]),
            0.0,
            1,
            10,
            0,
        )
        .unwrap();
        assert_eq!((c.num_districts, c.num_colours), (1, 2));
    }

    #[test]
    fn json_roundtrip() {
        let c = two_party(4, 0.3);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.contains("\"initial_allocation\":[{\"district_count\":4"));
        let back: SimulationConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
