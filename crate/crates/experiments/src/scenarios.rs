//! Named initial conditions.

use polya_core::{AllocationBlock, InitialAllocation, SimulationConfig};

use crate::error::ExperimentError;

pub const DEFAULT_DISTRICTS: usize = 100;
/// Runs grow to a million voters unless told otherwise.
pub const DEFAULT_TARGET: u64 = 1_000_000;

/// Every built-in scenario name.
pub const SCENARIO_NAMES: [&str; 8] = [
    "sym_1_1",
    "sym_2_2",
    "sym_1_1_K5",
    "polar_2_1",
    "polar_3_1",
    "third_party_i",
    "third_party_ii",
    "third_party_iii",
];

/// Initial blocks and reinforcement of a named scenario over 100 districts.
pub fn scenario_blocks(name: &str) -> Result<(Vec<AllocationBlock>, u64), ExperimentError> {
    let b = AllocationBlock::new;
    let half = DEFAULT_DISTRICTS / 2;
    let out = match name {
        "sym_1_1" => (vec![b(DEFAULT_DISTRICTS, vec![1, 1])], 1),
        "sym_2_2" => (vec![b(DEFAULT_DISTRICTS, vec![2, 2])], 1),
        "sym_1_1_K5" => (vec![b(DEFAULT_DISTRICTS, vec![1, 1])], 5),
        "polar_2_1" => (vec![b(half, vec![2, 1]), b(half, vec![1, 2])], 1),
        "polar_3_1" => (vec![b(half, vec![3, 1]), b(half, vec![1, 3])], 1),
        "third_party_i" => (
            vec![b(80, vec![0, 2, 2]), b(10, vec![1, 2, 2]), b(10, vec![2, 1, 1])],
            1,
        ),
        "third_party_ii" => (
            vec![b(80, vec![0, 2, 2]), b(10, vec![1, 2, 2]), b(10, vec![3, 1, 1])],
            1,
        ),
        "third_party_iii" => (vec![b(DEFAULT_DISTRICTS, vec![1, 2, 2])], 1),
        other => return Err(ExperimentError::UnknownScenario(other.to_string())),
    };
    Ok(out)
}

/// The named scenario at imitation probability `p`, default target and seed 0.
pub fn scenario(name: &str, p: f64) -> Result<SimulationConfig, ExperimentError> {
    let (blocks, k) = scenario_blocks(name)?;
    Ok(SimulationConfig::from_allocation(
        InitialAllocation::new(blocks),
        p,
        k,
        DEFAULT_TARGET,
        0,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_complete_and_valid() {
        for name in SCENARIO_NAMES {
            for p in [0.0, 0.1, 1.0] {
                let c = scenario(name, p).unwrap();
                assert_eq!(c.num_districts, 100, "{name}");
            }
        }
        assert!(matches!(
            scenario("sym_9_9", 0.0),
            Err(ExperimentError::UnknownScenario(_))
        ));
    }

    #[test]
    fn allocations_as_described() {
        let (blocks, k) = scenario_blocks("third_party_ii").unwrap();
        assert_eq!(
            blocks,
            vec![
                AllocationBlock::new(80, [0, 2, 2]),
                AllocationBlock::new(10, [1, 2, 2]),
                AllocationBlock::new(10, [3, 1, 1]),
            ]
        );
        assert_eq!(k, 1);
        assert_eq!(scenario("sym_1_1_K5", 0.2).unwrap().reinforcement, 5);
        assert_eq!(
            scenario("third_party_i", 0.0).unwrap().initial_allocation.blocks[2].counts,
            vec![2, 1, 1]
        );
        assert_eq!(
            scenario("polar_3_1", 0.0).unwrap().initial_allocation.expand()[..2],
            [3, 1]
        );
        assert_eq!(scenario("sym_2_2", 0.0).unwrap().initial_allocation.total_balls(), 400);
    }
}
