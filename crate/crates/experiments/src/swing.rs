//! Inter-election swing: grow an electorate, shrink it to a small sample
//! that keeps every district's party mix (up to rounding), grow it again,
//! and compare district-level change with national change.

use std::path::Path;

use polya_core::rng::{replicate_seed, seeded_rng};
use polya_core::stats::{swing_regression, SlopeFit, SwingRecord};
use polya_core::{AllocationBlock, InitialAllocation, SimulationConfig, UrnProcess, UrnState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::apportion::largest_remainder;
use crate::error::{ExperimentError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwingSpec {
    pub num_districts: usize,
    /// Used for both the first and the second growth phase.
    pub imitation_prob: f64,
    pub seed: u64,
    pub grow_target: u64,
    pub rescale_total: u64,
    pub regrow_target: u64,
    pub replicates: usize,
    /// Zero-based index of the district whose swing is recorded.
    pub tracked_district: usize,
}

impl SwingSpec {
    /// 100 districts starting at one voter per party, grown to a million,
    /// cut to 600, regrown to a million; 1000 replicates tracking district 1.
    pub fn new(imitation_prob: f64) -> Self {
        SwingSpec {
            num_districts: 100,
            imitation_prob,
            seed: 0,
            grow_target: 1_000_000,
            rescale_total: 600,
            regrow_target: 1_000_000,
            replicates: 1000,
            tracked_district: 0,
        }
    }

    fn base_config(&self) -> Result<SimulationConfig> {
        Ok(SimulationConfig::from_allocation(
            InitialAllocation::new(vec![AllocationBlock::new(self.num_districts, [1, 1])]),
            self.imitation_prob,
            1,
            self.grow_target,
            self.seed,
        )?)
    }

    pub fn validate(&self) -> Result<()> {
        self.base_config()?;
        if self.replicates == 0 {
            return Err(ExperimentError::Usage("need at least one replicate".into()));
        }
        if self.rescale_total < self.num_districts as u64 {
            return Err(ExperimentError::Usage(format!(
                "rescale total {} leaves some of the {} districts empty",
                self.rescale_total, self.num_districts
            )));
        }
        if self.regrow_target < self.rescale_total {
            return Err(ExperimentError::Usage(format!(
                "regrow target {} is below the rescaled total {}",
                self.regrow_target, self.rescale_total
            )));
        }
        if self.tracked_district >= self.num_districts {
            return Err(ExperimentError::Usage(format!(
                "tracked district {} out of range",
                self.tracked_district
            )));
        }
        Ok(())
    }
}

/// Shrinks `state` to `total` balls: district populations by largest
/// remainder on district sizes, then each district's parties by largest
/// remainder on its own counts.
pub fn rescale(state: &UrnState, total: u64) -> Result<UrnState> {
    let populations = largest_remainder(state.urn_totals(), total)?;
    if let Some(u) = populations.iter().position(|&p| p == 0) {
        return Err(ExperimentError::Apportionment(format!(
            "district {u} receives no voters when rescaling to {total}"
        )));
    }
    let mut counts = Vec::with_capacity(state.counts().len());
    for (u, &pop) in populations.iter().enumerate() {
        counts.extend(largest_remainder(state.district(u), pop)?);
    }
    Ok(UrnState::from_counts(
        state.num_districts(),
        state.num_colours(),
        counts,
    )?)
}

fn party1_share(state: &UrnState) -> f64 {
    state.colour_totals()[0] as f64 / state.grand_total() as f64
}

/// One replicate of the swing experiment.
pub fn swing_replicate(spec: &SwingSpec, replicate_id: u64) -> Result<SwingRecord> {
    let config = spec.base_config()?;
    let mut rng = seeded_rng(replicate_seed(spec.seed, replicate_id));
    let mut process = UrnProcess::new(&config)?;
    process.run_until(spec.grow_target, &mut rng);
    let before = process.into_state();

    let small = rescale(&before, spec.rescale_total)?;
    let mut process = UrnProcess::from_state(small, spec.imitation_prob, 1)?;
    process.run_until(spec.regrow_target, &mut rng);
    let after = process.into_state();

    let u = spec.tracked_district;
    let original = before.district_shares(u)[0];
    Ok(SwingRecord {
        original_district_share: original,
        local_swing: after.district_shares(u)[0] - original,
        national_swing: party1_share(&after) - party1_share(&before),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwingOutcome {
    pub records: Vec<SwingRecord>,
    /// `None` when the regression is degenerate (e.g. every swing is zero
    /// at a single share).
    pub fit: Option<SlopeFit>,
}

pub fn run_swing(spec: &SwingSpec) -> Result<SwingOutcome> {
    spec.validate()?;
    let records = (0..spec.replicates as u64)
        .into_par_iter()
        .map(|r| swing_replicate(spec, r))
        .collect::<Result<Vec<_>>>()?;
    let fit = swing_regression(&records).ok();
    Ok(SwingOutcome { records, fit })
}

pub fn write_swing_csv(records: &[SwingRecord], path: &Path) -> Result<()> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "replicate_id",
        "original_district_share",
        "local_swing",
        "national_swing",
    ])
    .map_err(csv_err)?;
    for (i, r) in records.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.original_district_share.to_string(),
            r.local_swing.to_string(),
            r.national_swing.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}
