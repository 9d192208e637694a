//! First-past-the-post tallies over an [`UrnState`].

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::urn::UrnState;

/// How a district with several plurality leaders is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Uniformly at random among the tied leaders.
    #[default]
    Random,
    /// The tied leader with the smallest colour index.
    LowestIndex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionResult {
    pub district_shares: Vec<Vec<f64>>,
    pub winners: Vec<usize>,
    pub seats: Vec<u64>,
    /// Ball-weighted over all districts.
    pub popular_shares: Vec<f64>,
    pub tie_flags: Vec<bool>,
}

impl ElectionResult {
    pub fn seat_share(&self, colour: usize) -> f64 {
        self.seats[colour] as f64 / self.winners.len() as f64
    }
}

/// Elects the plurality colour of every district. The random tie rule only
/// consumes randomness when a tie actually occurs.
pub fn tally<R: Rng + ?Sized>(state: &UrnState, tie_rule: TieRule, rng: &mut R) -> ElectionResult {
    let n = state.num_districts();
    let m = state.num_colours();
    let mut winners = Vec::with_capacity(n);
    let mut tie_flags = Vec::with_capacity(n);
    let mut seats = vec![0u64; m];
    let mut leaders = Vec::with_capacity(m);
    for u in 0..n {
        let row = state.district(u);
        let top = *row.iter().max().expect("at least one colour");
        leaders.clear();
        leaders.extend((0..m).filter(|&c| row[c] == top));
        let tied = leaders.len() > 1;
        let winner = match tie_rule {
            TieRule::Random if tied => leaders[rng.random_range(0..leaders.len())],
            _ => leaders[0],
        };
        seats[winner] += 1;
        winners.push(winner);
        tie_flags.push(tied);
    }
    let grand = state.grand_total() as f64;
    let popular_shares = state
        .colour_totals()
        .into_iter()
        .map(|t| t as f64 / grand)
        .collect();
    ElectionResult {
        district_shares: state.vote_shares(),
        winners,
        seats,
        popular_shares,
        tie_flags,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("split labels {labelled} districts, state has {expected}")]
    LengthMismatch { expected: usize, labelled: usize },
    #[error("region {0} has no districts")]
    EmptyRegion(usize),
}

/// Assignment of districts to named regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionalSplit {
    pub region_names: Vec<String>,
    pub region_of_district: Vec<usize>,
}

impl RegionalSplit {
    /// The first `⌈N/2⌉` districts are "north", the rest "south".
    pub fn north_south(num_districts: usize) -> Self {
        let north = num_districts.div_ceil(2);
        RegionalSplit {
            region_names: vec!["north".into(), "south".into()],
            region_of_district: (0..num_districts).map(|u| usize::from(u >= north)).collect(),
        }
    }

    pub fn num_regions(&self) -> usize {
        self.region_names.len()
    }
}

/// Per-region colour shares: balls of each colour in the region over all
/// balls in the region.
pub fn regional_shares(state: &UrnState, split: &RegionalSplit) -> Result<Vec<Vec<f64>>, SplitError> {
    if split.region_of_district.len() != state.num_districts() {
        return Err(SplitError::LengthMismatch {
            expected: state.num_districts(),
            labelled: split.region_of_district.len(),
        });
    }
    let m = state.num_colours();
    let mut totals = vec![vec![0u64; m]; split.num_regions()];
    let mut districts = vec![0usize; split.num_regions()];
    for (u, &r) in split.region_of_district.iter().enumerate() {
        districts[r] += 1;
        for (t, &c) in totals[r].iter_mut().zip(state.district(u)) {
            *t += c;
        }
    }
    if let Some(r) = districts.iter().position(|&d| d == 0) {
        return Err(SplitError::EmptyRegion(r));
    }
    Ok(totals
        .into_iter()
        .map(|row| {
            let sum: u64 = row.iter().sum();
            row.into_iter().map(|c| c as f64 / sum as f64).collect()
        })
        .collect())
}
