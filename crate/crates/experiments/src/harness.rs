//! Replication harness: runs R independent simulations of one configuration
//! and writes the replicate dataset, summaries and a manifest.
//!
//! Replicate `r` draws all of its randomness from the stream seeded by
//! `replicate_seed(config.seed, r)`, so results do not depend on worker
//! count or scheduling. Aggregation happens in replicate-id order.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use polya_core::analytic::AnalyticCurve;
use polya_core::rng::{replicate_seed, seeded_rng};
use polya_core::stats::{
    central_slope_fit, cube_exponent_fit, equal_width_edges, histogram, mean, pearson,
    sample_variance, ReplicateDataset, ReplicateRow, SlopeFit,
};
use polya_core::{regional_shares, simulate_with, tally, RegionalSplit, SimulationConfig, TieRule};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};
use crate::plot::{self, PlotKind};

/// Which artefacts `run_experiment` writes besides the manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSet {
    pub dataset: bool,
    pub histograms: bool,
    pub correlations: bool,
    pub slope_fits: bool,
    pub plots: bool,
}

impl Default for OutputSet {
    fn default() -> Self {
        OutputSet {
            dataset: true,
            histograms: true,
            correlations: true,
            slope_fits: true,
            plots: true,
        }
    }
}

fn full_window() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub scenario: String,
    pub config: SimulationConfig,
    pub replicates: usize,
    #[serde(default)]
    pub tie_rule: TieRule,
    #[serde(default)]
    pub outputs: OutputSet,
    pub out_dir: PathBuf,
    /// Half-width around a 50% popular vote for the central slope fit.
    #[serde(default = "full_window")]
    pub slope_window: f64,
}

impl ExperimentSpec {
    pub fn new(scenario: &str, config: SimulationConfig, replicates: usize, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            scenario: scenario.to_string(),
            config,
            replicates,
            tie_rule: TieRule::default(),
            outputs: OutputSet::default(),
            out_dir: out_dir.into(),
            slope_window: full_window(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.replicates == 0 {
            return Err(ExperimentError::Usage("need at least one replicate".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| ExperimentError::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Everything recorded about one replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub replicate_id: u64,
    pub seed: u64,
    pub popular_shares: Vec<f64>,
    pub seats: Vec<u64>,
    pub district1_share: f64,
    pub north_share: f64,
    pub south_share: f64,
    /// Party-1 share in each district; not part of the CSV.
    pub district_shares: Vec<f64>,
}

impl ReplicateRecord {
    pub fn num_districts(&self) -> u64 {
        self.seats.iter().sum()
    }

    pub fn to_row(&self) -> ReplicateRow {
        ReplicateRow {
            popular_share: self.popular_shares[0],
            seat_share: self.seats[0] as f64 / self.num_districts() as f64,
            district1_share: self.district1_share,
            north_share: self.north_share,
            south_share: self.south_share,
            district_shares: (!self.district_shares.is_empty()).then(|| self.district_shares.clone()),
        }
    }
}

/// Simulates and tallies replicate `replicate_id` of `config`.
pub fn run_replicate(config: &SimulationConfig, replicate_id: u64, tie_rule: TieRule) -> Result<ReplicateRecord> {
    let seed = replicate_seed(config.seed, replicate_id);
    let mut rng = seeded_rng(seed);
    let state = simulate_with(config, &mut rng)?;
    let result = tally(&state, tie_rule, &mut rng);
    let regions = regional_shares(&state, &RegionalSplit::north_south(config.num_districts))?;
    Ok(ReplicateRecord {
        replicate_id,
        seed,
        district1_share: result.district_shares[0][0],
        north_share: regions[0][0],
        south_share: regions[1][0],
        district_shares: result.district_shares.iter().map(|row| row[0]).collect(),
        popular_shares: result.popular_shares,
        seats: result.seats,
    })
}

/// Runs replicates `0..replicates` in parallel; output is in replicate order.
pub fn run_replicates(config: &SimulationConfig, replicates: usize, tie_rule: TieRule) -> Result<Vec<ReplicateRecord>> {
    config.validate()?;
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(config, r, tie_rule))
        .collect()
}

pub fn to_dataset(records: &[ReplicateRecord]) -> Result<ReplicateDataset> {
    if records.is_empty() {
        return Err(ExperimentError::EmptyDataset);
    }
    Ok(ReplicateDataset::new(records.iter().map(ReplicateRecord::to_row).collect())?)
}

pub fn csv_header(num_colours: usize) -> Vec<String> {
    let mut h = vec!["replicate_id".to_string(), "seed".to_string()];
    h.extend((1..=num_colours).map(|c| format!("popular_share_p{c}")));
    h.extend((1..=num_colours).map(|c| format!("seats_p{c}")));
    h.extend(["district1_share_p1", "north_share_p1", "south_share_p1"].map(String::from));
    h
}

/// Writes the replicate CSV. Floats use the shortest representation that
/// round-trips, so identical runs give identical bytes.
pub fn write_dataset_csv<W: Write>(records: &[ReplicateRecord], out: W) -> csv::Result<()> {
    let m = records.first().map_or(0, |r| r.popular_shares.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(m))?;
    for r in records {
        let mut row = vec![r.replicate_id.to_string(), r.seed.to_string()];
        row.extend(r.popular_shares.iter().map(f64::to_string));
        row.extend(r.seats.iter().map(u64::to_string));
        row.extend([r.district1_share, r.north_share, r.south_share].map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset_csv(path: &Path) -> Result<Vec<ReplicateRecord>> {
    let malformed = |reason: String| ExperimentError::MalformedDataset {
        path: path.to_path_buf(),
        reason,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let header = rdr
        .headers()
        .map_err(|source| ExperimentError::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .clone();
    let m = header.iter().filter(|h| h.starts_with("popular_share_p")).count();
    let expected = csv_header(m);
    if m == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(malformed(format!("unexpected header {:?}", header)));
    }
    let mut records = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|source| ExperimentError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let float = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|e| malformed(format!("row {}: column {}: {e}", line + 1, expected[i])))
        };
        let int = |i: usize| {
            field(i)
                .parse::<u64>()
                .map_err(|e| malformed(format!("row {}: column {}: {e}", line + 1, expected[i])))
        };
        records.push(ReplicateRecord {
            replicate_id: int(0)?,
            seed: int(1)?,
            popular_shares: (0..m).map(|c| float(2 + c)).collect::<Result<_>>()?,
            seats: (0..m).map(|c| int(2 + m + c)).collect::<Result<_>>()?,
            district1_share: float(2 + 2 * m)?,
            north_share: float(3 + 2 * m)?,
            south_share: float(4 + 2 * m)?,
            district_shares: Vec::new(),
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn of(values: &[f64], edges: Vec<f64>) -> Result<Self> {
        let counts = histogram(values, &edges)?;
        Ok(Histogram { edges, counts })
    }
}

/// Party-1 summaries of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub replicates: usize,
    pub seat_mean: f64,
    pub seat_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seat_histogram: Option<Histogram>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub popular_share_histogram: Option<Histogram>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub district1_share_histogram: Option<Histogram>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub north_south_correlation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub central_slope: Option<SlopeFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cube_exponent: Option<f64>,
}

pub const SHARE_BINS: usize = 20;

/// Integer-centred bins for seat counts `0..=num_districts`.
pub fn seat_edges(num_districts: u64) -> Vec<f64> {
    (0..=num_districts + 1).map(|s| s as f64 - 0.5).collect()
}

pub fn summarize(spec: &ExperimentSpec, records: &[ReplicateRecord]) -> Result<Summary> {
    let dataset = to_dataset(records)?;
    let seats: Vec<f64> = records.iter().map(|r| r.seats[0] as f64).collect();
    let n = records[0].num_districts();
    let out = spec.outputs;
    let share_edges = || equal_width_edges(0.0, 1.0, SHARE_BINS);
    Ok(Summary {
        scenario: spec.scenario.clone(),
        replicates: records.len(),
        seat_mean: mean(&seats),
        seat_variance: (seats.len() > 1).then(|| sample_variance(&seats)),
        seat_histogram: out.histograms.then(|| Histogram::of(&seats, seat_edges(n))).transpose()?,
        popular_share_histogram: out
            .histograms
            .then(|| Histogram::of(&dataset.popular_shares(), share_edges()))
            .transpose()?,
        district1_share_histogram: out
            .histograms
            .then(|| Histogram::of(&dataset.district1_shares(), share_edges()))
            .transpose()?,
        north_south_correlation: if out.correlations {
            pearson(&dataset.north_shares(), &dataset.south_shares()).ok()
        } else {
            None
        },
        central_slope: if out.slope_fits {
            central_slope_fit(&dataset, spec.slope_window).ok()
        } else {
            None
        },
        cube_exponent: if out.slope_fits {
            cube_exponent_fit(&dataset).ok()
        } else {
            None
        },
    })
}

/// The spec as written to `manifest.json`, stamped with the crate version.
#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    code_version: &'static str,
    #[serde(flatten)]
    spec: &'a ExperimentSpec,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| ExperimentError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| ExperimentError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub records: Vec<ReplicateRecord>,
    pub dataset: ReplicateDataset,
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

/// Runs every replicate of `spec` and writes the requested outputs into
/// `spec.out_dir`: `manifest.json`, `dataset.csv`, `summary.json` and SVG
/// plots.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let dir = &spec.out_dir;
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;

    let records = run_replicates(&spec.config, spec.replicates, spec.tie_rule)?;
    let dataset = to_dataset(&records)?;
    let summary = summarize(spec, &records)?;
    let mut files = Vec::new();

    let manifest = dir.join("manifest.json");
    write_json(
        &manifest,
        &Manifest {
            code_version: env!("CARGO_PKG_VERSION"),
            spec,
        },
    )?;
    files.push(manifest);

    if spec.outputs.dataset {
        let path = dir.join("dataset.csv");
        let file = fs::File::create(&path).map_err(|e| ExperimentError::io(&path, e))?;
        write_dataset_csv(&records, std::io::BufWriter::new(file)).map_err(|source| ExperimentError::Csv {
            path: path.clone(),
            source,
        })?;
        files.push(path);
    }

    let path = dir.join("summary.json");
    write_json(&path, &summary)?;
    files.push(path);

    if spec.outputs.plots {
        let plot_dir = dir.join("plots");
        let overlay = summary.cube_exponent.map(|k| AnalyticCurve::CubeCurve { k });
        for kind in [
            PlotKind::Seats,
            PlotKind::PopularVote,
            PlotKind::DistrictShare,
            PlotKind::NorthSouth,
            PlotKind::SeatsVotes { overlay },
        ] {
            files.push(plot::emit_plot(&records, kind, &plot_dir)?);
        }
    }

    Ok(ExperimentOutcome {
        records,
        dataset,
        summary,
        files,
    })
}
