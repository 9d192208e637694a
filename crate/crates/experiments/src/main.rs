use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polya_core::analytic::AnalyticCurve;
use polya_core::rng::seeded_rng;
use polya_core::stats::{central_slope_fit, cube_exponent_fit};
use polya_core::{tally, AllocationBlock, InitialAllocation, SimulationConfig, TieRule, UrnState};
use polya_experiments::error::{ExperimentError, Result};
use polya_experiments::harness::{read_dataset_csv, run_experiment, to_dataset, ExperimentSpec};
use polya_experiments::plot::{emit_plot, PlotKind};
use polya_experiments::scenarios::{scenario, DEFAULT_TARGET, SCENARIO_NAMES};
use polya_experiments::swing::{run_swing, write_swing_csv, SwingSpec};
use polya_experiments::validate::{validate, ValidateOptions};

#[derive(Parser)]
#[command(name = "polya", version, about = "Multi-district Pólya urn election simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation from an explicit configuration.
    Simulate(SimulateArgs),
    /// Run a replicated experiment for a named scenario.
    Experiment(ExperimentArgs),
    /// Run the inter-election swing experiment.
    Swing(SwingArgs),
    /// Fit the central slope and cube-law exponent to a replicate CSV.
    Cubefit {
        dataset: PathBuf,
        /// Half-width of the window around 50% used for the slope fit.
        #[arg(long, default_value_t = 1.0)]
        window: f64,
    },
    /// Run the oracle battery; exits with status 2 if any check fails.
    Validate(ValidateArgs),
    /// Draw SVG figures from a replicate CSV.
    Plot(PlotArgs),
    /// Tabulate an analytic curve on [0, 1] as CSV.
    Curve(CurveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Random,
    LowestIndex,
}

impl From<TieArg> for TieRule {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Random => TieRule::Random,
            TieArg::LowestIndex => TieRule::LowestIndex,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON simulation config; other flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Allocation block COUNT:a,b,... (repeatable, laid out in order).
    #[arg(long = "block", value_name = "COUNT:COUNTS")]
    blocks: Vec<String>,
    #[arg(long)]
    p: Option<f64>,
    /// Reinforcement K.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long)]
    target: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "random")]
    tie_rule: TieArg,
    /// Write the final counts as CSV (district,p1..pm).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Scenario name; optional when --config supplies one.
    scenario: Option<String>,
    /// JSON experiment spec; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Balls per run.
    #[arg(long)]
    target: Option<u64>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long, value_enum)]
    tie_rule: Option<TieArg>,
}

#[derive(Args)]
struct SwingArgs {
    /// JSON swing spec; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grow: Option<u64>,
    #[arg(long)]
    rescale: Option<u64>,
    #[arg(long)]
    regrow: Option<u64>,
    /// CSV of per-replicate swing records.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Test hook: run the sampler with this imitation probability.
    #[arg(long, hide = true)]
    corrupt_imitation: Option<f64>,
}

#[derive(Args)]
struct PlotArgs {
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Figure to draw (repeatable); all figures when omitted.
    #[arg(long = "kind")]
    kinds: Vec<String>,
    /// Overlay a cube curve with this exponent on the seats-votes scatter.
    #[arg(long)]
    cube_k: Option<f64>,
}

#[derive(Args)]
struct CurveArgs {
    /// One of uniform, beta:A,B, cube:K, n2, n:N.
    curve: String,
    #[arg(long, default_value_t = 101)]
    points: usize,
}

fn usage(msg: impl Into<String>) -> ExperimentError {
    ExperimentError::Usage(msg.into())
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| ExperimentError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_block(s: &str) -> Result<AllocationBlock> {
    let bad = || usage(format!("bad block {s:?}, expected COUNT:a,b,..."));
    let (count, counts) = s.split_once(':').ok_or_else(bad)?;
    let count = count.trim().parse().map_err(|_| bad())?;
    let counts = counts
        .split(',')
        .map(|c| c.trim().parse::<u64>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    Ok(AllocationBlock::new(count, counts))
}

fn write_state_csv(state: &UrnState, path: &Path) -> Result<()> {
    let csv_err = |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["district".to_string()];
    header.extend((1..=state.num_colours()).map(|c| format!("p{c}")));
    w.write_record(&header).map_err(csv_err)?;
    for u in 0..state.num_districts() {
        let mut row = vec![(u + 1).to_string()];
        row.extend(state.district(u).iter().map(u64::to_string));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let mut config = match (&args.config, args.blocks.is_empty()) {
        (Some(path), true) => load_json::<SimulationConfig>(path)?,
        (None, false) => {
            let blocks = args.blocks.iter().map(|b| parse_block(b)).collect::<Result<_>>()?;
            let alloc = InitialAllocation::new(blocks);
            let initial = alloc.total_balls();
            SimulationConfig::from_allocation(
                alloc,
                args.p.unwrap_or(0.0),
                args.k.unwrap_or(1),
                args.target.unwrap_or(DEFAULT_TARGET.max(initial)),
                args.seed.unwrap_or(0),
            )?
        }
        (Some(_), false) => return Err(usage("give either --config or --block, not both")),
        (None, true) => return Err(usage("simulate needs --config or at least one --block")),
    };
    if let Some(p) = args.p {
        config.imitation_prob = p;
    }
    if let Some(k) = args.k {
        config.reinforcement = k;
    }
    if let Some(t) = args.target {
        config.target_total_balls = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.validate()?;

    let mut rng = seeded_rng(config.seed);
    let state = polya_core::simulate_with(&config, &mut rng)?;
    let result = tally(&state, args.tie_rule.into(), &mut rng);
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "balls {} after {} steps", state.grand_total(), state.step_count());
    for c in 0..config.num_colours {
        let _ = writeln!(
            stdout,
            "party {}: popular share {:.6}, seats {}",
            c + 1,
            result.popular_shares[c],
            result.seats[c]
        );
    }
    if let Some(out) = &args.out {
        write_state_csv(&state, out)?;
    }
    Ok(())
}

fn experiment_cmd(args: ExperimentArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => {
            let name = args
                .scenario
                .as_deref()
                .ok_or_else(|| usage(format!("experiment needs a scenario, one of: {}", SCENARIO_NAMES.join(", "))))?;
            let out = args.out.clone().ok_or_else(|| usage("experiment needs --out"))?;
            ExperimentSpec::new(name, scenario(name, 0.0)?, 1000, out)
        }
    };
    if let (Some(name), Some(_)) = (&args.scenario, &args.config) {
        let fresh = scenario(name, spec.config.imitation_prob)?;
        spec.config.num_districts = fresh.num_districts;
        spec.config.num_colours = fresh.num_colours;
        spec.config.reinforcement = fresh.reinforcement;
        spec.config.initial_allocation = fresh.initial_allocation;
        spec.scenario = name.clone();
    }
    if let Some(p) = args.p {
        spec.config.imitation_prob = p;
    }
    if let Some(r) = args.reps {
        spec.replicates = r;
    }
    if let Some(s) = args.seed {
        spec.config.seed = s;
    }
    if let Some(out) = args.out {
        spec.out_dir = out;
    }
    if let Some(t) = args.target {
        spec.config.target_total_balls = t;
    }
    if let Some(w) = args.window {
        spec.slope_window = w;
    }
    if let Some(t) = args.tie_rule {
        spec.tie_rule = t.into();
    }
    let outcome = run_experiment(&spec)?;
    let s = &outcome.summary;
    println!("{}: {} replicates, mean seats {:.3}", s.scenario, s.replicates, s.seat_mean);
    if let Some(r) = s.north_south_correlation {
        println!("north-south correlation {r:.4}");
    }
    if let Some(f) = &s.central_slope {
        println!("central slope {:.4} ({} points)", f.slope, f.points_used);
    }
    if let Some(k) = s.cube_exponent {
        println!("cube exponent {k:.4}");
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn swing_cmd(args: SwingArgs) -> Result<()> {
    let mut spec = match &args.config {
        Some(path) => load_json::<SwingSpec>(path)?,
        None => SwingSpec::new(args.p.unwrap_or(0.0)),
    };
    if let Some(p) = args.p {
        spec.imitation_prob = p;
    }
    if let Some(r) = args.reps {
        spec.replicates = r;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(g) = args.grow {
        spec.grow_target = g;
    }
    if let Some(r) = args.rescale {
        spec.rescale_total = r;
    }
    if let Some(r) = args.regrow {
        spec.regrow_target = r;
    }
    let outcome = run_swing(&spec)?;
    match &outcome.fit {
        Some(f) => println!(
            "swing slope {:.4}, intercept {:.5}, residual rms {:.5} ({} replicates)",
            f.slope, f.intercept, f.residual_rms, f.points_used
        ),
        None => println!("swing slope undefined ({} replicates)", outcome.records.len()),
    }
    if let Some(out) = &args.out {
        write_swing_csv(&outcome.records, out)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cubefit_cmd(dataset: &Path, window: f64) -> Result<()> {
    let records = read_dataset_csv(dataset)?;
    let data = to_dataset(&records)?;
    let slope = central_slope_fit(&data, window)?;
    println!(
        "central slope {:.4}, intercept {:.4}, residual rms {:.4} ({} points)",
        slope.slope, slope.intercept, slope.residual_rms, slope.points_used
    );
    match cube_exponent_fit(&data) {
        Ok(k) => println!("cube exponent {k:.4}"),
        Err(e) => println!("cube exponent undefined: {e}"),
    }
    Ok(())
}

fn plot_cmd(args: PlotArgs) -> Result<()> {
    let names: Vec<&str> = if args.kinds.is_empty() {
        PlotKind::NAMES.to_vec()
    } else {
        args.kinds.iter().map(String::as_str).collect()
    };
    let kinds = names
        .iter()
        .map(|n| {
            n.parse::<PlotKind>().map(|k| match k {
                PlotKind::SeatsVotes { .. } => PlotKind::SeatsVotes {
                    overlay: args.cube_k.map(|k| AnalyticCurve::CubeCurve { k }),
                },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let records = read_dataset_csv(&args.dataset)?;
    for kind in kinds {
        let path = emit_plot(&records, kind, &args.out)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_curve(s: &str) -> Result<AnalyticCurve> {
    let bad = || usage(format!("bad curve {s:?}; expected uniform, beta:A,B, cube:K, n2 or n:N"));
    let (kind, params) = s.split_once(':').unwrap_or((s, ""));
    let curve = match kind {
        "uniform" => AnalyticCurve::UniformCdf,
        "n2" => AnalyticCurve::SeatvoteN2,
        "cube" => AnalyticCurve::CubeCurve {
            k: params.parse().map_err(|_| bad())?,
        },
        "n" => AnalyticCurve::SeatvoteN {
            n: params.parse().map_err(|_| bad())?,
        },
        "beta" => {
            let (a, b) = params.split_once(',').ok_or_else(bad)?;
            AnalyticCurve::BetaCdf {
                a: a.parse().map_err(|_| bad())?,
                b: b.parse().map_err(|_| bad())?,
            }
        }
        _ => return Err(bad()),
    };
    curve.validate()?;
    Ok(curve)
}

fn curve_cmd(args: CurveArgs) -> Result<()> {
    let curve = parse_curve(&args.curve)?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "x,y");
    for (x, y) in curve.grid(args.points) {
        let _ = writeln!(out, "{x},{y}");
    }
    Ok(())
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Simulate(a) => simulate_cmd(a)?,
        Command::Experiment(a) => experiment_cmd(a)?,
        Command::Swing(a) => swing_cmd(a)?,
        Command::Cubefit { dataset, window } => cubefit_cmd(&dataset, window)?,
        Command::Plot(a) => plot_cmd(a)?,
        Command::Curve(a) => curve_cmd(a)?,
        Command::Validate(a) => {
            if a.corrupt_imitation.is_some_and(|p| !(0.0..=1.0).contains(&p)) {
                return Err(usage("--corrupt-imitation must lie in [0, 1]"));
            }
            let report = validate(&ValidateOptions {
                seed: a.seed,
                samples: a.samples,
                replicates: a.reps,
                corrupt_imitation: a.corrupt_imitation,
            });
            println!("{report}");
            return Ok(ExitCode::from(if report.passed() { 0 } else { 2 }));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
