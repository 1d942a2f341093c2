//! Batch command-line interface.
//!
//! One subcommand per pipeline stage: `align`, `dtw`, `cluster`,
//! `recognize`, `simulate`, `encode`, `detect`. All outputs are UTF-8
//! CSV/JSON on stdout or in files; logs go to stderr. Exit codes: 0 for
//! success (or a recognized route), 1 for usage or data errors, 2 when
//! `recognize` concludes the journey is a new route.
//!
//! Configuration precedence is flags, then the `ROUTEWARP_SEED` /
//! `ROUTEWARP_THREADS` environment variables, then built-in defaults.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::align::{align_trace_with, INTERACTION_SUSTAIN, INTERACTION_THRESHOLD};
use crate::detect::{
    classify, roc_auc, roc_curve, stratified_split, train_tree, window_features, ActivityClass,
    ConfusionMatrix, DecisionTree, LabeledWindow,
};
use crate::dtw::{dtw_gps, dtw_series, WarpMode, WarpResult};
use crate::maneuvers::{encode_turns, extract_turns, uniqueness_study, GridNetwork, TURN_ONSET};
use crate::mining::{
    bic_curve, cluster_gps_partition, corrected_rand, dissimilarity_matrix, estimate_k,
    gps_dissimilarity, k_medoids, significant_routes, variation_of_information, RouteModel,
    DEFAULT_TAU,
};
use crate::stream::{replay, StreamState, Verdict};
use crate::synth::{synth_corpus, synth_null_trace, CorpusSpec, OrientationMode};
use crate::trace_io::{
    parse_aligned_csv, parse_gps_csv, parse_imu_csv, write_gps_csv, write_imu_csv,
    AngularSpeedSeries,
};

const EXIT_OK: i32 = 0;
const EXIT_ERROR: i32 = 1;
const EXIT_NEW_ROUTE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "routewarp",
    about = "Recognize repeated vehicle journeys from phone inertial sensors",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rotate a raw IMU trace into the vehicle frame and emit 1 Hz yaw rate
    Align(AlignArgs),
    /// Warping distance between two aligned series (or GPS trajectories)
    Dtw(DtwArgs),
    /// Mine a journey directory into a route model
    Cluster(ClusterArgs),
    /// Match a journey against a route model
    Recognize(RecognizeArgs),
    /// Generate a labeled synthetic corpus
    Simulate(SimulateArgs),
    /// Turn-substring encoding and the grid uniqueness study
    Encode(EncodeArgs),
    /// Driving/non-driving window classifier
    Detect(DetectArgs),
}

#[derive(Args)]
struct AlignArgs {
    /// Raw IMU CSV (t,ax,ay,az,gx,gy,gz)
    input: PathBuf,
    /// Aligned-series CSV to write (t,omega_z,masked)
    #[arg(short, long)]
    output: PathBuf,
    /// Append detected interaction intervals as comment rows
    #[arg(long)]
    report_interactions: bool,
    /// Gyro magnitude (rad/s) treated as user interaction
    #[arg(long, default_value_t = INTERACTION_THRESHOLD)]
    threshold: f64,
    /// Minimum interaction duration (s)
    #[arg(long, default_value_t = INTERACTION_SUSTAIN)]
    sustain: f64,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DtwMode {
    Full,
    Open,
    OpenBoth,
}

#[derive(Args)]
struct DtwArgs {
    /// First series (aligned CSV, or GPS CSV with --gps)
    a: PathBuf,
    /// Second series
    b: PathBuf,
    #[arg(long, value_enum, default_value_t = DtwMode::Full)]
    mode: DtwMode,
    /// Write the warping path as CSV (k,i,j)
    #[arg(long)]
    path: Option<PathBuf>,
    /// Inputs are GPS trajectories (t,lat,lon); cost is great-circle meters
    #[arg(long)]
    gps: bool,
}

#[derive(Args)]
struct ClusterArgs {
    /// Directory of journeys (trace_*.csv raw IMU; gps_*.csv optional)
    dir: PathBuf,
    /// Cluster count: a number, or `auto` for BIC selection
    #[arg(long, default_value = "auto")]
    k: String,
    /// Largest k tried when k is auto
    #[arg(long)]
    k_max: Option<usize>,
    /// Significance threshold: clusters with more than tau members
    #[arg(long, default_value_t = DEFAULT_TAU)]
    tau: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Route-model JSON to write
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Partition CSV to write (trace_id,cluster)
    #[arg(long)]
    partition: Option<PathBuf>,
    /// BIC curve CSV to write (k,bic)
    #[arg(long)]
    bic: Option<PathBuf>,
    /// Also cluster the GPS trajectories and print partition agreement
    #[arg(long)]
    compare_gps: bool,
}

#[derive(Args)]
struct RecognizeArgs {
    /// Journey to match: raw IMU CSV or aligned CSV (sniffed by header)
    trace: PathBuf,
    /// Route-model JSON from `cluster`
    #[arg(long)]
    model: PathBuf,
    /// Feed the journey in batches like the live pipeline
    #[arg(long)]
    stream: bool,
    /// Batch length in seconds of 1 Hz data
    #[arg(long, default_value_t = 240)]
    batch_seconds: usize,
    /// Replay report CSV (batch,elapsed_s,best_cluster,best_distance,verdict)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Output directory for the corpus
    #[arg(short, long)]
    output: PathBuf,
    /// Grid as ROWSxCOLS
    #[arg(long, default_value = "48x48")]
    grid: String,
    /// Block spacing in meters
    #[arg(long, default_value_t = 100.0)]
    spacing: f64,
    #[arg(long, default_value_t = 8)]
    routes: usize,
    #[arg(long, default_value_t = 5)]
    traversals: usize,
    /// IMU sampling rate, Hz
    #[arg(long, default_value_t = 50.0)]
    rate: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Fraction of route edges replaced by a detour per traversal
    #[arg(long, default_value_t = 0.0)]
    detour_frac: f64,
    #[arg(long, default_value_t = crate::synth::DEFAULT_GYRO_SIGMA)]
    gyro_noise: f64,
    #[arg(long, default_value_t = crate::synth::DEFAULT_ACCEL_SIGMA)]
    accel_noise: f64,
    /// Keep the phone in the vehicle frame instead of random orientations
    #[arg(long)]
    identity_orientation: bool,
    /// Scripted phone-handling event as START,DURATION seconds (repeatable)
    #[arg(long, value_parser = parse_interaction)]
    interaction: Vec<(f64, f64)>,
    /// Also write this many non-driving traces (null_*.csv) for `detect`
    #[arg(long, default_value_t = 0)]
    null_traces: usize,
}

#[derive(Args)]
struct EncodeArgs {
    /// Aligned-series CSV to encode (omit with --study)
    aligned: Option<PathBuf>,
    /// Turn onset threshold, rad/s
    #[arg(long, default_value_t = TURN_ONSET)]
    onset: f64,
    /// Run the grid uniqueness study instead of encoding one journey
    #[arg(long)]
    study: bool,
    /// Study grid as ROWSxCOLS
    #[arg(long, default_value = "30x30")]
    grid: String,
    /// Block spacing in meters
    #[arg(long, default_value_t = 100.0)]
    spacing: f64,
    #[arg(long, default_value_t = 1000)]
    trips: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Pairwise study CSV (overlap_m,lcs_turns[,lcs_subseq])
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Binned summary CSV (bin_low_m,bin_high_m,pairs,mean_lcs)
    #[arg(long)]
    bins: Option<PathBuf>,
    /// Per-trip CSV (trip_id,turns,string)
    #[arg(long)]
    trips_csv: Option<PathBuf>,
    /// Add the longest-common-subsequence column for comparison
    #[arg(long)]
    subsequence: bool,
}

#[derive(Args)]
struct DetectArgs {
    #[command(subcommand)]
    action: DetectAction,
}

#[derive(Subcommand)]
enum DetectAction {
    /// Train the driving detector on a corpus directory
    Train(DetectTrainArgs),
    /// Classify a trace with a trained tree
    Classify(DetectClassifyArgs),
}

#[derive(Args)]
struct DetectTrainArgs {
    /// Corpus directory: trace_*.csv are driving, null_*.csv are not
    #[arg(long)]
    corpus: PathBuf,
    /// Feature window, seconds
    #[arg(long, default_value_t = 2.0)]
    window: f64,
    /// Training fraction of the stratified split
    #[arg(long, default_value_t = 0.6)]
    split: f64,
    #[arg(long, default_value_t = 4)]
    max_depth: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Tree JSON to write
    #[arg(short, long)]
    output: PathBuf,
    /// Held-out confusion matrix CSV (percent of test set)
    #[arg(long)]
    confusion: Option<PathBuf>,
    /// Held-out ROC CSV (threshold,fpr,tpr)
    #[arg(long)]
    roc: Option<PathBuf>,
}

#[derive(Args)]
struct DetectClassifyArgs {
    /// IMU trace to classify
    trace: PathBuf,
    /// Tree JSON from `detect train`
    #[arg(long)]
    tree: PathBuf,
    /// Feature window, seconds
    #[arg(long, default_value_t = 2.0)]
    window: f64,
}

fn parse_interaction(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| "expected START,DURATION".to_string())?;
    let start: f64 = a.trim().parse().map_err(|_| format!("bad start `{a}`"))?;
    let dur: f64 = b.trim().parse().map_err(|_| format!("bad duration `{b}`"))?;
    Ok((start, dur))
}

fn parse_grid(s: &str, spacing: f64) -> Result<GridNetwork, String> {
    let (r, c) = s
        .split_once('x')
        .ok_or_else(|| format!("grid `{s}` is not ROWSxCOLS"))?;
    let rows: usize = r.parse().map_err(|_| format!("bad rows `{r}`"))?;
    let cols: usize = c.parse().map_err(|_| format!("bad cols `{c}`"))?;
    if rows < 2 || cols < 2 || spacing <= 0.0 {
        return Err("grid needs at least 2x2 nodes and positive spacing".into());
    }
    Ok(GridNetwork::new(rows, cols, spacing))
}

fn env_seed() -> u64 {
    std::env::var("ROUTEWARP_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(42)
}

fn init_threads() {
    if let Some(n) = std::env::var("ROUTEWARP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // ignore failure: the global pool may already exist in-process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// Entry point for the `routewarp` binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit(2); usage problems are exit 1 here
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    init_threads();
    let result = match cli.command {
        Command::Align(args) => cmd_align(args),
        Command::Dtw(args) => cmd_dtw(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Recognize(args) => cmd_recognize(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Encode(args) => cmd_encode(args),
        Command::Detect(args) => cmd_detect(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

fn cmd_align(args: AlignArgs) -> CmdResult {
    let trace = parse_imu_csv(&args.input)?;
    if let Some(w) = trace.jitter_warning() {
        eprintln!("warning: {w}");
    }
    let stem = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());
    let out = align_trace_with(&trace, args.threshold, args.sustain, &stem)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let mut text = crate::trace_io::aligned_to_string(&out.series);
    if args.report_interactions {
        for (a, b) in &out.interactions {
            writeln!(text, "# interaction,{a},{b}").unwrap();
        }
    }
    fs::write(&args.output, text)?;
    Ok(EXIT_OK)
}

fn write_warp_path(path: &Path, result: &WarpResult) -> std::io::Result<()> {
    let mut out = String::from("k,i,j\n");
    for (k, (i, j)) in result.path.iter().enumerate() {
        writeln!(out, "{k},{i},{j}").unwrap();
    }
    fs::write(path, out)
}

fn cmd_dtw(args: DtwArgs) -> CmdResult {
    let result = if args.gps {
        let a = parse_gps_csv(&args.a)?;
        let b = parse_gps_csv(&args.b)?;
        if args.mode != DtwMode::Full {
            return Err("GPS trajectories are compared with full DTW".into());
        }
        dtw_gps(&a, &b)?
    } else {
        let a = parse_aligned_csv(&args.a)?;
        let b = parse_aligned_csv(&args.b)?;
        let mode = match args.mode {
            DtwMode::Full => WarpMode::Full,
            DtwMode::Open => WarpMode::OpenEnded,
            DtwMode::OpenBoth => WarpMode::OpenBoth,
        };
        dtw_series(&a, &b, mode)?
    };
    if let Some(p) = &args.path {
        write_warp_path(p, &result)?;
    }
    println!("{:.6}", result.distance);
    eprintln!(
        "raw_cost={:.6} matched_x={}..{} matched_y={}..{}",
        result.raw_cost,
        result.matched_x.0,
        result.matched_x.1,
        result.matched_y.0,
        result.matched_y.1
    );
    Ok(EXIT_OK)
}

fn journey_files(dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, std::io::Error> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map_or(false, |n| n.starts_with(prefix) && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn load_aligned_dir(dir: &Path) -> Result<Vec<AngularSpeedSeries>, Box<dyn std::error::Error>> {
    let files = journey_files(dir, "trace_")?;
    if files.len() < 2 {
        return Err(format!("{}: need at least 2 trace_*.csv journeys", dir.display()).into());
    }
    files
        .iter()
        .map(|f| {
            let trace = parse_imu_csv(f)?;
            let id = f
                .file_stem()
                .unwrap()
                .to_string_lossy()
                .trim_start_matches("trace_")
                .to_string();
            let out = align_trace_with(&trace, INTERACTION_THRESHOLD, INTERACTION_SUSTAIN, &id)?;
            Ok(out.series)
        })
        .collect()
}

fn cmd_cluster(args: ClusterArgs) -> CmdResult {
    let seed = args.seed.unwrap_or_else(env_seed);
    let aligned = load_aligned_dir(&args.dir)?;
    let d = dissimilarity_matrix(&aligned)?;
    let n = d.len();
    let k_max = args.k_max.unwrap_or_else(|| (n - 1).min(12));
    let k = match args.k.as_str() {
        "auto" => {
            let k = estimate_k(&d, k_max, seed)?;
            eprintln!("estimated k={k} (BIC over k=1..{k_max})");
            k
        }
        other => other
            .parse::<usize>()
            .map_err(|_| format!("bad k `{other}`"))?,
    };
    if let Some(p) = &args.bic {
        let curve = bic_curve(&d, k_max, seed)?;
        let mut out = String::from("k,bic\n");
        for (kk, b) in curve {
            writeln!(out, "{kk},{b}").unwrap();
        }
        fs::write(p, out)?;
    }
    let (partition, medoids) = k_medoids(&d, k, seed)?;
    let model = RouteModel::build(&d, &partition, &medoids, &aligned, args.tau);
    let significant = significant_routes(&partition, args.tau);
    println!(
        "k={} tau={} significant_clusters={:?} medoids={:?}",
        k,
        args.tau,
        significant,
        medoids.iter().map(|&m| d.ids[m].clone()).collect::<Vec<_>>()
    );
    if let Some(p) = &args.output {
        fs::write(p, serde_json::to_string_pretty(&model)?)?;
    }
    if let Some(p) = &args.partition {
        let mut out = String::from("trace_id,cluster\n");
        for (id, label) in d.ids.iter().zip(partition.labels()) {
            writeln!(out, "{id},{label}").unwrap();
        }
        fs::write(p, out)?;
    }
    if args.compare_gps {
        let gps_files = journey_files(&args.dir, "gps_")?;
        if gps_files.len() != n {
            return Err(
                format!("found {} gps_*.csv for {} journeys", gps_files.len(), n).into(),
            );
        }
        let trajectories: Result<Vec<_>, _> = gps_files.iter().map(parse_gps_csv).collect();
        let trajectories = trajectories?;
        let ids = gps_files
            .iter()
            .map(|f| {
                f.file_stem()
                    .unwrap()
                    .to_string_lossy()
                    .trim_start_matches("gps_")
                    .to_string()
            })
            .collect();
        let gd = gps_dissimilarity(&trajectories, ids);
        let gps_partition = cluster_gps_partition(&gd, k_max, seed)?;
        let rand = corrected_rand(&partition, &gps_partition)?;
        let vi = variation_of_information(&partition, &gps_partition)?;
        println!(
            "corrected_rand={rand:.6} vi={vi:.6} gps_k={}",
            gps_partition.k()
        );
    }
    Ok(EXIT_OK)
}

fn load_series_sniffed(path: &Path) -> Result<AngularSpeedSeries, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or("").trim();
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "journey".into());
    if header == "t,omega_z,masked" {
        Ok(parse_aligned_csv(path)?)
    } else {
        let trace = parse_imu_csv(path)?;
        Ok(align_trace_with(&trace, INTERACTION_THRESHOLD, INTERACTION_SUSTAIN, &id)?.series)
    }
}

fn cmd_recognize(args: RecognizeArgs) -> CmdResult {
    let model: RouteModel = serde_json::from_str(&fs::read_to_string(&args.model)?)?;
    let series = load_series_sniffed(&args.trace)?;
    let events = if args.stream {
        replay(&series, &model, args.batch_seconds)?
    } else {
        // one-shot: feed everything, then force a decision
        let mut state = StreamState::new();
        let mut offset = 0;
        let mut events = Vec::new();
        while offset < series.len() && state.verdict().is_pending() {
            let end = (offset + args.batch_seconds).min(series.len());
            events.push(state.ingest_batch(&series.slice(offset, end), &model)?);
            offset = end;
        }
        state.finalize();
        if let Some(last) = events.last_mut() {
            if last.verdict.is_pending() {
                last.verdict = state.verdict();
            }
        }
        events
    };
    if let Some(p) = &args.report {
        let mut out = String::from("batch,elapsed_s,best_cluster,best_distance,verdict\n");
        for e in &events {
            let (best_cluster, best_distance) = e
                .distances
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(c, d)| (c as i64, *d))
                .unwrap_or((-1, f64::NAN));
            let verdict = match e.verdict {
                Verdict::Pending => "pending".to_string(),
                Verdict::Matched { cluster, .. } => format!("matched:{cluster}"),
                Verdict::NewRoute => "new_route".to_string(),
            };
            writeln!(
                out,
                "{},{},{},{},{}",
                e.at_batch, e.elapsed_s, best_cluster, best_distance, verdict
            )
            .unwrap();
        }
        fs::write(p, out)?;
    }
    match events.last().map(|e| e.verdict) {
        Some(Verdict::Matched { cluster, distance }) => {
            println!("matched,cluster={cluster},distance={distance:.6}");
            Ok(EXIT_OK)
        }
        _ => {
            println!("new_route");
            Ok(EXIT_NEW_ROUTE)
        }
    }
}

/// Everything `simulate` wrote, for byte-exact reproduction.
#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    network: GridNetwork,
    spec: CorpusSpec,
    journeys: Vec<ScenarioEntry>,
}

#[derive(Serialize, Deserialize)]
struct ScenarioEntry {
    trace_id: String,
    route_id: usize,
    scenario: crate::synth::SynthScenario,
}

fn cmd_simulate(args: SimulateArgs) -> CmdResult {
    let seed = args.seed.unwrap_or_else(env_seed);
    let network = parse_grid(&args.grid, args.spacing)?;
    let spec = CorpusSpec {
        routes: args.routes,
        traversals: args.traversals,
        rate: args.rate,
        gyro_noise_sigma: args.gyro_noise,
        accel_noise_sigma: args.accel_noise,
        detour_fraction: args.detour_frac,
        orientation: if args.identity_orientation {
            OrientationMode::Identity
        } else {
            OrientationMode::Random
        },
        interactions: args.interaction.clone(),
        seed,
    };
    let journeys = synth_corpus(&network, &spec)?;
    fs::create_dir_all(&args.output)?;
    let mut labels = String::from("trace_id,route_id\n");
    for j in &journeys {
        write_imu_csv(
            args.output.join(format!("trace_{}.csv", j.trace_id)),
            &j.trace,
        )?;
        write_gps_csv(args.output.join(format!("gps_{}.csv", j.trace_id)), &j.gps)?;
        writeln!(labels, "{},{}", j.trace_id, j.route_id).unwrap();
    }
    fs::write(args.output.join("labels.csv"), labels)?;
    for i in 0..args.null_traces {
        let t = synth_null_trace(300.0, args.rate, seed ^ (0x5eed << 8) ^ i as u64)?;
        write_imu_csv(args.output.join(format!("null_{i:03}.csv")), &t)?;
    }
    let scenario_file = ScenarioFile {
        network,
        spec,
        journeys: journeys
            .iter()
            .map(|j| ScenarioEntry {
                trace_id: j.trace_id.clone(),
                route_id: j.route_id,
                scenario: j.scenario.clone(),
            })
            .collect(),
    };
    fs::write(
        args.output.join("scenario.json"),
        serde_json::to_string_pretty(&scenario_file)?,
    )?;
    eprintln!(
        "wrote {} journeys ({} routes x {} traversals) to {}",
        journeys.len(),
        args.routes,
        args.traversals,
        args.output.display()
    );
    Ok(EXIT_OK)
}

fn cmd_encode(args: EncodeArgs) -> CmdResult {
    if args.study {
        let seed = args.seed.unwrap_or_else(env_seed);
        let network = parse_grid(&args.grid, args.spacing)?;
        let study = uniqueness_study(&network, args.trips, seed);
        if let Some(p) = &args.output {
            let mut out = if args.subsequence {
                String::from("overlap_m,lcs_turns,lcs_subseq\n")
            } else {
                String::from("overlap_m,lcs_turns\n")
            };
            for pt in &study.pairs {
                if args.subsequence {
                    writeln!(
                        out,
                        "{},{},{}",
                        pt.overlap_m, pt.lcs_turns, pt.lcs_subsequence
                    )
                    .unwrap();
                } else {
                    writeln!(out, "{},{}", pt.overlap_m, pt.lcs_turns).unwrap();
                }
            }
            fs::write(p, out)?;
        }
        if let Some(p) = &args.bins {
            let mut out = String::from("bin_low_m,bin_high_m,pairs,mean_lcs\n");
            for (lo, hi, n, mean) in &study.bins {
                writeln!(out, "{lo},{hi},{n},{mean}").unwrap();
            }
            fs::write(p, out)?;
        }
        if let Some(p) = &args.trips_csv {
            let mut out = String::from("trip_id,turns,string\n");
            for (i, (turns, s)) in study.trips.iter().enumerate() {
                writeln!(out, "{i},{turns},{s}").unwrap();
            }
            fs::write(p, out)?;
        }
        println!(
            "trips={} pairs={} mean_turns={:.2} zero_overlap_mean_lcs={:.2}",
            study.trips.len(),
            study.pairs.len(),
            study.mean_turns_per_trip(),
            study.zero_overlap_mean_lcs()
        );
        return Ok(EXIT_OK);
    }
    let Some(path) = &args.aligned else {
        return Err("provide an aligned CSV, or --study".into());
    };
    let series = parse_aligned_csv(path)?;
    let events = extract_turns(&series, args.onset);
    println!("{}", encode_turns(&events));
    Ok(EXIT_OK)
}

fn load_windows(
    dir: &Path,
    window: f64,
) -> Result<Vec<LabeledWindow>, Box<dyn std::error::Error>> {
    let mut rows = Vec::new();
    for (prefix, label) in [
        ("trace_", ActivityClass::Driving),
        ("null_", ActivityClass::Null),
    ] {
        for f in journey_files(dir, prefix)? {
            let trace = parse_imu_csv(&f)?;
            for w in window_features(&trace, window)? {
                rows.push(LabeledWindow {
                    features: w.as_vector(),
                    label,
                });
            }
        }
    }
    Ok(rows)
}

fn cmd_detect(args: DetectArgs) -> CmdResult {
    match args.action {
        DetectAction::Train(t) => {
            let seed = t.seed.unwrap_or_else(env_seed);
            let rows = load_windows(&t.corpus, t.window)?;
            let (train, test) = stratified_split(&rows, t.split, seed);
            let tree = train_tree(&train, t.max_depth, seed)?;
            let m = ConfusionMatrix::evaluate(&tree, &test);
            let curve = roc_curve(&tree, &test);
            println!(
                "train={} test={} accuracy={:.4} auc={:.4}",
                train.len(),
                test.len(),
                m.accuracy(),
                roc_auc(&curve)
            );
            fs::write(&t.output, serde_json::to_string_pretty(&tree)?)?;
            if let Some(p) = &t.confusion {
                let pct = m.as_percentages();
                let mut out = String::from("actual,predicted_driving,predicted_null\n");
                writeln!(out, "driving,{:.1},{:.1}", pct[0][0], pct[0][1]).unwrap();
                writeln!(out, "null,{:.1},{:.1}", pct[1][0], pct[1][1]).unwrap();
                fs::write(p, out)?;
            }
            if let Some(p) = &t.roc {
                let mut out = String::from("threshold,fpr,tpr\n");
                for (th, fpr, tpr) in &curve {
                    writeln!(out, "{th},{fpr},{tpr}").unwrap();
                }
                fs::write(p, out)?;
            }
            Ok(EXIT_OK)
        }
        DetectAction::Classify(c) => {
            let tree: DecisionTree = serde_json::from_str(&fs::read_to_string(&c.tree)?)?;
            let trace = parse_imu_csv(&c.trace)?;
            let windows = window_features(&trace, c.window)?;
            let driving = windows
                .iter()
                .filter(|w| classify(&tree, &w.as_vector()).0 == ActivityClass::Driving)
                .count();
            let fraction = driving as f64 / windows.len() as f64;
            let verdict = if 2 * driving >= windows.len() {
                "driving"
            } else {
                "null"
            };
            println!(
                "windows={} driving_fraction={fraction:.3} verdict={verdict}",
                windows.len()
            );
            Ok(EXIT_OK)
        }
    }
}
