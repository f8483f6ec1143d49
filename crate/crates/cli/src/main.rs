//! `sodbench`: evaluate saliency predictions against ground truth, fuse
//! RGB / RGB-D / depth predictions through the distance gate, compute
//! dataset statistics, rank models, and render reports.
//!
//! Exit codes: 0 success, 2 completed with per-image failures, 1 fatal.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use sodbench_core::bench::{
    self, bound_analysis, evaluate_manifest, rank_models, report, DatasetManifest, EvalOptions,
};
use sodbench_core::fusion;
use sodbench_core::map::{load_map, load_mask, save_map};
use sodbench_core::metrics::DEFAULT_BETA2;
use sodbench_core::stats::{dataset_summary, distribution, mask_stats};

#[derive(Parser)]
#[command(
    name = "sodbench",
    version,
    about = "Salient object detection benchmark engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one model's predictions on one dataset.
    Eval(EvalArgs),
    /// Build a leaderboard from a dataset-scores CSV.
    Rank(RankArgs),
    /// Select per-image final maps from RGB / RGB-D / depth predictions.
    Fuse(FuseArgs),
    /// Ground-truth mask statistics for a dataset.
    Stats(StatsArgs),
    /// Per-image best/worst envelope between two evaluation runs.
    Bounds(BoundsArgs),
    /// Render SVG curve plots from emitted curve CSVs.
    Plot(PlotArgs),
}

fn parse_unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0,1]"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not positive"))
    }
}

#[derive(Args)]
struct EvalArgs {
    /// Benchmark root holding <dataset>/{GT,depth,pred/<model>}.
    #[arg(long, required_unless_present = "manifest")]
    root: Option<PathBuf>,
    #[arg(long, required_unless_present = "manifest")]
    dataset: Option<String>,
    #[arg(long, required_unless_present = "manifest")]
    model: Option<String>,
    /// Explicit JSON manifest instead of directory scanning.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// F-measure beta^2 weighting.
    #[arg(long, default_value_t = DEFAULT_BETA2, value_parser = parse_positive)]
    beta2: f64,
    /// Worker count (falls back to SODBENCH_JOBS, then all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Min-max normalize predictions before evaluation.
    #[arg(long)]
    normalize: bool,
    /// Output directory for records/scores/curve files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RankArgs {
    /// CSV with columns model,dataset,s,f,e,mae (a previously emitted
    /// leaderboard CSV also works).
    #[arg(long)]
    scores: PathBuf,
    /// Output directory for leaderboard.{csv,md,json}.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FuseArgs {
    /// Directory of RGB-only prediction maps.
    #[arg(long)]
    rgb: PathBuf,
    /// Directory of RGB-D prediction maps.
    #[arg(long)]
    rgbd: PathBuf,
    /// Directory of depth-only prediction maps.
    #[arg(long)]
    depth: PathBuf,
    /// Gate threshold on the RGB-D vs depth map distance.
    #[arg(long, default_value_t = fusion::DEFAULT_GATE_THRESHOLD, value_parser = parse_unit_interval)]
    t: f64,
    /// Extra thresholds to sweep (comma separated); per-t gate counts go
    /// to sweep.csv.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<f64>,
    /// Output directory for fused maps and the decision CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Directory of ground-truth masks.
    #[arg(long)]
    gt: PathBuf,
    /// Histogram bin count for the distribution CSVs.
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    /// Records CSV of the first run.
    #[arg(long)]
    a: PathBuf,
    /// Records CSV of the second run.
    #[arg(long)]
    b: PathBuf,
    /// Which per-image score to bound.
    #[arg(long, default_value = "s_measure",
          value_parser = ["mae", "f_max", "f_adaptive", "s_measure", "e_max", "bce"])]
    metric: String,
    /// Optional JSON output path (stdout otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory of *.curve.csv files (one per model).
    #[arg(long)]
    curves: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    svg: PathBuf,
    /// pr: precision vs recall; f: F-measure vs threshold.
    #[arg(long, default_value = "pr", value_parser = ["pr", "f"])]
    kind: String,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Eval(args) => cmd_eval(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Fuse(args) => cmd_fuse(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn resolve_jobs(flag: Option<usize>) -> Result<usize> {
    let jobs = match flag {
        Some(n) => n,
        None => match std::env::var("SODBENCH_JOBS") {
            Ok(v) => v
                .parse()
                .with_context(|| format!("SODBENCH_JOBS='{v}' is not a worker count"))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if jobs == 0 {
        bail!("worker count must be >= 1");
    }
    Ok(jobs)
}

/// Creates the output directory and proves it is writable before any work.
fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"ok").with_context(|| format!("{} is not writable", dir.display()))?;
    fs::remove_file(&probe).ok();
    Ok(())
}

fn png_stems(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).with_context(|| format!("cannot read {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path);
            }
        }
    }
    Ok(out)
}

fn cmd_eval(args: EvalArgs) -> Result<i32> {
    prepare_out_dir(&args.out)?;
    let manifest = match &args.manifest {
        Some(path) => DatasetManifest::from_json_file(path)?,
        None => {
            let root = args.root.as_ref().expect("clap enforces root");
            let dataset = args.dataset.as_ref().expect("clap enforces dataset");
            let model = args.model.as_ref().expect("clap enforces model");
            let scan = bench::scan_manifest(root, dataset, model)?;
            for stem in &scan.unmatched_preds {
                eprintln!("warning: prediction '{stem}' has no ground truth; skipped");
            }
            for stem in &scan.unmatched_gts {
                eprintln!("warning: ground truth '{stem}' has no prediction; skipped");
            }
            scan.manifest
        }
    };

    let opts = EvalOptions {
        beta2: args.beta2,
        jobs: resolve_jobs(args.jobs)?,
        normalize: args.normalize,
    };
    eprintln!(
        "evaluating {} pairs ({} on {}) with {} workers",
        manifest.pairs.len(),
        manifest.model,
        manifest.name,
        opts.jobs
    );
    let started = Instant::now();
    let outcome = evaluate_manifest(&manifest, &opts)?;

    let records = args.out.join(format!("{}.records.csv", outcome.model));
    let scores = args.out.join(format!("{}.scores.json", outcome.model));
    let curve = args.out.join(format!("{}.curve.csv", outcome.model));
    report::write_records_csv(&records, &outcome)?;
    report::write_scores_json(&scores, &outcome)?;
    report::write_mean_curve_csv(&curve, &outcome.mean_curve)?;

    eprintln!(
        "evaluated {} images in {:.2}s -> {}",
        outcome.scores.images,
        started.elapsed().as_secs_f64(),
        records.display()
    );
    if outcome.has_failures() {
        for f in &outcome.failures {
            eprintln!("failed: {}: {}", f.stem, f.reason);
        }
        eprintln!(
            "{} image(s) failed; means exclude them",
            outcome.failures.len()
        );
        return Ok(2);
    }
    Ok(0)
}

fn cmd_rank(args: RankArgs) -> Result<i32> {
    prepare_out_dir(&args.out)?;
    let rows = report::read_score_rows_csv(&args.scores)?;
    let leaderboard = rank_models(&rows)?;
    for model in &leaderboard.excluded {
        eprintln!("warning: '{model}' excluded (missing dataset cells)");
    }
    report::write_leaderboard_csv(&args.out.join("leaderboard.csv"), &leaderboard)?;
    report::write_leaderboard_markdown(&args.out.join("leaderboard.md"), &leaderboard)?;
    report::write_leaderboard_json(&args.out.join("leaderboard.json"), &leaderboard)?;
    print!("{}", report::leaderboard_markdown(&leaderboard));
    Ok(0)
}

fn cmd_fuse(args: FuseArgs) -> Result<i32> {
    prepare_out_dir(&args.out)?;
    let maps_dir = args.out.join("maps");
    prepare_out_dir(&maps_dir)?;

    let rgb = png_stems(&args.rgb)?;
    let rgbd = png_stems(&args.rgbd)?;
    let depth = png_stems(&args.depth)?;

    let mut failures = 0usize;
    let mut decisions = String::from("image,delta,gate\n");
    let mut distances: Vec<(String, f64)> = Vec::new();
    for (stem, rgbd_path) in &rgbd {
        let (Some(rgb_path), Some(depth_path)) = (rgb.get(stem), depth.get(stem)) else {
            eprintln!("failed: {stem}: missing rgb or depth counterpart");
            failures += 1;
            continue;
        };
        let result = (|| -> Result<()> {
            let s_rgb = load_map(rgb_path)?;
            let s_rgbd = load_map(rgbd_path)?;
            let s_depth = load_map(depth_path)?;
            let decision = fusion::select(&s_rgb, &s_rgbd, &s_depth, args.t)?;
            save_map(&maps_dir.join(format!("{stem}.png")), &decision.output)?;
            decisions.push_str(&format!(
                "{stem},{},{}\n",
                decision.distance,
                decision.gate.as_str()
            ));
            distances.push((stem.clone(), decision.distance));
            Ok(())
        })();
        if let Err(e) = result {
            eprintln!("failed: {stem}: {e:#}");
            failures += 1;
        }
    }
    if distances.is_empty() {
        bail!("no image triple could be fused");
    }
    fs::write(args.out.join("decisions.csv"), decisions)?;

    if !args.sweep.is_empty() {
        let mut sweep = String::from("t,kept_depth,discarded_depth\n");
        for &t in &args.sweep {
            if !(0.0..=1.0).contains(&t) {
                bail!("sweep threshold {t} is outside [0,1]");
            }
            let kept = distances.iter().filter(|(_, d)| *d <= t).count();
            sweep.push_str(&format!("{t},{kept},{}\n", distances.len() - kept));
        }
        fs::write(args.out.join("sweep.csv"), sweep)?;
    }

    let kept = distances.iter().filter(|(_, d)| *d <= args.t).count();
    eprintln!(
        "fused {} images (kept depth for {kept}, fell back for {}); {failures} failed",
        distances.len(),
        distances.len() - kept
    );
    Ok(if failures > 0 { 2 } else { 0 })
}

fn cmd_stats(args: StatsArgs) -> Result<i32> {
    prepare_out_dir(&args.out)?;
    if args.bins == 0 {
        bail!("--bins must be >= 1");
    }
    let files = png_stems(&args.gt)?;
    if files.is_empty() {
        bail!("no mask files under {}", args.gt.display());
    }

    let mut masks = Vec::new();
    let mut per_mask = String::from("stem,r_o,r_m,size,components\n");
    let mut empty = 0usize;
    for (stem, path) in &files {
        let mask = load_mask(path).with_context(|| format!("loading {stem}"))?;
        match mask_stats(&mask) {
            Ok(s) => {
                per_mask.push_str(&format!(
                    "{stem},{},{},{},{}\n",
                    s.r_o, s.r_m, s.size, s.components
                ));
                masks.push(mask);
            }
            Err(_) => {
                eprintln!("flagged: {stem}: mask has no foreground");
                empty += 1;
            }
        }
    }
    let summary = dataset_summary(&masks)?;
    fs::write(args.out.join("per_mask.csv"), per_mask)?;
    let mut summary_json = serde_json::to_string_pretty(&summary)?;
    summary_json.push('\n');
    fs::write(args.out.join("summary.json"), summary_json)?;

    let stats: Vec<_> = masks.iter().map(|m| mask_stats(m).unwrap()).collect();
    for (name, values) in [
        ("size", stats.iter().map(|s| s.size).collect::<Vec<_>>()),
        ("r_o", stats.iter().map(|s| s.r_o).collect::<Vec<_>>()),
        ("r_m", stats.iter().map(|s| s.r_m).collect::<Vec<_>>()),
    ] {
        let hist = distribution(&values, args.bins)?;
        let mut csv = String::from("bin_low,bin_high,probability\n");
        for (i, p) in hist.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{p}\n",
                i as f64 / args.bins as f64,
                (i + 1) as f64 / args.bins as f64
            ));
        }
        fs::write(args.out.join(format!("{name}_hist.csv")), csv)?;
    }

    eprintln!(
        "stats over {} masks ({empty} empty, flagged) -> {}",
        summary.images,
        args.out.display()
    );
    Ok(if empty > 0 { 2 } else { 0 })
}

fn cmd_bounds(args: BoundsArgs) -> Result<i32> {
    let a = report::read_records_csv(&args.a)?;
    let b = report::read_records_csv(&args.b)?;
    let pick = |row: &report::RecordRow| -> f64 {
        match args.metric.as_str() {
            "mae" => row.mae,
            "f_max" => row.f_max,
            "f_adaptive" => row.f_adaptive,
            "s_measure" => row.s_measure,
            "e_max" => row.e_max,
            _ => row.bce,
        }
    };
    let b_by_stem: BTreeMap<&str, &report::RecordRow> =
        b.iter().map(|r| (r.stem.as_str(), r)).collect();
    let mut pairs = Vec::new();
    let mut unmatched = 0usize;
    for row in &a {
        match b_by_stem.get(row.stem.as_str()) {
            Some(other) => pairs.push((pick(row), pick(other))),
            None => {
                eprintln!(
                    "warning: stem '{}' missing from {}",
                    row.stem,
                    args.b.display()
                );
                unmatched += 1;
            }
        }
    }
    unmatched += b.len() - pairs.len();
    let bounds = bound_analysis(&pairs)?;

    let doc = serde_json::json!({
        "metric": args.metric,
        "images": bounds.images,
        "lower": bounds.lower,
        "upper": bounds.upper,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&doc)?);
    match &args.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(if unmatched > 0 { 2 } else { 0 })
}

fn cmd_plot(args: PlotArgs) -> Result<i32> {
    let mut series = Vec::new();
    let mut names: Vec<(String, PathBuf)> = Vec::new();
    for entry in fs::read_dir(&args.curves)
        .with_context(|| format!("cannot read {}", args.curves.display()))?
    {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|s| s.to_str()) else {
            continue;
        };
        if let Some(model) = name.strip_suffix(".curve.csv") {
            names.push((model.to_string(), path.clone()));
        }
    }
    names.sort();
    for (model, path) in names {
        series.push((model, report::read_curve_csv(&path)?));
    }
    if series.is_empty() {
        bail!("no *.curve.csv files under {}", args.curves.display());
    }
    let svg = match args.kind.as_str() {
        "f" => report::svg_f_curves(&series),
        _ => report::svg_pr_curves(&series),
    };
    report::write_svg(&args.svg, &svg)?;
    eprintln!("wrote {} ({} series)", args.svg.display(), series.len());
    Ok(0)
}
