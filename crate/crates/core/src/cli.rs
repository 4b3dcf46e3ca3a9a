//! Command-line front end: fixture generation, building, verification,
//! statistics and export.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::assembly::{build_construction, BuildConfig};
use crate::hnets::build_nets;
use crate::metric::{self, MetricSpace};
use crate::spanner::Spanner;
use crate::verify::{self, lemmas, FaultMode};

/// Largest input for which `build` and `stats` report the hop diameter.
pub const HOP_STATS_LIMIT: usize = 512;

#[derive(Debug, Parser)]
#[command(
    name = "ftspanner",
    version,
    about = "Fault-tolerant spanners for doubling metrics"
)]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a point file.
    Gen(GenArgs),
    /// Build a spanner and print its statistics.
    Build(BuildArgs),
    /// Check a spanner against its point set; exits 1 on any violation.
    Verify(VerifyArgs),
    /// Print statistics of an existing spanner.
    Stats(StatsArgs),
    /// Convert a spanner file to DOT, JSON or CSV.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    UniformCube,
    Clustered,
    ExpSpreadLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub k: usize,
    /// Doubling dimension; defaults to the coordinate dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Output format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Check the triangle inequality of matrix inputs.
    #[arg(long)]
    pub validate: bool,
    /// Verify the result over every failure set; exits 1 on a violation.
    #[arg(long)]
    pub exhaustive_verify: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub spanner: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also rebuild the construction and run the structural checks.
    #[arg(long)]
    pub lemmas: bool,
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub points: PathBuf,
    #[arg(long)]
    pub spanner: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Stats {
    pub schema: u32,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub edges: usize,
    pub max_degree: usize,
    pub degree_by_tag: BTreeMap<String, usize>,
    pub lightness: f64,
    /// Failure-free hop diameter at stretch `1 + eps`.
    pub hop_diameter_at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub build_millis: Option<u128>,
}

pub fn stats(s: &Spanner, ms: &MetricSpace, k: usize, eps: f64) -> Stats {
    let census = verify::degree_census(s);
    let hop_diameter_at = (ms.len() <= HOP_STATS_LIMIT)
        .then(|| verify::hop_bounded_stretch(s, ms, 1.0 + eps, &[]).hops)
        .flatten();
    Stats {
        schema: 1,
        n: ms.len(),
        k,
        eps,
        edges: s.edge_count(),
        max_degree: census.max_degree,
        degree_by_tag: census.by_tag,
        lightness: verify::lightness(s, ms),
        hop_diameter_at,
        build_millis: None,
    }
}

/// Points of one generated fixture. Identical arguments give identical
/// coordinates.
pub fn generate(kind: GenKind, n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let dim = dim.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        GenKind::UniformCube => (0..n)
            .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
            .collect(),
        GenKind::Clustered => {
            let centers = ((n as f64).sqrt().ceil() as usize).max(1);
            let centers: Vec<Vec<f64>> = (0..centers)
                .map(|_| (0..dim).map(|_| rng.random::<f64>() * 100.0).collect())
                .collect();
            let noise = Normal::new(0.0, 1.0).expect("unit variance");
            (0..n)
                .map(|_| {
                    let c = &centers[rng.random_range(0..centers.len())];
                    c.iter().map(|&x| x + noise.sample(&mut rng)).collect()
                })
                .collect()
        }
        GenKind::ExpSpreadLine => (0..n)
            .map(|i| {
                let mut p = vec![0.0; dim];
                p[0] = 2f64.powi(i as i32 + 1) - 2.0;
                p
            })
            .collect(),
    }
}

fn format_of(path: &Path, explicit: Option<Format>) -> Format {
    explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        Some(e) if e.eq_ignore_ascii_case("dot") => Format::Dot,
        _ => Format::Csv,
    })
}

pub fn read_spanner(path: &Path) -> anyhow::Result<Spanner> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let s = match format_of(path, None) {
        Format::Json => Spanner::from_json(&text)?,
        Format::Csv => Spanner::from_csv(&text)?,
        Format::Dot => bail!("DOT files are export-only"),
    };
    Ok(s)
}

pub fn write_spanner(s: &Spanner, path: &Path, format: Option<Format>) -> anyhow::Result<()> {
    let text = match format_of(path, format) {
        Format::Csv => s.to_csv(),
        Format::Json => s.to_json()?,
        Format::Dot => s.to_dot(),
    };
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_points(path: &Path) -> anyhow::Result<MetricSpace> {
    metric::load(path).with_context(|| format!("loading {}", path.display()))
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run_build(a: &BuildArgs) -> anyhow::Result<i32> {
    let ms = load_points(&a.input)?;
    let mut cfg = BuildConfig::new(a.eps, a.k, a.dim.or(ms.dim()).unwrap_or(2));
    cfg.seed = a.seed;
    cfg.validate = a.validate;
    cfg.exhaustive_verify = a.exhaustive_verify;
    let start = Instant::now();
    let c = build_construction(&ms, &cfg)?;
    let millis = start.elapsed().as_millis();
    write_spanner(&c.spanner, &a.out, a.format)?;
    let mut st = stats(&c.spanner, &ms, a.k, a.eps);
    st.build_millis = Some(millis);
    print_json(&st)?;
    if cfg.exhaustive_verify {
        let r = verify::fault_stretch(
            &c.spanner,
            &ms,
            a.k,
            1.0 + a.eps,
            FaultMode::Exhaustive,
            &[],
        );
        if !r.violations.is_empty() {
            eprintln!(
                "verification failed: {}",
                serde_json::to_string(&r.violations[0])?
            );
            return Ok(1);
        }
    }
    Ok(0)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyOutput<'a> {
    passed: bool,
    report: &'a verify::VerificationReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    lemmas: Vec<lemmas::LemmaCheck>,
}

/// For each net color, its `k` lowest-index points: failing them removes
/// as much of one color tree as the budget allows.
/// Adversarial failure sets: the lowest-index members of each net color.
pub fn color_failure_sets(ms: &MetricSpace, k: usize) -> Vec<Vec<usize>> {
    let size = k.min(ms.len().saturating_sub(2));
    let Ok(nets) = ms.normalize().and_then(|(ns, _)| build_nets(&ns, size)) else {
        return Vec::new();
    };
    (0..nets.colors())
        .map(|c| {
            (0..ms.len())
                .filter(|&x| nets.color[x] == c)
                .take(size)
                .collect::<Vec<_>>()
        })
        .filter(|set| set.len() == size && size > 0)
        .collect()
}

fn run_verify(a: &VerifyArgs) -> anyhow::Result<i32> {
    let ms = load_points(&a.points)?;
    let s = read_spanner(&a.spanner)?;
    if s.n() != ms.len() {
        bail!(
            "spanner has n={} but the point file has {} points",
            s.n(),
            ms.len()
        );
    }
    let mode = match a.mode {
        ModeArg::Auto => FaultMode::Auto {
            seed: a.seed,
            trials: a.trials,
        },
        ModeArg::Exhaustive => FaultMode::Exhaustive,
        ModeArg::Sampled => FaultMode::Sampled {
            seed: a.seed,
            trials: a.trials,
        },
    };
    let extra = color_failure_sets(&ms, a.k);
    let report = verify::verify_spanner(&s, &ms, a.k, 1.0 + a.eps, mode, &extra, HOP_STATS_LIMIT);
    let checks = if a.lemmas {
        let cfg = BuildConfig::new(a.eps, a.k, a.dim.or(ms.dim()).unwrap_or(2));
        lemmas::run_all(&build_construction(&ms, &cfg)?)
    } else {
        Vec::new()
    };
    let passed = report.passed() && checks.iter().all(lemmas::LemmaCheck::passed);
    print_json(&VerifyOutput {
        passed,
        report: &report,
        lemmas: checks,
    })?;
    Ok(if passed { 0 } else { 1 })
}

fn run_stats(a: &StatsArgs) -> anyhow::Result<i32> {
    let ms = load_points(&a.points)?;
    let s = read_spanner(&a.spanner)?;
    if s.n() != ms.len() {
        bail!(
            "spanner has n={} but the point file has {} points",
            s.n(),
            ms.len()
        );
    }
    print_json(&stats(&s, &ms, a.k, a.eps))?;
    Ok(0)
}

fn dispatch(cli: &Cli) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Gen(a) => {
            let pts = generate(a.kind, a.n, a.dim, a.seed);
            metric::save_points(&a.out, a.dim.max(1), &pts)?;
            Ok(0)
        }
        Command::Build(a) => run_build(a),
        Command::Verify(a) => run_verify(a),
        Command::Stats(a) => run_stats(a),
        Command::Export(a) => {
            let s = read_spanner(&a.input)?;
            write_spanner(&s, &a.out, a.format)?;
            Ok(0)
        }
    }
}

/// Parses `std::env::args` and runs the chosen command, returning the exit
/// code. Errors are printed to stderr with code 2.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let outcome = match cli.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(anyhow::Error::from)
            .and_then(|pool| pool.install(|| dispatch(&cli))),
        None => dispatch(&cli),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
