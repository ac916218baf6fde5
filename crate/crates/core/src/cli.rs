//! Command-line front end: `density`, `census` and `normal-forms`.
//!
//! Options come from, in increasing priority: built-in defaults, the
//! `CURVECOUNT_OUT` environment variable (output directory), a `key = value`
//! config file given with `--config`, and flags. Every run leaves a
//! `manifest.json` in its output directory, including failed runs.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::census::{
    geometric_checkpoints, type_census_resumable, CensusConfig, Snapshot, SnapshotPolicy,
    DEFAULT_CHECKPOINT_COUNT, DEFAULT_CHECKPOINT_RATIO,
};
use crate::density::{density_estimate, Region};
use crate::error::{Error, Result};
use crate::freegroup::CyclicWord;
use crate::hyperbolic::PuncturedTorusStructure;
use crate::lattice::{InvariantSet, LatticePoint};
use crate::output::Manifest;
use crate::tracks::{count_normal_forms, Method, NormalFormOptions, Track, WeightVector};

pub const OUT_ENV: &str = "CURVECOUNT_OUT";
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Exit status for usage errors.
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "curvecount", about = "Counting lattice orbits, curves by length, and normal forms on train tracks")]
pub struct Cli {
    /// Output directory (default: $CURVECOUNT_OUT, then the current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// A file of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count an orbit of SL2(N) on the positive lattice in a scaled region.
    Density(DensityArgs),
    /// Count a mapping class orbit of a curve by hyperbolic length.
    Census(CensusArgs),
    /// Count normal forms of crossings on a weighted train track.
    NormalForms(NormalFormArgs),
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Orbit root `x,y`.
    #[arg(long)]
    pub root: String,
    /// `square` (unit square) or `tri` (x + y <= 1).
    #[arg(long, default_value = "square")]
    pub region: String,
    /// Comma-separated scales.
    #[arg(long = "L")]
    pub l: String,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    /// Traces `x,y` of the two generators.
    #[arg(long)]
    pub traces: String,
    #[arg(long)]
    pub seed: String,
    #[arg(long = "Lmax")]
    pub l_max: f64,
    /// Comma-separated checkpoints (default: a geometric ladder below Lmax).
    #[arg(long)]
    pub checkpoints: Option<String>,
    /// Write resumable state here after every exploration step.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Stop after this many exploration steps (for testing resumption).
    #[arg(long)]
    pub stop_after: Option<usize>,
    #[arg(long)]
    pub max_classes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct NormalFormArgs {
    #[arg(long)]
    pub track: PathBuf,
    /// Comma-separated edge weights in declaration order.
    #[arg(long)]
    pub omega: String,
    #[arg(long)]
    pub k: usize,
    /// Leaves per edge (default max(200k, 8)).
    #[arg(long)]
    pub leaves: Option<usize>,
    /// `sweep` or `exhaustive`.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub budget: Option<usize>,
}

/// Settings shared by every subcommand after merging all sources.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub out: PathBuf,
    pub workers: usize,
    pub values: BTreeMap<String, String>,
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self> {
        let mut values = match &cli.config {
            Some(p) => parse_config(&fs::read_to_string(p)?)?,
            None => BTreeMap::new(),
        };
        let out = cli
            .out
            .clone()
            .or_else(|| values.get("out").map(PathBuf::from))
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let workers = match cli.workers {
            Some(w) => w,
            None => match values.get("workers") {
                Some(w) => w.parse().map_err(|_| Error::Config(format!("bad workers value {w:?}")))?,
                None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            },
        };
        if workers == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        values.insert("out".into(), out.display().to_string());
        values.insert("workers".into(), workers.to_string());
        Ok(Self { out, workers, values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| v.parse().map_err(|_| Error::Config(format!("bad value {v:?} for {key}"))))
            .transpose()
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::Config(format!("bad {what} entry {x:?}"))))
        .collect()
}

fn parse_pair<T: std::str::FromStr + Copy>(s: &str, what: &str) -> Result<(T, T)> {
    match parse_list::<T>(s, what)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::Config(format!("{what} needs two comma-separated values, got {s:?}"))),
    }
}

fn is_usage(e: &Error) -> bool {
    matches!(e, Error::Config(_) | Error::Precondition(_) | Error::Threshold { .. } | Error::Peripheral { .. })
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let name = match &cli.command {
        Command::Density(_) => "density",
        Command::Census(_) => "census",
        Command::NormalForms(_) => "normal-forms",
    };
    let cfg = match RunConfig::resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let mut m = Manifest::new(name, BTreeMap::new());
            m.finish(Err(e.to_string()));
            let _ = m.write(&dir);
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut manifest = Manifest::new(name, cfg.values.clone());
    let outcome = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))
        .and_then(|pool| {
            pool.install(|| match &cli.command {
                Command::Density(a) => cmd_density(a, &cfg, &mut manifest),
                Command::Census(a) => cmd_census(a, &cfg, &mut manifest),
                Command::NormalForms(a) => cmd_normal_forms(a, &cfg, &mut manifest),
            })
        });
    manifest.finish(outcome.as_ref().map(|_| ()).map_err(|e| e.to_string()));
    if let Err(e) = manifest.write(&cfg.out) {
        eprintln!("error: could not write manifest: {e}");
        return EXIT_FAILURE;
    }
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if is_usage(&e) {
                EXIT_USAGE
            } else {
                EXIT_FAILURE
            }
        }
    }
}

fn write_output(dir: &Path, name: &str, format: &str, body: &str, manifest: &mut Manifest) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), body)?;
    manifest.record_output(name, format);
    Ok(())
}

pub fn cmd_density(a: &DensityArgs, cfg: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let (x, y) = parse_pair::<u64>(&a.root, "root")?;
    let root = LatticePoint::new(x, y)?;
    let region = match a.region.as_str() {
        "square" => Region::unit_square(),
        "tri" | "triangle" => Region::unit_triangle(),
        other => return Err(Error::Config(format!("unknown region {other:?}; use square or tri"))),
    };
    let schedule: Vec<u64> = parse_list(&a.l, "L")?;
    if schedule.is_empty() {
        return Err(Error::Config("empty L schedule".into()));
    }
    let epsilon = match a.epsilon {
        Some(e) => e,
        None => cfg.get("epsilon")?.unwrap_or(DEFAULT_EPSILON),
    };
    let report = density_estimate(&InvariantSet::orbit(root), &region, &schedule, epsilon)?;
    write_output(&cfg.out, "density.csv", "csv", &report.to_csv()?, manifest)?;
    write_output(&cfg.out, "density.json", "curvecount-density/1", &report.to_json()?, manifest)?;
    if let Some(exact) = &report.exact_density {
        println!("exact density {} = {:.12}", exact.symbolic(), exact.to_f64());
    }
    for e in &report.empirical_counts {
        println!("L={} count={} normalized={:.12}", e.l, e.count, e.normalized);
    }
    Ok(())
}

pub fn census_config(a: &CensusArgs, cfg: &RunConfig) -> Result<CensusConfig> {
    let (x, y) = parse_pair::<f64>(&a.traces, "traces")?;
    let structure = PuncturedTorusStructure::from_traces(x, y)?;
    let seed: CyclicWord = a.seed.parse()?;
    let mut c = CensusConfig::new(structure, seed, a.l_max);
    if let Some(s) = cfg.get("slack")? {
        c.slack = s;
    }
    if let Some(s) = cfg.get("certification_step")? {
        c.certification_step = s;
    }
    if let Some(s) = cfg.get("max_slack_steps")? {
        c.max_slack_steps = s;
    }
    if let Some(m) = a.max_classes.or(cfg.get("max_classes")?) {
        c.max_classes = m;
    }
    let ratio = cfg.get("checkpoint_ratio")?.unwrap_or(DEFAULT_CHECKPOINT_RATIO);
    let count = cfg.get("checkpoint_count")?.unwrap_or(DEFAULT_CHECKPOINT_COUNT);
    c.checkpoints = match &a.checkpoints {
        Some(s) => parse_list(s, "checkpoint")?,
        None => geometric_checkpoints(a.l_max, ratio, count),
    };
    c.validate()?;
    Ok(c)
}

pub fn cmd_census(a: &CensusArgs, cfg: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let c = census_config(a, cfg)?;
    let resume = a.resume.as_deref().map(Snapshot::load).transpose()?;
    let policy = SnapshotPolicy { path: a.snapshot.as_deref(), stop_after: a.stop_after };
    let result = type_census_resumable(&c, resume, policy)?;
    write_output(&cfg.out, "census.csv", "csv", &result.to_csv()?, manifest)?;
    write_output(&cfg.out, "census.json", "curvecount-census/1", &result.to_json()?, manifest)?;
    if let Some(p) = &a.snapshot {
        manifest.record_output(&p.display().to_string(), "curvecount-census-snapshot/1");
    }
    for r in &result.rows {
        println!(
            "L={:.6} N={} N/L^2={:.6} certified={}",
            r.l,
            r.n,
            r.normalized(),
            r.certified
        );
    }
    if let Some((cst, spread)) = result.growth_constant() {
        println!("growth constant ~ {cst:.6} (spread {spread:.6})");
    }
    Ok(())
}

pub fn cmd_normal_forms(a: &NormalFormArgs, cfg: &RunConfig, manifest: &mut Manifest) -> Result<()> {
    let track: Track = fs::read_to_string(&a.track)?.parse()?;
    let w = WeightVector::parse(&a.omega)?;
    let method = match a.method.as_deref() {
        None => None,
        Some("sweep") => Some(Method::Sweep),
        Some("exhaustive") => Some(Method::Exhaustive),
        Some(m) => return Err(Error::Config(format!("unknown method {m:?}; use sweep or exhaustive"))),
    };
    let opts = NormalFormOptions {
        leaves: a.leaves.or(cfg.get("leaves")?),
        method,
        budget: a.budget.or(cfg.get("budget")?).unwrap_or(crate::tracks::DEFAULT_STATE_BUDGET),
    };
    let result = count_normal_forms(&track, &w, a.k, &opts)?;
    write_output(
        &cfg.out,
        "normal_forms.json",
        "curvecount-normal-forms/1",
        &serde_json::to_string_pretty(&result)?,
        manifest,
    )?;
    println!("{}", result.count);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let m = parse_config("# c\nworkers = 3\n\nslack=1.5 # inline\n").unwrap();
        assert_eq!(m["workers"], "3");
        assert_eq!(m["slack"], "1.5");
        assert!(parse_config("nonsense").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<u64>("100, 1000,2000", "L").unwrap(), vec![100, 1000, 2000]);
        assert!(parse_list::<u64>("", "L").unwrap().is_empty());
        assert!(parse_pair::<u64>("1,2,3", "root").is_err());
    }
}
