//! Command-line front end: `run`, `compare` and `validate`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, ConfigFile};
use crate::engine::{run_simulation, SimulationConfig, SimulationResult};
use crate::error::{Error, Result};
use crate::metrics::{
    self, write_plot_series, write_report_csv, write_trace_csv, ComparisonReport, PlotSeries,
    RunSummary,
};
use crate::model;
use crate::protocols::ProtocolKind;
use crate::rng::RNG_ALGORITHM;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "quadsim",
    version,
    about = "Q-LEACH / LEACH wireless sensor network simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one simulation and write its trace, plot data and manifest.
    Run(RunArgs),
    /// Run several protocols over a paired seed sweep.
    Compare(CompareArgs),
    /// Check a config file and print the effective values.
    Validate(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// TOML config file; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override a config value, e.g. `radio.bs_y=200`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Maximum number of rounds.
    #[arg(long, value_name = "N")]
    pub rounds: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_name = "NAME")]
    pub protocol: Option<String>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR", env = "QUADSIM_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Protocols to compare (comma-separated or repeated).
    #[arg(long, value_name = "NAME", value_delimiter = ',', default_values_t = [String::from("qleach"), String::from("leach")])]
    pub protocol: Vec<String>,
    /// Explicit seed; repeatable.
    #[arg(long, value_name = "U64", conflicts_with = "seeds")]
    pub seed: Vec<u64>,
    /// Use seeds 0..N-1.
    #[arg(long, value_name = "N")]
    pub seeds: Option<u64>,
    #[arg(long, value_name = "DIR", env = "QUADSIM_OUT")]
    pub out: Option<PathBuf>,
}

/// Everything needed to reproduce the files in one output directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub rng_algorithm: String,
    pub fingerprint: String,
    pub seeds: Vec<u64>,
    pub out_dir: String,
    pub files: Vec<String>,
    pub configs: Vec<ConfigFile>,
}

impl RunManifest {
    fn new(configs: &[SimulationConfig], seeds: &[u64], out_dir: &Path) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng_algorithm: RNG_ALGORITHM.to_string(),
            fingerprint: config::fingerprint(configs, seeds),
            seeds: seeds.to_vec(),
            out_dir: out_dir.display().to_string(),
            files: Vec::new(),
            configs: configs
                .iter()
                .map(|c| ConfigFile::parse(&config::render(c)).expect("rendered config parses"))
                .collect(),
        }
    }
}

/// Parses `args` and executes the command; returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(&a, stdout),
        Command::Compare(a) => cmd_compare(&a, stdout),
        Command::Validate(a) => return cmd_validate(&a, stdout, stderr),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_IO
            }
        }
    }
}

fn load_file(args: &ConfigArgs) -> Result<ConfigFile> {
    let mut overrides = args.overrides.clone();
    if let Some(r) = args.rounds {
        overrides.push(format!("simulation.max_rounds={r}"));
    }
    match &args.config {
        Some(path) => ConfigFile::load(path, &overrides),
        None => ConfigFile::parse_with_overrides("", &overrides),
    }
}

fn resolve_base(
    args: &ConfigArgs,
    protocol: Option<&str>,
    seed: Option<u64>,
) -> Result<SimulationConfig> {
    let mut file = load_file(args)?;
    if let Some(p) = protocol {
        file.simulation.protocol = Some(p.to_string());
    }
    if let Some(s) = seed {
        file.simulation.seed = Some(s);
    }
    file.resolve().into_result()
}

fn out_dir(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref().ok_or_else(|| {
        Error::config(
            "--out",
            "no output directory (pass --out or set QUADSIM_OUT)",
        )
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let path = dir.join("manifest.toml");
    let text = toml::to_string(manifest).expect("manifest serializes");
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn curve_series(res: &SimulationResult) -> Vec<(&'static str, PlotSeries)> {
    let rounds = || res.rounds.iter().map(|t| t.round as f64);
    let quadrants = model::deploy_nodes(
        res.config.n_nodes,
        res.config.field,
        res.config.initial_energy,
        res.config.seed,
    )
    .map(|nodes| model::alive_per_quadrant(&nodes))
    .unwrap_or_default();
    vec![
        (
            "fig3a",
            PlotSeries::numeric(
                "alive nodes per round",
                "round",
                "alive",
                rounds().zip(res.rounds.iter().map(|t| t.alive as f64)),
            ),
        ),
        (
            "fig3c",
            PlotSeries::numeric(
                "cumulative packets to base station",
                "round",
                "packets",
                rounds().zip(
                    metrics::cumulative_throughput(res)
                        .into_iter()
                        .map(|c| c as f64),
                ),
            ),
        ),
        (
            "fig3d",
            PlotSeries::numeric(
                "cluster heads per round",
                "round",
                "heads",
                rounds().zip(metrics::chs_per_round(res).into_iter().map(|c| c as f64)),
            ),
        ),
        (
            "fig3e",
            PlotSeries::numeric(
                "deployed nodes per quadrant",
                "quadrant",
                "nodes",
                quadrants
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| ((i + 1) as f64, c as f64)),
            ),
        ),
    ]
}

fn bar_series(title: &str, fnd: f64, lnd: f64, unstable: f64) -> PlotSeries {
    PlotSeries {
        title: title.to_string(),
        x_label: "metric".into(),
        y_label: "rounds".into(),
        points: vec![
            ("fnd".into(), fnd),
            ("lnd".into(), lnd),
            ("unstable".into(), unstable),
        ],
    }
}

fn write_plot(
    dir: &Path,
    name: String,
    series: &PlotSeries,
    fp: &str,
    files: &mut Vec<String>,
) -> Result<()> {
    write_plot_series(dir.join(&name), series, fp)?;
    files.push(name);
    Ok(())
}

pub fn cmd_run(args: &RunArgs, stdout: &mut dyn Write) -> Result<()> {
    let cfg = resolve_base(&args.config, args.protocol.as_deref(), args.seed)?;
    let dir = out_dir(&args.out)?;
    let res = run_simulation(&cfg)?;
    let summary = RunSummary::from_result(&res);

    create_dir(dir)?;
    let mut manifest = RunManifest::new(std::slice::from_ref(&cfg), &[cfg.seed], dir);
    let fp = manifest.fingerprint.clone();
    let stem = format!("{}-seed{}", cfg.protocol, cfg.seed);
    let trace = format!("trace-{stem}.csv");
    write_trace_csv(dir.join(&trace), &res.rounds)?;
    manifest.files.push(trace);
    for (fig, series) in curve_series(&res) {
        write_plot(
            dir,
            format!("plot-{stem}-{fig}.dat"),
            &series,
            &fp,
            &mut manifest.files,
        )?;
    }
    let bars = bar_series(
        "stability, lifetime and unstable period",
        summary.fnd.round as f64,
        summary.lnd.round as f64,
        summary.unstable as f64,
    );
    write_plot(
        dir,
        format!("plot-{stem}-fig3b.dat"),
        &bars,
        &fp,
        &mut manifest.files,
    )?;
    write_manifest(dir, &manifest)?;

    let censored = |c: bool| if c { " (censored)" } else { "" };
    let io = |e| Error::io("<stdout>", e);
    writeln!(stdout, "protocol   {}", cfg.protocol).map_err(io)?;
    writeln!(stdout, "seed       {}", cfg.seed).map_err(io)?;
    writeln!(stdout, "rounds     {}", res.rounds.len()).map_err(io)?;
    writeln!(
        stdout,
        "fnd        {}{}",
        summary.fnd.round,
        censored(summary.fnd.censored)
    )
    .map_err(io)?;
    writeln!(
        stdout,
        "lnd        {}{}",
        summary.lnd.round,
        censored(summary.lnd.censored)
    )
    .map_err(io)?;
    writeln!(stdout, "throughput {}", summary.total_packets_bs).map_err(io)?;
    writeln!(stdout, "manifest   {fp}").map_err(io)?;
    Ok(())
}

/// Runs every (protocol, seed) pair; seed `s` gives both protocols the same deployment.
pub fn run_sweep(
    base: &SimulationConfig,
    protocols: &[ProtocolKind],
    seeds: &[u64],
) -> Result<Vec<SimulationResult>> {
    let jobs: Vec<SimulationConfig> = protocols
        .iter()
        .flat_map(|&protocol| {
            seeds.iter().map(move |&seed| SimulationConfig {
                protocol,
                seed,
                ..base.clone()
            })
        })
        .collect();
    jobs.par_iter().map(run_simulation).collect()
}

pub fn cmd_compare(args: &CompareArgs, stdout: &mut dyn Write) -> Result<()> {
    let base = resolve_base(&args.config, None, None)?;
    let mut protocols = Vec::new();
    for name in &args.protocol {
        let p: ProtocolKind = name.parse()?;
        if !protocols.contains(&p) {
            protocols.push(p);
        }
    }
    if protocols.len() < 2 {
        return Err(Error::config(
            "--protocol",
            "compare needs at least two distinct protocols",
        ));
    }
    let seeds: Vec<u64> = match (args.seeds, args.seed.is_empty()) {
        (Some(n), _) => (0..n).collect(),
        (None, false) => args.seed.clone(),
        (None, true) => (0..20).collect(),
    };
    if seeds.is_empty() {
        return Err(Error::config("--seeds", "need at least one seed"));
    }
    let dir = out_dir(&args.out)?;

    let results = run_sweep(&base, &protocols, &seeds)?;
    let configs: Vec<SimulationConfig> = protocols
        .iter()
        .map(|&protocol| SimulationConfig {
            protocol,
            ..base.clone()
        })
        .collect();
    let mut manifest = RunManifest::new(&configs, &seeds, dir);
    let fp = manifest.fingerprint.clone();
    let report = ComparisonReport::new(
        fp.clone(),
        &protocols,
        &seeds,
        results.iter().map(RunSummary::from_result).collect(),
    );

    create_dir(dir)?;
    write_report_csv(dir.join("report.csv"), &report)?;
    manifest.files.push("report.csv".into());
    for &p in &protocols {
        // curves come from the first seed; bars carry the medians over all seeds
        let first = results
            .iter()
            .find(|r| r.config.protocol == p && r.config.seed == seeds[0])
            .expect("every pair was run");
        for (fig, series) in curve_series(first) {
            write_plot(
                dir,
                format!("plot-{p}-{fig}.dat"),
                &series,
                &fp,
                &mut manifest.files,
            )?;
        }
        let agg = report.aggregate(p).expect("aggregate per protocol");
        let bars = bar_series(
            "median stability, lifetime and unstable period",
            agg.fnd.median,
            agg.lnd.median,
            agg.unstable.median,
        );
        write_plot(
            dir,
            format!("plot-{p}-fig3b.dat"),
            &bars,
            &fp,
            &mut manifest.files,
        )?;
    }
    write_manifest(dir, &manifest)?;

    let io = |e| Error::io("<stdout>", e);
    writeln!(
        stdout,
        "{} runs ({} protocols x {} seeds), medians:",
        results.len(),
        protocols.len(),
        seeds.len()
    )
    .map_err(io)?;
    write!(stdout, "{}", report.summary_table()).map_err(io)?;
    writeln!(stdout, "manifest {fp}").map_err(io)?;
    Ok(())
}

pub fn cmd_validate(args: &ConfigArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let file = match load_file(args) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return if e.is_config() { EXIT_CONFIG } else { EXIT_IO };
        }
    };
    let resolved = file.resolve();
    for w in &resolved.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    for e in &resolved.errors {
        let _ = writeln!(stderr, "error: {e}");
    }
    match resolved.config {
        Some(cfg) if resolved.errors.is_empty() => {
            let _ = writeln!(stdout, "# effective configuration");
            let _ = write!(stdout, "{}", config::render(&cfg));
            EXIT_OK
        }
        _ => EXIT_CONFIG,
    }
}
