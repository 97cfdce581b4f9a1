//! Command-line front end.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::{apra_threshold, measure_gaps};
use crate::config::{parse_methods, ScenarioConfig, SweepParam};
use crate::error::ConfigError;
use crate::error::{Error, Result};
use crate::geometry_channel::{bessel_j0, doppler_coefficient};
use crate::harness::{empirical_cdf, parse_grid, raw_rows, run_drops, run_sweep, summarize, summary_rows, write_csv, SweepSpec};
use crate::selflearn::calibration_index;
use crate::validation::run_validation;

#[derive(Debug, Parser)]
#[command(name = "robust-v2x", version, about = "Robust V2X spectrum and power allocation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set speed_kmh=120 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of OPT,BRRA,NRRA,APRA,SLAA,SLWA.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    drops: Option<usize>,
}

#[derive(Debug, Args)]
struct Output {
    /// CSV destination (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-drop rows to <out>.raw.csv.
    #[arg(long)]
    raw: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one configuration.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
    },
    /// Sweep one parameter over a grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        output: Output,
        /// p_max_cue, p_max_vue (dBm), speed (km/h), gamma_min_cue, gamma_min_vue (linear).
        #[arg(long)]
        param: String,
        /// START:STEP:END, inclusive.
        #[arg(long)]
        grid: String,
    },
    /// Solver-versus-oracle and statistical self-checks.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Random matrices and calibration runs.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Print reference constants.
    Oracle,
}

impl Common {
    fn resolve(&self) -> Result<ScenarioConfig, ConfigError> {
        let mut cfg = ScenarioConfig::load(self.config.as_deref(), &self.set)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(list) = &self.methods {
            cfg.methods = parse_methods(list)?;
        }
        if let Some(d) = self.drops {
            cfg.drops = d;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source }.into())
}

/// Logs the resolved configuration to stderr and next to the output.
fn log_config(cfg: &ScenarioConfig, extra: &str, out: Option<&Path>) -> Result<()> {
    let text = format!("{extra}{}", cfg.to_toml());
    eprintln!("# resolved configuration\n{text}");
    if let Some(out) = out {
        create(&sidecar(out, ".config.toml"))?.write_all(text.as_bytes())?;
    }
    Ok(())
}

fn write_rows<T: serde::Serialize>(rows: &[T], out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_csv(rows, create(p)?),
        None => write_csv(rows, io::stdout().lock()),
    }
}

fn raw_target(output: &Output) -> Result<Option<PathBuf>> {
    match (&output.out, output.raw) {
        (Some(o), true) => Ok(Some(sidecar(o, ".raw.csv"))),
        (None, true) => Err(ConfigError::Invalid("--raw requires --out".into()).into()),
        _ => Ok(None),
    }
}

fn cmd_run(common: &Common, output: &Output) -> Result<()> {
    let cfg = common.resolve()?;
    let raw = raw_target(output)?;
    log_config(&cfg, "", output.out.as_deref())?;
    let results = run_drops(&cfg)?;
    eprintln!("{:<6} {:>14} {:>12} {:>10} {:>10}", "method", "capacity_bps", "vue_sinr_db", "outage", "feasible");
    for m in &cfg.methods {
        if let Some(s) = summarize(&results, *m) {
            eprintln!(
                "{:<6} {:>14.1} {:>12.3} {:>10.5} {:>10.3}",
                m, s.mean_capacity_bps, s.mean_vue_sinr_db, s.outage_prob, s.feasibility_rate
            );
        }
    }
    let gaps = measure_gaps(&results);
    for g in gaps.d1.iter().chain(&gaps.d2) {
        eprintln!("{} capacity reduction vs OPT: {:.2}%", g.method, 100.0 * g.relative);
    }
    write_rows(&summary_rows("none", 0.0, &results, &cfg), output.out.as_deref())?;
    if let Some(path) = raw {
        write_csv(&raw_rows("none", 0.0, &results), create(&path)?)?;
    }
    if let Some(out) = &output.out {
        let mut rows = Vec::new();
        for m in &cfg.methods {
            let v: Vec<f64> = results
                .iter()
                .filter_map(|r| r.method(*m))
                .flat_map(|o| o.vues.iter().map(|v| v.mean_sinr_db))
                .collect();
            if let Ok(cdf) = empirical_cdf(&v) {
                rows.extend(cdf.table().into_iter().map(|(x, f)| (m.name(), x, f)));
            }
        }
        let mut w = csv::Writer::from_writer(create(&sidecar(out, ".sinr_cdf.csv"))?);
        w.write_record(["method", "vue_sinr_db", "cdf"])?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_sweep(common: &Common, output: &Output, param: &str, grid: &str) -> Result<()> {
    let cfg = common.resolve()?;
    let param: SweepParam = param.parse()?;
    let values = parse_grid(grid)?;
    let raw = raw_target(output)?;
    log_config(&cfg, &format!("# sweep {} over {grid}\n", param.name()), output.out.as_deref())?;
    let spec = SweepSpec { param, values, drops: cfg.drops, methods: cfg.methods.clone() };
    let out = run_sweep(&spec, &cfg)?;
    write_rows(&out.rows, output.out.as_deref())?;
    if let Some(path) = raw {
        write_csv(&out.raw, create(&path)?)?;
    }
    Ok(())
}

/// Returns whether every check passed.
fn cmd_validate(common: &Common, trials: usize) -> Result<bool> {
    let mut cfg = common.resolve()?;
    let drops = common.drops.unwrap_or(3);
    cfg.drops = drops;
    log_config(&cfg, "", None)?;
    let results = run_validation(&cfg, drops, trials);
    for r in &results {
        println!("{r}");
    }
    Ok(results.iter().all(|r| r.passed))
}

fn cmd_oracle() {
    println!("k*(N=3000, beta=0.05, varsigma=0.05) = {:?}", calibration_index(3000, 0.05, 0.05));
    for x in [0.0, 0.46542, 1.0, 2.404_825_557_695_773, 5.0, 6.865, 10.0] {
        println!("J0({x}) = {:.15}", bessel_j0(x).unwrap_or(f64::NAN));
    }
    for (v, f, t) in [(80.0, 2e9, 0.5e-3), (200.0, 5.9e9, 1e-3)] {
        println!("lambda(v={v} km/h, f={f:e} Hz, T={t:e} s) = {:.10}", doppler_coefficient(v, f, t).unwrap_or(f64::NAN));
    }
    println!("APRA threshold (Gamma=1, beta=0.05) = {:.3}", apra_threshold(1.0, 0.05));
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 1,
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Exit codes: 0 success, 1 validation or runtime failure, 2 bad configuration.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let res = match &cli.command {
        Command::Run { common, output } => cmd_run(common, output).map(|_| true),
        Command::Sweep { common, output, param, grid } => cmd_sweep(common, output, param, grid).map(|_| true),
        Command::Validate { common, trials } => cmd_validate(common, *trials),
        Command::Oracle => {
            cmd_oracle();
            Ok(true)
        }
    };
    match res {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
