//! Sweeps and file output for the gate simulations in `gatewave-core`.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde_json::{json, Value};
use toml::Table;

use config::{expand_sweep, merge, mode_defaults, parse_value, preset, set_path, Mode, RunConfig, SweepAxis};
use output::Format;
use run::{RunError, Table as Results};

#[derive(Debug, Clone, clap::Parser)]
#[command(name = "gatewave", version, about = "Photon-gate sweeps for chiral transmon-molecule arrays")]
pub struct Cli {
    /// Pipeline to run; optional with --preset.
    #[arg(value_enum)]
    pub mode: Option<Mode>,
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a key, e.g. `--set molecule.u=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Sweep a key: `a..b:points`, `a..b:log:points` or `v1,v2,...`.
    #[arg(long = "sweep", value_name = "KEY=RANGE")]
    pub sweep: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Figure preset: fig2, fig3a, fig3b, fig4a, fig4b.
    #[arg(long)]
    pub preset: Option<String>,
}

/// Layered configuration: preset, file, flags.
pub struct Plan {
    pub mode: Mode,
    pub name: String,
    pub table: Table,
    pub base: RunConfig,
}

pub fn plan(cli: &Cli) -> Result<Plan> {
    let mut table = Table::new();
    if let Some(p) = &cli.preset {
        merge(&mut table, preset(p)?);
    }
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: Table = toml::from_str(&text).map_err(|e| anyhow!("{}: {}", path.display(), e.message()))?;
        merge(&mut table, file);
    }
    for s in &cli.set {
        let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("--set `{s}`: expected KEY=VALUE"))?;
        set_path(&mut table, k.trim(), parse_value(v.trim()))?;
    }
    for s in &cli.sweep {
        let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("--sweep `{s}`: expected KEY=RANGE"))?;
        let axis: SweepAxis = v.trim().parse()?;
        let sweeps = table.entry("sweep").or_insert_with(|| toml::Value::Table(Table::new()));
        sweeps.as_table_mut().ok_or_else(|| anyhow!("`sweep` is not a table"))?.insert(k.trim().into(), toml::Value::try_from(axis)?);
    }
    if let Some(seed) = cli.seed {
        table.insert("seed".into(), toml::Value::Integer(i64::try_from(seed).context("--seed")?));
    }
    let from_file = RunConfig::from_table(table.clone())?.mode;
    let mode = match (cli.mode, from_file) {
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => bail!("no mode given"),
    };
    table.insert("mode".into(), toml::Value::String(mode.name().into()));
    let defaults = mode_defaults(mode, &table);
    merge(&mut table, defaults);
    let base = RunConfig::from_table(table.clone())?;
    let name = cli.preset.clone().unwrap_or_else(|| mode.name().into());
    Ok(Plan { mode, name, table, base })
}

pub struct Report {
    pub table: Results,
    pub seconds: f64,
    pub threads: usize,
}

/// Runs every sweep point on the worker pool; rows keep sweep order.
pub fn execute(plan: &Plan) -> Result<Result<Report, RunError>> {
    let tuples = expand_sweep(&plan.table)?;
    let start = Instant::now();
    let outcomes: Vec<_> = tuples.par_iter().map(|t| run::run_tuple(plan.mode, &t.config)).collect();
    let mut table = Results::default();
    for o in outcomes {
        match o {
            Ok(rows) => table.push(rows),
            Err(e) => return Ok(Err(e)),
        }
    }
    Ok(Ok(Report { table, seconds: start.elapsed().as_secs_f64(), threads: rayon::current_num_threads() }))
}

pub fn sidecar(plan: &Plan, report: &Report, format: Format) -> Result<Value> {
    let b = &plan.base;
    let columns: serde_json::Map<String, Value> = report.table.keys.iter().map(|(c, k)| (c.clone(), Value::String(k.clone()))).collect();
    Ok(json!({
        "version": env!("CARGO_PKG_VERSION"),
        "mode": plan.mode.name(),
        "preset": plan.name,
        "format": format,
        "seed": b.seed,
        "config": serde_json::to_value(b)?,
        "timings": { "wall_seconds": report.seconds, "rows": report.table.rows.len(), "threads": report.threads },
        "grids": { "points_1d": b.grid.points_1d, "points_2d": b.grid.points_2d, "half_width_sigmas": b.grid.half_width_sigmas },
        "kernel": b.two_photon.kernel,
        "elastic": b.two_photon.elastic,
        "rng": gatewave_core::imperfections::RNG_ALGORITHM,
        "parameter_columns": columns,
    }))
}

pub fn error_record(kind: &str, message: &str, params: Value) -> Value {
    json!({ "error": { "kind": kind, "message": message, "parameters": params } })
}

/// Sizes the global pool from `GATEWAVE_THREADS`.
pub fn init_threads() -> Result<()> {
    if let Ok(s) = std::env::var("GATEWAVE_THREADS") {
        let n: usize = s.parse().with_context(|| format!("GATEWAVE_THREADS=`{s}`"))?;
        if n == 0 {
            bail!("GATEWAVE_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}
