//! Subcommand implementations shared by the binary and the tests.

use std::path::{Path, PathBuf};
use std::time::SystemTime;

use log::{info, warn};
use serde::Serialize;

use crate::config::{load_plan, Overrides};
use crate::error::{CliError, Result};
use crate::ingest::{sha256_hex, IngestSummary, SourceRecord};
use crate::plots;
use crate::reports;
use crate::runner::{load_datasets, tallies, Datasets, RunRecord, Runner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Grid,
    Sensitivity,
    Debias,
    Stats,
    Plots,
    All,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Grid => "grid",
            Command::Sensitivity => "sensitivity",
            Command::Debias => "debias",
            Command::Stats => "stats",
            Command::Plots => "plots",
            Command::All => "all",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    pub jobs: usize,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct DatasetEntry {
    city: String,
    year: i32,
    sources: Vec<SourceRecord>,
    summary: IngestSummary,
}

#[derive(Serialize)]
struct OutputEntry {
    file: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    created_utc: String,
    seed: u64,
    replicates: u32,
    jobs: usize,
    plan_sha256: String,
    datasets: Vec<DatasetEntry>,
    runs: Vec<RunRecord>,
    outputs: Vec<OutputEntry>,
    failures: Vec<String>,
}

/// Output files written by one invocation, with checksums for the manifest.
struct Outputs {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl Outputs {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        reports::write(&self.dir.join(name), bytes)?;
        self.entries.push(OutputEntry { file: name.to_string(), sha256: sha256_hex(bytes) });
        info!("wrote {}", self.dir.join(name).display());
        Ok(())
    }

    fn record(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        let name = path.strip_prefix(&self.dir).unwrap_or(path).to_string_lossy().replace('\\', "/");
        self.entries.push(OutputEntry { file: name, sha256: sha256_hex(&bytes) });
        Ok(())
    }
}

fn ingest_tables(data: &Datasets) -> (Vec<u8>, Vec<u8>) {
    let mut a = csv::Writer::from_writer(Vec::new());
    let mut m = csv::Writer::from_writer(Vec::new());
    let w = "in-memory write";
    a.write_record(["city", "year", "rows", "unparseable", "other_year", "filtered", "unassigned", "kept", "neighborhoods", "months"]).expect(w);
    m.write_record(["city", "year", "month", "incidents"]).expect(w);
    for ((city, year), ds) in data {
        let s = &ds.summary;
        a.write_record([
            city.to_string(),
            year.to_string(),
            s.rows.to_string(),
            s.unparseable.to_string(),
            s.other_year.to_string(),
            s.filtered.to_string(),
            s.unassigned.to_string(),
            s.kept.to_string(),
            s.neighborhoods.to_string(),
            ds.slices.len().to_string(),
        ])
        .expect(w);
        for slice in &ds.slices {
            m.write_record([city.to_string(), year.to_string(), slice.month.to_string(), slice.len().to_string()]).expect(w);
        }
    }
    (a.into_inner().expect(w), m.into_inner().expect(w))
}

/// Run one subcommand. Returns an error carrying the exit code on failure;
/// per-run failures still leave the successful outputs on disk.
pub fn execute(inv: &Invocation, env_data_dir: Option<PathBuf>) -> Result<()> {
    let overrides = Overrides { seed: inv.seed, output_dir: inv.out.clone() };
    let plan = load_plan(&inv.config, &overrides, env_data_dir)?;
    let plan_bytes = std::fs::read(&inv.config).map_err(|e| CliError::io(&inv.config, e))?;
    let runner = Runner::new(plan, inv.jobs)?;
    let p = &runner.plan.plan;
    let out_dir = p.output_dir.clone();
    let mut outputs = Outputs { dir: out_dir.clone(), entries: Vec::new() };
    let mut failures = Vec::new();
    let mut runs = Vec::new();

    let nothing_to_do = match inv.command {
        Command::Grid => p.cells.is_empty(),
        Command::Sensitivity => p.sensitivity.is_empty(),
        Command::Debias => p.debias.is_none(),
        Command::All => p.cells.is_empty() && p.sensitivity.is_empty() && p.debias.is_none(),
        Command::Ingest | Command::Stats | Command::Plots => false,
    };
    if nothing_to_do {
        info!("plan has nothing for `{}` to do", inv.command.as_str());
        return Ok(());
    }

    let needs_data = inv.command != Command::Plots || out_dir.join("neighborhoods.csv").is_file();
    let data = if needs_data { load_datasets(&runner.plan)? } else { Datasets::new() };
    let mut stats_tallies = None;

    if inv.command == Command::Ingest {
        let (a, m) = ingest_tables(&data);
        outputs.put("ingest.csv", &a)?;
        outputs.put("ingest_months.csv", &m)?;
    }
    if matches!(inv.command, Command::Grid | Command::All) && !p.cells.is_empty() {
        let grid = runner.run_grid(&data)?;
        outputs.put("monthly.csv", &reports::monthly_csv(&grid.records))?;
        outputs.put("annual.csv", &reports::annual_csv(&grid.annual))?;
        let t = tallies(&grid);
        outputs.put("neighborhoods.csv", &reports::neighborhoods_csv(&t))?;
        stats_tallies = Some(t);
        runs = grid.run_records();
        failures.extend(grid.failures);
    }
    if matches!(inv.command, Command::Sensitivity | Command::All) && !p.sensitivity.is_empty() {
        let mut rows = Vec::new();
        for spec in &p.sensitivity {
            rows.extend(runner.run_sensitivity(&data, spec)?);
        }
        outputs.put("sensitivity.csv", &reports::sensitivity_csv(&rows))?;
    }
    if matches!(inv.command, Command::Debias | Command::All) {
        if let Some(d) = runner.run_debias(&data)? {
            outputs.put("debias.csv", &reports::debias_csv(&d))?;
        }
    }
    let mut observations = None;
    if inv.command == Command::Stats || (inv.command == Command::All && stats_tallies.is_some()) {
        let t = match stats_tallies.take() {
            Some(t) => t,
            None => {
                let path = out_dir.join("neighborhoods.csv");
                if !path.is_file() {
                    return Err(CliError::data(format!("{} not found; run `grid` first", path.display())));
                }
                reports::read_neighborhoods_csv(&path)?
            }
        };
        let s = runner.run_stats(&data, &t)?;
        info!("stats: {} neighborhood observations ({} zero-crime dropped), R² = {:.3}", s.observations.len(), s.dropped_zero_crime, s.fit.r_squared);
        outputs.put("regression.csv", &reports::regression_csv(&s.labels, &s.fit))?;
        outputs.put("correlations.csv", &reports::correlations_csv(&s.correlations))?;
        observations = Some(s.observations);
    }
    if matches!(inv.command, Command::Plots | Command::All) {
        let monthly = out_dir.join("monthly.csv");
        if monthly.is_file() {
            let rows = reports::read_monthly_csv(&monthly)?;
            let plot_dir = out_dir.join("plots");
            let mut written = plots::emit_monthly_plots(&rows, &plot_dir, p.plots.dir_clip)?;
            if observations.is_none() && inv.command == Command::Plots && !data.is_empty() {
                let t = reports::read_neighborhoods_csv(&out_dir.join("neighborhoods.csv"))?;
                observations = runner.run_stats(&data, &t).ok().map(|s| s.observations);
            }
            if let Some(obs) = &observations {
                written.extend(plots::emit_scatter_plots(obs, &plot_dir)?);
            }
            for w in written {
                outputs.record(&w)?;
            }
        } else if inv.command == Command::Plots {
            return Err(CliError::data(format!("{} not found; run `grid` first", monthly.display())));
        } else {
            warn!("no monthly.csv; skipping plots");
        }
    }

    let manifest = Manifest {
        tool: "patrolsim",
        version: env!("CARGO_PKG_VERSION"),
        command: inv.command.as_str(),
        created_utc: chrono::DateTime::<chrono::Utc>::from(SystemTime::now()).to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        seed: p.seed,
        replicates: p.replicates,
        jobs: inv.jobs,
        plan_sha256: sha256_hex(&plan_bytes),
        datasets: data
            .values()
            .map(|d| DatasetEntry { city: d.city.to_string(), year: d.year, sources: d.sources.clone(), summary: d.summary.clone() })
            .collect(),
        runs,
        outputs: outputs.entries,
        failures: failures.clone(),
    };
    reports::write(&out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("manifest serializes").as_bytes())?;

    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Run(format!("{} month-run(s) failed; see manifest.json", failures.len())))
    }
}
