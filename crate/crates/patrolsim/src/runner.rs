//! Experiment orchestration: the month-run grid, parameter sweeps, the
//! rebalancing experiment and the neighborhood statistics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use log::{error, info, warn};
use patrolsim_core::debias::{run_debias, DebiasOutcome};
use patrolsim_core::gan::{train_gan, GanModel, TrainConfig};
use patrolsim_core::incident::City;
use patrolsim_core::metrics::{annual_summary, AnnualSummary, MonthlyBiasRecord};
use patrolsim_core::simulate::{run_month_detected_from_model, run_month_detected_with_model, run_month_reported, MonthRunResult, RunSeeds, SimMode};
use patrolsim_core::stats::{
    join_demographics, ols_fit, regression_design, tally_neighborhoods, CorrelationResult, NeighborhoodObservation, NeighborhoodTally, OlsFit,
    Predictor,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::checkpoint;
use crate::config::{CellSpec, LoadedPlan, SensitivitySpec};
use crate::error::{CliError, Result};
use crate::ingest::{load_dataset, Dataset};
use crate::reports::{self, SensitivityRow};

/// Datasets keyed by (city, year).
pub type Datasets = BTreeMap<(City, i32), Dataset>;

pub fn load_datasets(plan: &LoadedPlan) -> Result<Datasets> {
    plan.plan.datasets.iter().map(|spec| Ok(((spec.city, spec.year), load_dataset(spec, plan)?))).collect()
}

pub struct Runner {
    pub plan: LoadedPlan,
    pool: rayon::ThreadPool,
}

/// Seeds of one month-run, recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub cell: String,
    pub month: u8,
    pub replicate: u32,
    pub seeds: RunSeeds,
}

#[derive(Debug, Default)]
pub struct GridOutput {
    pub runs: Vec<MonthRunResult>,
    pub records: Vec<MonthlyBiasRecord>,
    pub annual: Vec<AnnualSummary>,
    pub failures: Vec<String>,
}

impl GridOutput {
    pub fn run_records(&self) -> Vec<RunRecord> {
        self.runs
            .iter()
            .map(|r| RunRecord {
                cell: CellSpec { city: r.city, year: r.year, mode: r.mode }.label(),
                month: r.month,
                replicate: r.replicate,
                seeds: r.seeds,
            })
            .collect()
    }
}

#[derive(Debug)]
pub struct StatsOutput {
    pub observations: Vec<NeighborhoodObservation>,
    pub dropped_zero_crime: usize,
    pub labels: [&'static str; 4],
    pub fit: OlsFit,
    pub correlations: Vec<(&'static str, CorrelationResult)>,
}

fn run_dir(out: &Path, cell: &CellSpec) -> PathBuf {
    out.join("runs").join(cell.label())
}

impl Runner {
    pub fn new(plan: LoadedPlan, jobs: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| CliError::Run(format!("thread pool: {e}")))?;
        Ok(Runner { plan, pool })
    }

    pub fn output_dir(&self) -> &Path {
        &self.plan.plan.output_dir
    }

    fn train(&self) -> TrainConfig {
        self.plan.plan.train.to_config()
    }

    fn dataset<'a>(&self, data: &'a Datasets, city: City, year: i32) -> Result<&'a Dataset> {
        data.get(&(city, year)).ok_or_else(|| CliError::config(format!("no dataset loaded for {city} {year}")))
    }

    /// One month-run, writing any requested per-run artifacts.
    fn run_one(&self, ds: &Dataset, cell: &CellSpec, month: u8, replicate: u32) -> Result<MonthRunResult> {
        let slice = ds.month(month).expect("task months come from the dataset");
        let sim = self.plan.sim_config(cell.mode, replicate);
        let artifacts = self.plan.plan.artifacts;
        let dir = run_dir(self.output_dir(), cell);
        let stem = format!("m{month:02}-r{replicate}");
        let run = match cell.mode {
            SimMode::Detected => {
                let (run, model) = run_month_detected_with_model(slice, &ds.neighborhoods, &ds.bbox, &self.train(), &sim)
                    .map_err(|e| CliError::Run(format!("{} month {month} replicate {replicate}: {e}", cell.label())))?;
                if artifacts.checkpoints {
                    checkpoint::save(&model, &dir.join(format!("{stem}-gan.json")))?;
                }
                if let (true, Some(h)) = (artifacts.losses, &run.loss_history) {
                    reports::write(&dir.join(format!("{stem}-losses.csv")), &reports::losses_csv(h))?;
                }
                if let Some(d) = run.loss_history.as_ref().and_then(|h| h.diagnostics) {
                    if d.mode_collapsed {
                        warn!("{} month {month}: possible mode collapse (worst cell ratio {:.2})", cell.label(), d.worst_cell_ratio);
                    }
                }
                run
            }
            SimMode::Reported => run_month_reported(slice, &ds.neighborhoods, &sim)
                .map_err(|e| CliError::Run(format!("{} month {month} replicate {replicate}: {e}", cell.label())))?,
        };
        if artifacts.outcomes {
            reports::write(&dir.join(format!("{stem}-outcomes.csv")), &reports::outcomes_csv(&run))?;
            let json = serde_json::to_string_pretty(&run.outcomes).expect("outcomes serialize");
            reports::write(&dir.join(format!("{stem}-outcomes.json")), json.as_bytes())?;
        }
        Ok(run)
    }

    /// Run every (cell, month, replicate) and merge in that order.
    pub fn run_grid(&self, data: &Datasets) -> Result<GridOutput> {
        let plan = &self.plan.plan;
        let mut tasks = Vec::new();
        for cell in &plan.cells {
            let ds = self.dataset(data, cell.city, cell.year)?;
            for &month in &plan.months {
                if ds.month(month).is_none() {
                    warn!("{}: no incidents in month {month}; skipped", cell.label());
                    continue;
                }
                for rep in 0..plan.replicates {
                    tasks.push((cell, ds, month, rep));
                }
            }
        }
        info!("grid: {} month-runs", tasks.len());
        let results: Vec<Result<MonthRunResult>> =
            self.pool.install(|| tasks.par_iter().map(|(cell, ds, month, rep)| self.run_one(ds, cell, *month, *rep)).collect());

        let mut out = GridOutput::default();
        for r in results {
            match r {
                Ok(run) => {
                    out.records.push(MonthlyBiasRecord::from_run(&run));
                    out.runs.push(run);
                }
                Err(e) => {
                    error!("{e}");
                    out.failures.push(e.to_string());
                }
            }
        }
        for cell in &plan.cells {
            for rep in 0..plan.replicates {
                let recs: Vec<MonthlyBiasRecord> = out
                    .records
                    .iter()
                    .filter(|r| r.city == cell.city && r.year == cell.year && r.mode == cell.mode && r.replicate == rep)
                    .cloned()
                    .collect();
                out.annual.extend(annual_summary(&recs));
            }
        }
        Ok(out)
    }

    /// Sweep one parameter over its values; each row aggregates all months
    /// of the base cell with the other parameters at their defaults.
    pub fn run_sensitivity(&self, data: &Datasets, spec: &SensitivitySpec) -> Result<Vec<SensitivityRow>> {
        let ds = self.dataset(data, spec.city, spec.year)?;
        let months: Vec<u8> = self.plan.plan.months.iter().copied().filter(|m| ds.month(*m).is_some()).collect();
        let base = self.plan.sim_config(spec.mode, 0);
        let train = self.train();
        let per_month: Vec<Result<Vec<MonthRunResult>>> = self.pool.install(|| {
            months
                .par_iter()
                .map(|&month| {
                    let slice = ds.month(month).expect("filtered above");
                    let fail = |e: patrolsim_core::Error| CliError::Run(format!("sensitivity {} month {month}: {e}", spec.parameter.as_str()));
                    match spec.mode {
                        SimMode::Detected => {
                            // the GAN seed does not depend on the swept value, so one model serves every value
                            let seeds = RunSeeds::derive(base.seed, slice.city, slice.year, month, SimMode::Detected, 0);
                            let (model, _): (GanModel, _) =
                                train_gan(&slice.locations(), &TrainConfig { seed: seeds.gan, ..train }, &ds.bbox).map_err(fail)?;
                            spec.values
                                .iter()
                                .map(|&v| run_month_detected_from_model(slice, &ds.neighborhoods, &model, &spec.parameter.apply(base, v)).map_err(fail))
                                .collect()
                        }
                        SimMode::Reported => spec
                            .values
                            .iter()
                            .map(|&v| run_month_reported(slice, &ds.neighborhoods, &spec.parameter.apply(base, v)).map_err(fail))
                            .collect(),
                    }
                })
                .collect()
        });
        let per_month = per_month.into_iter().collect::<Result<Vec<_>>>()?;

        let mut rows = Vec::new();
        for (i, &value) in spec.values.iter().enumerate() {
            let runs: Vec<&MonthRunResult> = per_month.iter().map(|m| &m[i]).collect();
            let records: Vec<MonthlyBiasRecord> = runs.iter().map(|r| MonthlyBiasRecord::from_run(r)).collect();
            let Some(summary) = annual_summary(&records) else { continue };
            rows.push(SensitivityRow {
                parameter: spec.parameter.as_str(),
                value,
                city: spec.city,
                year: spec.year,
                mode: spec.mode,
                summary,
                crimes: runs.iter().map(|r| r.outcomes.len()).sum(),
                detected: runs.iter().map(|r| if base.expected_value { r.total_expected() } else { r.total_detected() as f64 }).sum(),
                expected_reported: runs.iter().map(|r| r.expected_reported).sum(),
            });
        }
        Ok(rows)
    }

    pub fn run_debias(&self, data: &Datasets) -> Result<Option<DebiasOutcome>> {
        let Some(spec) = &self.plan.plan.debias else { return Ok(None) };
        let ds = self.dataset(data, spec.city, spec.year)?;
        let months = spec.months.clone().unwrap_or_else(|| self.plan.plan.months.clone());
        let incidents = ds.incidents(&months);
        let mut train = self.train();
        if let Some(e) = spec.epochs {
            train.epochs = e;
        }
        let sim = self.plan.sim_config(SimMode::Detected, 0);
        info!("debias: {} incidents from {} {}", incidents.len(), spec.city, spec.year);
        let out = run_debias(&incidents, &ds.neighborhoods, &ds.bbox, &train, &sim, spec.replace_fraction)
            .map_err(|e| CliError::Run(format!("debias: {e}")))?;
        Ok(Some(out))
    }

    /// Regression and correlations over neighborhood detection rates pooled
    /// by (city, year, mode).
    pub fn run_stats(&self, data: &Datasets, tallies: &[NeighborhoodTally]) -> Result<StatsOutput> {
        let mut observations = Vec::new();
        let mut dropped = 0;
        for ((city, year), ds) in data {
            let part = join_demographics(tallies, *city, *year, &ds.neighborhoods);
            observations.extend(part.observations);
            dropped += part.dropped_zero_crime;
        }
        if observations.is_empty() {
            return Err(CliError::data("no neighborhood detection rates to analyse; run the grid first"));
        }
        let (x, y) = regression_design(&observations, self.plan.plan.stats.standardize);
        let fit = ols_fit(&x, &y).map_err(|e| CliError::data(format!("regression over {} neighborhoods: {e}", observations.len())))?;
        let correlations = Predictor::ALL
            .iter()
            .map(|p| {
                let xs: Vec<f64> = observations.iter().map(|o| p.value(o)).collect();
                (p.label(), CorrelationResult::compute(&xs, &y))
            })
            .collect();
        Ok(StatsOutput {
            observations,
            dropped_zero_crime: dropped,
            labels: ["Intercept", "%Black", "Median Income", "Poverty Rate"],
            fit,
            correlations,
        })
    }
}

pub fn tallies(grid: &GridOutput) -> Vec<NeighborhoodTally> {
    tally_neighborhoods(&grid.runs)
}
