//! CSV layouts of every report. Floats use Rust's shortest round-trip
//! formatting, undefined values are empty cells, so reruns are byte-stable.

use std::path::Path;

use patrolsim_core::debias::{ConditionResult, DebiasOutcome};
use patrolsim_core::gan::LossHistory;
use patrolsim_core::incident::City;
use patrolsim_core::metrics::{AnnualSummary, Dir, MonthlyBiasRecord};
use patrolsim_core::simulate::{MonthRunResult, RaceGroup, SimMode};
use patrolsim_core::stats::{significance_stars, CorrelationResult, NeighborhoodTally, OlsFit};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const MONTHLY_HEADER: [&str; 13] =
    ["city", "year", "month", "mode", "rate_black", "rate_white", "rate_neither", "dir", "dir_flag", "parity_gap", "gini", "bas", "replicate"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn dir_value(d: Dir) -> String {
    opt(d.finite())
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new<S: AsRef<[u8]>>(header: &[S]) -> Self {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Table { w }
    }

    fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).expect("in-memory write");
    }

    fn finish(self) -> Vec<u8> {
        self.w.into_inner().expect("in-memory flush")
    }
}

pub fn monthly_csv(records: &[MonthlyBiasRecord]) -> Vec<u8> {
    let mut t = Table::new(&MONTHLY_HEADER);
    for r in records {
        t.row([
            r.city.to_string(),
            r.year.to_string(),
            r.month.to_string(),
            r.mode.to_string(),
            opt(r.rates.rate(RaceGroup::Black)),
            opt(r.rates.rate(RaceGroup::White)),
            opt(r.rates.rate(RaceGroup::Neither)),
            dir_value(r.dir),
            r.dir.flag().to_string(),
            opt(r.parity_gap),
            opt(r.gini),
            opt(r.bas),
            r.replicate.to_string(),
        ]);
    }
    t.finish()
}

pub fn annual_csv(rows: &[AnnualSummary]) -> Vec<u8> {
    let mut t = Table::new(&[
        "city",
        "year",
        "mode",
        "avg_dir",
        "max_dir",
        "avg_parity_gap",
        "avg_gini",
        "months_dir_above_1",
        "months_counted",
        "avg_bas",
        "months_dir_infinite",
        "months_total",
        "replicate",
    ]);
    for a in rows {
        t.row([
            a.city.to_string(),
            a.year.to_string(),
            a.mode.to_string(),
            opt(a.avg_dir),
            opt(a.max_dir),
            opt(a.avg_parity_gap),
            opt(a.avg_gini),
            a.months_dir_above_1.to_string(),
            a.months_counted.to_string(),
            opt(a.avg_bas),
            a.months_dir_infinite.to_string(),
            a.months_total.to_string(),
            a.replicate.to_string(),
        ]);
    }
    t.finish()
}

/// One sweep value aggregated over the base cell's months.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub parameter: &'static str,
    pub value: f64,
    pub city: City,
    pub year: i32,
    pub mode: SimMode,
    pub summary: AnnualSummary,
    pub crimes: usize,
    pub detected: f64,
    pub expected_reported: f64,
}

pub fn sensitivity_csv(rows: &[SensitivityRow]) -> Vec<u8> {
    let mut t = Table::new(&[
        "parameter",
        "value",
        "dir",
        "max_dir",
        "parity_gap",
        "gini",
        "months_counted",
        "months_dir_infinite",
        "crimes",
        "detected",
        "expected_reported",
        "city",
        "year",
        "mode",
    ]);
    for r in rows {
        t.row([
            r.parameter.to_string(),
            r.value.to_string(),
            opt(r.summary.avg_dir),
            opt(r.summary.max_dir),
            opt(r.summary.avg_parity_gap),
            opt(r.summary.avg_gini),
            r.summary.months_counted.to_string(),
            r.summary.months_dir_infinite.to_string(),
            r.crimes.to_string(),
            r.detected.to_string(),
            r.expected_reported.to_string(),
            r.city.to_string(),
            r.year.to_string(),
            r.mode.to_string(),
        ]);
    }
    t.finish()
}

fn condition_row(t: &mut Table, c: &ConditionResult) {
    let rate = |g: RaceGroup| opt(c.rates.rate(g));
    t.row([
        c.condition.as_str().to_string(),
        dir_value(c.dir),
        c.dir.flag().to_string(),
        rate(RaceGroup::Black),
        rate(RaceGroup::White),
        rate(RaceGroup::Neither),
        opt(c.parity_gap),
        opt(c.gini),
        c.training_points.to_string(),
        c.training_shares[0].to_string(),
        c.training_shares[1].to_string(),
        c.training_shares[2].to_string(),
    ]);
}

pub fn debias_csv(out: &DebiasOutcome) -> Vec<u8> {
    let mut t = Table::new(&[
        "condition",
        "dir",
        "dir_flag",
        "rate_black",
        "rate_white",
        "rate_neither",
        "parity_gap",
        "gini",
        "training_points",
        "train_share_black",
        "train_share_white",
        "train_share_neither",
    ]);
    condition_row(&mut t, &out.biased);
    condition_row(&mut t, &out.debiased);
    t.finish()
}

pub fn regression_csv(labels: &[&str], fit: &OlsFit) -> Vec<u8> {
    let mut t = Table::new(&["variable", "coefficient", "se", "t", "p", "stars", "n", "r_squared"]);
    let n = fit.residuals.len().to_string();
    for (j, label) in labels.iter().enumerate() {
        t.row([
            label.to_string(),
            fit.coefficients[j].to_string(),
            fit.std_errors[j].to_string(),
            fit.t_stats[j].to_string(),
            fit.p_values[j].to_string(),
            significance_stars(fit.p_values[j]).to_string(),
            n.clone(),
            fit.r_squared.to_string(),
        ]);
    }
    t.finish()
}

pub fn correlations_csv(rows: &[(&str, CorrelationResult)]) -> Vec<u8> {
    let mut t = Table::new(&["predictor", "pearson_r", "pearson_p", "spearman_rho", "spearman_p", "n"]);
    for (label, c) in rows {
        t.row([
            label.to_string(),
            opt(c.pearson.map(|x| x.coefficient)),
            opt(c.pearson.map(|x| x.p_value)),
            opt(c.spearman.map(|x| x.coefficient)),
            opt(c.spearman.map(|x| x.p_value)),
            c.n.to_string(),
        ]);
    }
    t.finish()
}

const TALLY_HEADER: [&str; 6] = ["city", "year", "mode", "neighborhood_id", "crimes", "detections"];

pub fn neighborhoods_csv(tallies: &[NeighborhoodTally]) -> Vec<u8> {
    let mut t = Table::new(&TALLY_HEADER);
    for n in tallies {
        t.row([n.city.to_string(), n.year.to_string(), n.mode.to_string(), n.neighborhood_id.clone(), n.crimes.to_string(), n.detections.to_string()]);
    }
    t.finish()
}

#[derive(Deserialize)]
struct TallyRow {
    city: String,
    year: i32,
    mode: String,
    neighborhood_id: String,
    crimes: usize,
    detections: f64,
}

pub fn read_neighborhoods_csv(path: &Path) -> Result<Vec<NeighborhoodTally>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    rdr.deserialize::<TallyRow>()
        .map(|r| {
            let r = r.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            Ok(NeighborhoodTally {
                city: City::parse(&r.city).ok_or_else(|| CliError::data(format!("unknown city {:?}", r.city)))?,
                year: r.year,
                mode: SimMode::parse(&r.mode).ok_or_else(|| CliError::data(format!("unknown mode {:?}", r.mode)))?,
                neighborhood_id: r.neighborhood_id,
                crimes: r.crimes,
                detections: r.detections,
            })
        })
        .collect()
}

pub fn outcomes_csv(run: &MonthRunResult) -> Vec<u8> {
    let mut t = Table::new(&["incident_id", "neighborhood_id", "group", "neighbors", "detection_prob", "detected", "reported"]);
    for o in &run.outcomes {
        t.row([
            o.incident_id.clone(),
            o.neighborhood_id.clone(),
            o.group.as_str().to_string(),
            o.neighbors.to_string(),
            o.detection_prob.to_string(),
            o.detected.to_string(),
            o.reported.map(|r| r.to_string()).unwrap_or_default(),
        ]);
    }
    t.finish()
}

pub fn losses_csv(h: &LossHistory) -> Vec<u8> {
    let mut t = Table::new(&["epoch", "g_loss", "d_loss"]);
    for (i, (g, d)) in h.g_loss.iter().zip(&h.d_loss).enumerate() {
        t.row([(i + 1).to_string(), g.to_string(), d.to_string()]);
    }
    t.finish()
}

/// A monthly.csv row as read back for plotting.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MonthlyRow {
    pub city: String,
    pub year: i32,
    pub month: u8,
    pub mode: String,
    pub rate_black: Option<f64>,
    pub rate_white: Option<f64>,
    pub rate_neither: Option<f64>,
    pub dir: Option<f64>,
    pub dir_flag: String,
    pub parity_gap: Option<f64>,
    pub gini: Option<f64>,
    pub bas: Option<f64>,
    pub replicate: u32,
}

impl MonthlyRow {
    pub fn series(&self) -> String {
        if self.replicate == 0 {
            format!("{} {} {}", self.city, self.year, self.mode)
        } else {
            format!("{} {} {} r{}", self.city, self.year, self.mode, self.replicate)
        }
    }
}

pub fn read_monthly_csv(path: &Path) -> Result<Vec<MonthlyRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    rdr.deserialize().map(|r| r.map_err(|e| CliError::data(format!("{}: {e}", path.display())))).collect()
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
