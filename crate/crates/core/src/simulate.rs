//! One month of patrol simulation: race assignment, patrol deployment and
//! Noisy-OR detection, in detected (GAN-directed) or reported mode.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gan::{sample_patrol, train_gan, GanModel, LossHistory, TrainConfig};
use crate::geodata::{BoundingBox, GridIndex, LatLon};
use crate::incident::{City, CrimeIncident, MonthSlice, Neighborhood};
use crate::seed::{derive, rng_from, SeedHasher};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RaceGroup {
    Black,
    White,
    Neither,
}

impl RaceGroup {
    pub const ALL: [RaceGroup; 3] = [RaceGroup::Black, RaceGroup::White, RaceGroup::Neither];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RaceGroup::Black => "Black",
            RaceGroup::White => "White",
            RaceGroup::Neither => "Neither",
        }
    }

    pub fn parse(s: &str) -> Option<RaceGroup> {
        RaceGroup::ALL.into_iter().find(|g| g.as_str().eq_ignore_ascii_case(s.trim()))
    }
}

impl fmt::Display for RaceGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Detected,
    Reported,
}

impl SimMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimMode::Detected => "detected",
            SimMode::Reported => "reported",
        }
    }

    pub fn parse(s: &str) -> Option<SimMode> {
        match s.trim().to_ascii_lowercase().as_str() {
            "detected" | "det" => Some(SimMode::Detected),
            "reported" | "rep" => Some(SimMode::Reported),
            _ => None,
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How reported mode turns citizen reports into detections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportedSemantics {
    /// Patrols are placed at reported-crime locations, then Noisy-OR applies.
    #[default]
    PatrolFromReports,
    /// A crime is detected exactly when it is reported.
    ReportIsDetection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub n_officers: usize,
    pub radius_ft: f64,
    pub p_officer: f64,
    pub reporting_prob: f64,
    pub mode: SimMode,
    pub seed: u64,
    pub replicate: u32,
    /// Use detection probabilities instead of Bernoulli outcomes for rates.
    pub expected_value: bool,
    pub reported_semantics: ReportedSemantics,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_officers: 60,
            radius_ft: 700.0,
            p_officer: 0.85,
            reporting_prob: 0.521,
            mode: SimMode::Detected,
            seed: 0,
            replicate: 0,
            expected_value: false,
            reported_semantics: ReportedSemantics::PatrolFromReports,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.n_officers >= 1
            && self.radius_ft > 0.0
            && self.p_officer > 0.0
            && self.p_officer <= 1.0
            && self.reporting_prob > 0.0
            && self.reporting_prob <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(alloc::format!("{self:?}")))
        }
    }
}

/// Seeds of every stream used by one month-run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSeeds {
    pub month: u64,
    pub race: u64,
    pub gan: u64,
    pub patrol: u64,
    pub report: u64,
    pub detect: u64,
}

impl RunSeeds {
    pub fn derive(master: u64, city: City, year: i32, month: u8, mode: SimMode, replicate: u32) -> Self {
        let cell_month = SeedHasher::new(master)
            .str(city.as_str())
            .u64(year as u64)
            .u64(u64::from(month))
            .u64(u64::from(replicate));
        // race draws are shared by both modes of the same month
        let race = cell_month.str("race").finish();
        let month_seed = cell_month.str(mode.as_str()).finish();
        RunSeeds {
            month: month_seed,
            race,
            gan: derive(month_seed, "gan"),
            patrol: derive(month_seed, "patrol"),
            report: derive(month_seed, "report"),
            detect: derive(month_seed, "detect"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub incident_id: String,
    pub neighborhood_id: String,
    pub group: RaceGroup,
    /// Patrols within the detection radius.
    pub neighbors: usize,
    pub detection_prob: f64,
    pub detected: bool,
    pub reported: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthRunResult {
    pub city: City,
    pub year: i32,
    pub month: u8,
    pub mode: SimMode,
    pub replicate: u32,
    pub expected_value: bool,
    pub seeds: RunSeeds,
    pub outcomes: Vec<DetectionOutcome>,
    pub patrols: Vec<LatLon>,
    pub group_counts: [usize; 3],
    pub reported_count: usize,
    pub expected_reported: f64,
    pub loss_history: Option<LossHistory>,
}

impl MonthRunResult {
    pub fn total_detected(&self) -> usize {
        self.outcomes.iter().filter(|o| o.detected).count()
    }

    pub fn total_expected(&self) -> f64 {
        self.outcomes.iter().map(|o| o.detection_prob).sum()
    }
}

/// Name-indexed view over a neighborhood list.
pub struct NeighborhoodLookup<'a> {
    by_id: BTreeMap<&'a str, &'a Neighborhood>,
}

impl<'a> NeighborhoodLookup<'a> {
    pub fn new(neighborhoods: &'a [Neighborhood]) -> Self {
        NeighborhoodLookup { by_id: neighborhoods.iter().map(|n| (n.id.as_str(), n)).collect() }
    }

    pub fn get(&self, id: &str) -> Option<&'a Neighborhood> {
        self.by_id.get(id).copied()
    }
}

/// Categorical draw from the incident's neighborhood proportions. Consumes
/// exactly one uniform from `rng`.
pub fn assign_race<R: Rng + ?Sized>(incident: &CrimeIncident, lookup: &NeighborhoodLookup<'_>, rng: &mut R) -> Result<RaceGroup> {
    let id = incident.neighborhood_id.as_deref().unwrap_or("");
    let n = lookup.get(id).ok_or_else(|| Error::UnknownNeighborhood(id.into()))?;
    Ok(draw_group(n.proportions(), rng))
}

pub fn draw_group<R: Rng + ?Sized>(props: [f64; 3], rng: &mut R) -> RaceGroup {
    let u: f64 = rng.random();
    if u < props[0] {
        RaceGroup::Black
    } else if u < props[0] + props[1] {
        RaceGroup::White
    } else {
        RaceGroup::Neither
    }
}

/// `1 - (1 - p)^k`.
pub fn noisy_or_from_count(k: usize, p_officer: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    1.0 - libm::pow(1.0 - p_officer, k as f64)
}

/// Noisy-OR detection probability over the patrols within `radius_ft`.
pub fn noisy_or_probability(crime: LatLon, patrols: &GridIndex, radius_ft: f64, p_officer: f64) -> f64 {
    noisy_or_from_count(patrols.count_within(crime, radius_ft), p_officer)
}

fn patrol_index(patrols: &[LatLon], radius_ft: f64) -> GridIndex {
    let frame = BoundingBox::hull(patrols, 0.01).unwrap_or(BoundingBox { lat_min: 0.0, lat_max: 1.0, lon_min: 0.0, lon_max: 1.0 });
    GridIndex::build(patrols, radius_ft, &frame)
}

fn check_slice(slice: &MonthSlice) -> Result<()> {
    if slice.is_empty() {
        return Err(Error::EmptyData("month slice"));
    }
    Ok(())
}

/// Assign races and evaluate detection against fixed patrol points.
///
/// `reported` carries per-incident report flags in reported mode. Race draws
/// come from `seeds.race` and detection draws from `seeds.detect`, one
/// uniform per incident each, so outcomes stay aligned across parameter
/// sweeps.
pub fn evaluate_patrols(
    slice: &MonthSlice,
    neighborhoods: &[Neighborhood],
    patrols: Vec<LatLon>,
    reported: Option<&[bool]>,
    cfg: &SimConfig,
    seeds: RunSeeds,
) -> Result<MonthRunResult> {
    cfg.validate()?;
    let lookup = NeighborhoodLookup::new(neighborhoods);
    let mut race_rng = rng_from(seeds.race);
    let mut detect_rng = rng_from(seeds.detect);
    let index = patrol_index(&patrols, cfg.radius_ft);
    let report_is_detection = cfg.mode == SimMode::Reported && cfg.reported_semantics == ReportedSemantics::ReportIsDetection;

    let mut outcomes = Vec::with_capacity(slice.len());
    let mut group_counts = [0usize; 3];
    for (i, c) in slice.incidents.iter().enumerate() {
        let group = assign_race(c, &lookup, &mut race_rng)?;
        group_counts[group.index()] += 1;
        let report = reported.map(|r| r[i]);
        let u: f64 = detect_rng.random();
        let (neighbors, prob, detected) = if report_is_detection {
            let was = report.unwrap_or(false);
            (0, cfg.reporting_prob, was)
        } else {
            let k = index.count_within(c.location, cfg.radius_ft);
            let prob = noisy_or_from_count(k, cfg.p_officer);
            (k, prob, u < prob)
        };
        outcomes.push(DetectionOutcome {
            incident_id: c.id.clone(),
            neighborhood_id: c.neighborhood_id.clone().unwrap_or_default(),
            group,
            neighbors,
            detection_prob: prob,
            detected,
            reported: report,
        });
    }
    let reported_count = reported.map_or(0, |r| r.iter().filter(|x| **x).count());
    let expected_reported = if cfg.mode == SimMode::Reported { cfg.reporting_prob * slice.len() as f64 } else { 0.0 };
    Ok(MonthRunResult {
        city: slice.city,
        year: slice.year,
        month: slice.month,
        mode: cfg.mode,
        replicate: cfg.replicate,
        expected_value: cfg.expected_value,
        seeds,
        outcomes,
        patrols,
        group_counts,
        reported_count,
        expected_reported,
        loss_history: None,
    })
}

/// Detected mode, also returning the trained GAN.
pub fn run_month_detected_with_model(
    slice: &MonthSlice,
    neighborhoods: &[Neighborhood],
    bbox: &BoundingBox,
    gan_cfg: &TrainConfig,
    sim_cfg: &SimConfig,
) -> Result<(MonthRunResult, GanModel)> {
    check_slice(slice)?;
    let cfg = SimConfig { mode: SimMode::Detected, ..*sim_cfg };
    cfg.validate()?;
    let seeds = RunSeeds::derive(cfg.seed, slice.city, slice.year, slice.month, cfg.mode, cfg.replicate);
    let train_cfg = TrainConfig { seed: seeds.gan, ..*gan_cfg };
    let (model, history) = train_gan(&slice.locations(), &train_cfg, bbox)?;
    let mut result = run_month_detected_from_model(slice, neighborhoods, &model, &cfg)?;
    result.loss_history = Some(history);
    Ok((result, model))
}

/// Deploy patrols from an already trained month model. The model must come
/// from the same month and master seed for results to match a fresh run;
/// parameter sweeps use this to train once per month.
pub fn run_month_detected_from_model(
    slice: &MonthSlice,
    neighborhoods: &[Neighborhood],
    model: &GanModel,
    sim_cfg: &SimConfig,
) -> Result<MonthRunResult> {
    check_slice(slice)?;
    let cfg = SimConfig { mode: SimMode::Detected, ..*sim_cfg };
    cfg.validate()?;
    let seeds = RunSeeds::derive(cfg.seed, slice.city, slice.year, slice.month, cfg.mode, cfg.replicate);
    let patrols = sample_patrol(model, cfg.n_officers, &mut rng_from(seeds.patrol))?;
    evaluate_patrols(slice, neighborhoods, patrols, None, &cfg, seeds)
}

/// Train the patrol GAN on the month's crimes, deploy `n_officers` generated
/// patrols and evaluate Noisy-OR detection for every crime.
pub fn run_month_detected(
    slice: &MonthSlice,
    neighborhoods: &[Neighborhood],
    bbox: &BoundingBox,
    gan_cfg: &TrainConfig,
    sim_cfg: &SimConfig,
) -> Result<MonthRunResult> {
    run_month_detected_with_model(slice, neighborhoods, bbox, gan_cfg, sim_cfg).map(|(r, _)| r)
}

/// Reported mode: each crime is reported with `reporting_prob`; patrols are
/// drawn without replacement from reported locations (all of them when fewer
/// than `n_officers` were reported).
pub fn run_month_reported(slice: &MonthSlice, neighborhoods: &[Neighborhood], sim_cfg: &SimConfig) -> Result<MonthRunResult> {
    check_slice(slice)?;
    let cfg = SimConfig { mode: SimMode::Reported, ..*sim_cfg };
    cfg.validate()?;
    let seeds = RunSeeds::derive(cfg.seed, slice.city, slice.year, slice.month, cfg.mode, cfg.replicate);
    let mut report_rng = rng_from(seeds.report);
    let reported: Vec<bool> = slice.incidents.iter().map(|_| report_rng.random::<f64>() < cfg.reporting_prob).collect();
    let mut pool: Vec<LatLon> = slice.incidents.iter().zip(&reported).filter(|(_, r)| **r).map(|(c, _)| c.location).collect();
    let patrols = match cfg.reported_semantics {
        ReportedSemantics::PatrolFromReports => {
            let take = cfg.n_officers.min(pool.len());
            let mut rng = rng_from(seeds.patrol);
            // partial Fisher-Yates: a smaller draw is a prefix of a larger one
            for i in 0..take {
                let j = rng.random_range(i..pool.len());
                pool.swap(i, j);
            }
            pool.truncate(take);
            pool
        }
        ReportedSemantics::ReportIsDetection => Vec::new(),
    };
    evaluate_patrols(slice, neighborhoods, patrols, Some(&reported), &cfg, seeds)
}

/// Dispatch on `sim_cfg.mode`.
pub fn run_month(
    slice: &MonthSlice,
    neighborhoods: &[Neighborhood],
    bbox: &BoundingBox,
    gan_cfg: &TrainConfig,
    sim_cfg: &SimConfig,
) -> Result<MonthRunResult> {
    match sim_cfg.mode {
        SimMode::Detected => run_month_detected(slice, neighborhoods, bbox, gan_cfg, sim_cfg),
        SimMode::Reported => run_month_reported(slice, neighborhoods, sim_cfg),
    }
}
