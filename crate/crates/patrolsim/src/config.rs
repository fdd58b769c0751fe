//! The JSON experiment plan.
//!
//! Precedence, highest first: command-line flags (`--seed`, `--out`,
//! `--jobs`), keys in the plan file, built-in defaults. Relative data paths
//! resolve against `data_dir` from the plan, then `PATROLSIM_DATA_DIR`,
//! then the directory holding the plan file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use patrolsim_core::gan::TrainConfig;
use patrolsim_core::geodata::BoundingBox;
use patrolsim_core::incident::City;
use patrolsim_core::simulate::{ReportedSemantics, SimConfig, SimMode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DATA_DIR_ENV: &str = "PATROLSIM_DATA_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Plan {
    pub seed: u64,
    pub replicates: u32,
    pub output_dir: PathBuf,
    pub data_dir: Option<PathBuf>,
    pub months: Vec<u8>,
    pub sim: SimSection,
    pub train: TrainSection,
    pub datasets: Vec<DatasetSpec>,
    pub cells: Vec<CellSpec>,
    pub sensitivity: Vec<SensitivitySpec>,
    pub debias: Option<DebiasSpec>,
    pub stats: StatsSpec,
    pub plots: PlotSpec,
    pub artifacts: Artifacts,
}

impl Default for Plan {
    fn default() -> Self {
        Plan {
            seed: 0,
            replicates: 1,
            output_dir: PathBuf::from("out"),
            data_dir: None,
            months: (2..=12).collect(),
            sim: SimSection::default(),
            train: TrainSection::default(),
            datasets: Vec::new(),
            cells: Vec::new(),
            sensitivity: Vec::new(),
            debias: None,
            stats: StatsSpec::default(),
            plots: PlotSpec::default(),
            artifacts: Artifacts::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub n_officers: usize,
    pub radius_ft: f64,
    pub p_officer: f64,
    pub reporting_prob: f64,
    pub expected_value: bool,
    pub reported_semantics: ReportedSemantics,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        SimSection {
            n_officers: d.n_officers,
            radius_ft: d.radius_ft,
            p_officer: d.p_officer,
            reporting_prob: d.reporting_prob,
            expected_value: d.expected_value,
            reported_semantics: d.reported_semantics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainSection { epochs: d.epochs, batch_size: d.batch_size, lr: d.lr, beta1: d.beta1, beta2: d.beta2 }
    }
}

impl TrainSection {
    pub fn to_config(self) -> TrainConfig {
        TrainConfig { epochs: self.epochs, batch_size: self.batch_size, lr: self.lr, beta1: self.beta1, beta2: self.beta2, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub city: City,
    pub year: i32,
    #[serde(default)]
    pub bbox: Option<BoundingBox>,
    pub source: DataSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum DataSource {
    Files(FileSource),
    Synthetic(SyntheticSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSource {
    pub crimes: PathBuf,
    pub boundaries: PathBuf,
    pub demographics: PathBuf,
    /// Column preset name; defaults by city.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub columns: ColumnOverrides,
    #[serde(default = "default_id_property")]
    pub id_property: String,
    #[serde(default)]
    pub name_property: Option<String>,
}

fn default_id_property() -> String {
    "id".into()
}

/// Per-key replacements for a column preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnOverrides {
    pub id: Option<String>,
    pub datetime: Option<String>,
    pub latitude: Option<String>,
    pub longitude: Option<String>,
    pub crime_type: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticLayout {
    /// 4×4 grid with an east-west racial gradient.
    Demo,
    /// One Black-majority and one White-majority neighborhood.
    TwoCluster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSource {
    pub layout: SyntheticLayout,
    pub seed: u64,
    pub incidents_per_month: usize,
    /// Share of incidents in the White-majority cluster (two-cluster only).
    pub white_share: f64,
}

impl Default for SyntheticSource {
    fn default() -> Self {
        SyntheticSource { layout: SyntheticLayout::Demo, seed: 1, incidents_per_month: 100, white_share: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub city: City,
    pub year: i32,
    pub mode: SimMode,
}

impl CellSpec {
    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.city.as_str().to_ascii_lowercase(), self.year, self.mode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    RadiusFt,
    NOfficers,
    ReportingProb,
}

impl Parameter {
    pub fn as_str(self) -> &'static str {
        match self {
            Parameter::RadiusFt => "radius_ft",
            Parameter::NOfficers => "n_officers",
            Parameter::ReportingProb => "reporting_prob",
        }
    }

    /// Inclusive upper bound accepted for sweep values.
    fn upper_bound(self) -> f64 {
        match self {
            Parameter::RadiusFt => 50_000.0,
            Parameter::NOfficers => 100_000.0,
            Parameter::ReportingProb => 1.0,
        }
    }

    pub fn apply(self, base: SimConfig, value: f64) -> SimConfig {
        match self {
            Parameter::RadiusFt => SimConfig { radius_ft: value, ..base },
            Parameter::NOfficers => SimConfig { n_officers: value as usize, ..base },
            Parameter::ReportingProb => SimConfig { reporting_prob: value, ..base },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitivitySpec {
    pub parameter: Parameter,
    pub values: Vec<f64>,
    pub city: City,
    pub year: i32,
    #[serde(default = "default_mode")]
    pub mode: SimMode,
}

fn default_mode() -> SimMode {
    SimMode::Detected
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebiasSpec {
    pub city: City,
    pub year: i32,
    /// Months pooled into the experiment; all plan months when absent.
    #[serde(default)]
    pub months: Option<Vec<u8>>,
    #[serde(default = "default_replace_fraction")]
    pub replace_fraction: f64,
    /// Overrides `train.epochs` for the three GANs of the experiment.
    #[serde(default)]
    pub epochs: Option<usize>,
}

fn default_replace_fraction() -> f64 {
    patrolsim_core::debias::DEFAULT_REPLACE_FRACTION
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSpec {
    /// z-score the covariates before OLS.
    pub standardize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotSpec {
    /// Upper y limit of the DIR chart; larger values are drawn at the clip.
    pub dir_clip: f64,
}

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec { dir_clip: 5.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Artifacts {
    /// Per-incident outcome files for every month-run.
    pub outcomes: bool,
    /// GAN checkpoints for every detected-mode month-run.
    pub checkpoints: bool,
    /// Per-epoch loss curves.
    pub losses: bool,
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// A parsed plan together with where its relative data paths resolve.
#[derive(Debug, Clone)]
pub struct LoadedPlan {
    pub plan: Plan,
    pub data_root: PathBuf,
}

impl LoadedPlan {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.data_root.join(p)
        }
    }

    pub fn dataset(&self, city: City, year: i32) -> Option<&DatasetSpec> {
        self.plan.datasets.iter().find(|d| d.city == city && d.year == year)
    }

    pub fn sim_config(&self, mode: SimMode, replicate: u32) -> SimConfig {
        let s = self.plan.sim;
        SimConfig {
            n_officers: s.n_officers,
            radius_ft: s.radius_ft,
            p_officer: s.p_officer,
            reporting_prob: s.reporting_prob,
            mode,
            seed: self.plan.seed,
            replicate,
            expected_value: s.expected_value,
            reported_semantics: s.reported_semantics,
        }
    }
}

pub fn parse_plan(text: &str) -> Result<Plan> {
    serde_json::from_str(text).map_err(|e| CliError::config(format!("plan: {e}")))
}

/// Read, override and validate a plan file.
pub fn load_plan(path: &Path, overrides: &Overrides, env_data_dir: Option<PathBuf>) -> Result<LoadedPlan> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut plan = parse_plan(&text)?;
    if let Some(seed) = overrides.seed {
        plan.seed = seed;
    }
    if let Some(out) = &overrides.output_dir {
        plan.output_dir = out.clone();
    }
    let plan_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let data_root = match (&plan.data_dir, env_data_dir) {
        (Some(d), _) if d.is_absolute() => d.clone(),
        (Some(d), _) => plan_dir.join(d),
        (None, Some(env)) => env,
        (None, None) => plan_dir,
    };
    let loaded = LoadedPlan { plan, data_root };
    validate(&loaded)?;
    Ok(loaded)
}

pub fn validate(loaded: &LoadedPlan) -> Result<()> {
    let plan = &loaded.plan;
    let bad = |msg: String| Err(CliError::Config(msg));
    if plan.replicates == 0 {
        return bad("replicates must be at least 1".into());
    }
    let months: BTreeSet<u8> = plan.months.iter().copied().collect();
    if months.len() != plan.months.len() || months.iter().any(|m| !(2..=12).contains(m)) {
        return bad(format!("months must be distinct values in 2..=12, got {:?}", plan.months));
    }
    loaded
        .sim_config(SimMode::Detected, 0)
        .validate()
        .map_err(|e| CliError::config(format!("sim: {e}")))?;
    let train = plan.train.to_config();
    if train.epochs == 0 {
        return bad("train.epochs must be at least 1".into());
    }
    train.validate().map_err(|e| CliError::config(format!("train: {e}")))?;

    let mut seen = BTreeSet::new();
    for d in &plan.datasets {
        if !seen.insert((d.city, d.year)) {
            return bad(format!("duplicate dataset for {} {}", d.city, d.year));
        }
        if let Some(b) = &d.bbox {
            if !b.is_valid() {
                return bad(format!("invalid bbox for {} {}", d.city, d.year));
            }
        }
        match &d.source {
            DataSource::Files(f) => {
                for p in [&f.crimes, &f.boundaries, &f.demographics] {
                    let full = loaded.resolve(p);
                    if !full.is_file() {
                        return Err(CliError::data(format!("data file not found: {}", full.display())));
                    }
                }
                if let Some(name) = &f.preset {
                    if crate::ingest::ColumnMap::preset(name).is_none() {
                        return bad(format!("unknown column preset {name:?}"));
                    }
                }
            }
            DataSource::Synthetic(s) => {
                if s.incidents_per_month == 0 || !(0.0..=1.0).contains(&s.white_share) {
                    return bad(format!("synthetic source for {} {} needs incidents and white_share in [0, 1]", d.city, d.year));
                }
            }
        }
    }
    let need = |city: City, year: i32, what: &str| -> Result<()> {
        if loaded.dataset(city, year).is_none() {
            return Err(CliError::config(format!("{what} references {city} {year}, which has no dataset")));
        }
        Ok(())
    };
    let mut cells = BTreeSet::new();
    for c in &plan.cells {
        need(c.city, c.year, "cell")?;
        if !cells.insert((c.city, c.year, c.mode)) {
            return bad(format!("duplicate cell {}", c.label()));
        }
    }
    for s in &plan.sensitivity {
        need(s.city, s.year, "sensitivity")?;
        if s.values.is_empty() {
            return bad(format!("sensitivity sweep over {} has no values", s.parameter.as_str()));
        }
        for &v in &s.values {
            if !(v > 0.0 && v <= s.parameter.upper_bound()) {
                return bad(format!("{} value {v} outside (0, {}]", s.parameter.as_str(), s.parameter.upper_bound()));
            }
            if s.parameter == Parameter::NOfficers && v.fract() != 0.0 {
                return bad(format!("n_officers value {v} is not an integer"));
            }
        }
    }
    if let Some(d) = &plan.debias {
        need(d.city, d.year, "debias")?;
        if !(0.0..1.0).contains(&d.replace_fraction) {
            return bad(format!("replace_fraction {} outside [0, 1)", d.replace_fraction));
        }
        if let Some(ms) = &d.months {
            if ms.is_empty() || ms.iter().any(|m| !months.contains(m)) {
                return bad(format!("debias months {ms:?} must be a non-empty subset of the plan months"));
            }
        }
        if d.epochs == Some(0) {
            return bad("debias.epochs must be at least 1".into());
        }
    }
    if plan.plots.dir_clip.is_nan() || plan.plots.dir_clip <= 0.0 {
        return bad("plots.dir_clip must be positive".into());
    }
    Ok(())
}
