use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::incident::{City, Neighborhood};
use crate::neuralnet::Matrix;
use crate::simulate::{MonthRunResult, SimMode};

/// One neighborhood's pooled detection rate for a (city, year, mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodObservation {
    pub neighborhood_id: String,
    pub city: City,
    pub year: i32,
    pub mode: SimMode,
    pub crimes: usize,
    pub detection_rate: f64,
    pub pct_black: f64,
    pub pct_white: f64,
    pub median_income: f64,
    pub poverty_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeighborhoodDataset {
    pub observations: Vec<NeighborhoodObservation>,
    /// Neighborhoods without any crime in a (city, year, mode) group.
    pub dropped_zero_crime: usize,
}

/// Regressors available for correlation analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    PctBlack,
    PctWhite,
    MedianIncome,
    PovertyRate,
}

impl Predictor {
    pub const ALL: [Predictor; 4] = [Predictor::PctBlack, Predictor::PctWhite, Predictor::MedianIncome, Predictor::PovertyRate];

    pub fn label(self) -> &'static str {
        match self {
            Predictor::PctBlack => "%Black",
            Predictor::PctWhite => "%White",
            Predictor::MedianIncome => "Median Income",
            Predictor::PovertyRate => "Poverty Rate",
        }
    }

    pub fn value(self, o: &NeighborhoodObservation) -> f64 {
        match self {
            Predictor::PctBlack => o.pct_black,
            Predictor::PctWhite => o.pct_white,
            Predictor::MedianIncome => o.median_income,
            Predictor::PovertyRate => o.poverty_rate,
        }
    }
}

/// Detections pooled over all months (and replicates) of one neighborhood
/// in one (city, year, mode).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodTally {
    pub city: City,
    pub year: i32,
    pub mode: SimMode,
    pub neighborhood_id: String,
    pub crimes: usize,
    /// Detection count, or summed probabilities for expected-value runs.
    pub detections: f64,
}

/// Tallies sorted by (city, year, mode, neighborhood id).
pub fn tally_neighborhoods(runs: &[MonthRunResult]) -> Vec<NeighborhoodTally> {
    let mut pooled: BTreeMap<(City, i32, SimMode, &str), (usize, f64)> = BTreeMap::new();
    for run in runs {
        for o in &run.outcomes {
            let e = pooled.entry((run.city, run.year, run.mode, o.neighborhood_id.as_str())).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += if run.expected_value {
                o.detection_prob
            } else if o.detected {
                1.0
            } else {
                0.0
            };
        }
    }
    pooled
        .into_iter()
        .map(|((city, year, mode, id), (crimes, detections))| NeighborhoodTally {
            city,
            year,
            mode,
            neighborhood_id: id.into(),
            crimes,
            detections,
        })
        .collect()
}

/// Attach demographics to the tallies of one city-year. Every neighborhood
/// without crimes in a mode counts toward `dropped_zero_crime`.
pub fn join_demographics(tallies: &[NeighborhoodTally], city: City, year: i32, neighborhoods: &[Neighborhood]) -> NeighborhoodDataset {
    let mut by_mode: BTreeMap<SimMode, BTreeMap<&str, &NeighborhoodTally>> = BTreeMap::new();
    for t in tallies.iter().filter(|t| t.city == city && t.year == year) {
        by_mode.entry(t.mode).or_default().insert(t.neighborhood_id.as_str(), t);
    }
    let mut out = NeighborhoodDataset::default();
    for (mode, counts) in &by_mode {
        for n in neighborhoods {
            match counts.get(n.id.as_str()) {
                Some(t) if t.crimes > 0 => out.observations.push(NeighborhoodObservation {
                    neighborhood_id: n.id.clone(),
                    city,
                    year,
                    mode: *mode,
                    crimes: t.crimes,
                    detection_rate: t.detections / t.crimes as f64,
                    pct_black: n.pct_black,
                    pct_white: n.pct_white,
                    median_income: n.median_income,
                    poverty_rate: n.poverty_rate,
                }),
                _ => out.dropped_zero_crime += 1,
            }
        }
    }
    out
}

/// Pool runs of a single city's neighborhoods into regression observations.
pub fn build_neighborhood_dataset(runs: &[MonthRunResult], neighborhoods: &[Neighborhood]) -> NeighborhoodDataset {
    let tallies = tally_neighborhoods(runs);
    let mut keys: Vec<(City, i32)> = tallies.iter().map(|t| (t.city, t.year)).collect();
    keys.dedup();
    let mut out = NeighborhoodDataset::default();
    for (city, year) in keys {
        let part = join_demographics(&tallies, city, year, neighborhoods);
        out.observations.extend(part.observations);
        out.dropped_zero_crime += part.dropped_zero_crime;
    }
    out
}

/// Design matrix `[1, %Black, MedianIncome, PovertyRate]` and the response.
/// With `standardize`, the three covariates are z-scored.
pub fn regression_design(obs: &[NeighborhoodObservation], standardize: bool) -> (Matrix, Vec<f64>) {
    let cols: [fn(&NeighborhoodObservation) -> f64; 3] = [|o| o.pct_black, |o| o.median_income, |o| o.poverty_rate];
    let n = obs.len();
    let mut shift = [0.0; 3];
    let mut scale = [1.0; 3];
    if standardize && n > 1 {
        for (j, f) in cols.iter().enumerate() {
            let mean = obs.iter().map(f).sum::<f64>() / n as f64;
            let var = obs.iter().map(|o| { let d = f(o) - mean; d * d }).sum::<f64>() / (n - 1) as f64;
            shift[j] = mean;
            if var > 0.0 {
                scale[j] = libm::sqrt(var);
            }
        }
    }
    let x = Matrix::from_fn(n, 4, |i, j| if j == 0 { 1.0 } else { (cols[j - 1](&obs[i]) - shift[j - 1]) / scale[j - 1] });
    let y = obs.iter().map(|o| o.detection_rate).collect();
    (x, y)
}
