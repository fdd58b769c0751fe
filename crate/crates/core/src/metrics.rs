//! Fairness metrics over per-group detection rates: disparate impact ratio,
//! demographic parity gap, Gini coefficient and bias amplification score,
//! plus their annual aggregates.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::incident::City;
use crate::simulate::{DetectionOutcome, MonthRunResult, RaceGroup, SimMode};

/// Detections (a count, or a probability mass in expected-value mode) and
/// crimes for one group.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupCount {
    pub detected: f64,
    pub total: usize,
}

impl GroupCount {
    pub fn rate(&self) -> Option<f64> {
        (self.total > 0).then(|| self.detected / self.total as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupRates {
    pub counts: [GroupCount; 3],
}

impl GroupRates {
    pub fn from_rates(black: Option<f64>, white: Option<f64>, neither: Option<f64>) -> Self {
        // unit-total counts reproduce the given rates exactly
        let c = |r: Option<f64>| r.map_or(GroupCount::default(), |r| GroupCount { detected: r, total: 1 });
        GroupRates { counts: [c(black), c(white), c(neither)] }
    }

    pub fn rate(&self, g: RaceGroup) -> Option<f64> {
        self.counts[g.index()].rate()
    }

    pub fn defined_rates(&self) -> Vec<f64> {
        RaceGroup::ALL.iter().filter_map(|g| self.rate(*g)).collect()
    }
}

/// Tally outcomes per group. In expected-value mode detections are weighted
/// by their probability instead of the Bernoulli outcome.
pub fn group_rates(outcomes: &[DetectionOutcome], expected_value: bool) -> GroupRates {
    let mut rates = GroupRates::default();
    for o in outcomes {
        let c = &mut rates.counts[o.group.index()];
        c.total += 1;
        c.detected += if expected_value {
            o.detection_prob
        } else if o.detected {
            1.0
        } else {
            0.0
        };
    }
    rates
}

/// Disparate impact ratio, or the reason it has no finite value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Dir {
    Finite(f64),
    /// White rate zero, Black rate positive.
    Infinite,
    /// Both rates zero, or a group is absent.
    Undefined,
}

impl Dir {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Dir::Finite(v) => Some(*v),
            _ => None,
        }
    }

    pub fn flag(&self) -> &'static str {
        match self {
            Dir::Finite(_) => "",
            Dir::Infinite => "infinite_positive_over_zero",
            Dir::Undefined => "undefined_zero_over_zero",
        }
    }
}

pub fn dir_from_rates(black: Option<f64>, white: Option<f64>) -> Dir {
    match (black, white) {
        (Some(b), Some(w)) if w > 0.0 => Dir::Finite(b / w),
        (Some(b), Some(_)) if b > 0.0 => Dir::Infinite,
        _ => Dir::Undefined,
    }
}

/// Black detection rate over White detection rate.
pub fn disparate_impact_ratio(rates: &GroupRates) -> Dir {
    dir_from_rates(rates.rate(RaceGroup::Black), rates.rate(RaceGroup::White))
}

/// Black detection rate minus White detection rate.
pub fn parity_gap(rates: &GroupRates) -> Option<f64> {
    Some(rates.rate(RaceGroup::Black)? - rates.rate(RaceGroup::White)?)
}

/// Gini coefficient `ΣΣ|rᵢ − rⱼ| / (2n Σ rᵢ)`, evaluated in O(n log n) via the
/// sorted form `Σ (2i − n + 1) r₍ᵢ₎ / (n Σ r)`. Empty or all-zero input gives 0.
pub fn gini(rates: &[f64]) -> f64 {
    let n = rates.len();
    let total: f64 = rates.iter().sum();
    if n == 0 || total == 0.0 {
        return 0.0;
    }
    let mut sorted = rates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let weighted: f64 = sorted.iter().enumerate().map(|(i, r)| (2.0 * i as f64 - nf + 1.0) * r).sum();
    weighted / (nf * total)
}

/// Parity gap times Gini; the sign follows the gap.
pub fn bias_amplification_score(parity_gap: f64, gini: f64) -> f64 {
    parity_gap * gini
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlyBiasRecord {
    pub city: City,
    pub year: i32,
    pub month: u8,
    pub mode: SimMode,
    pub replicate: u32,
    pub rates: GroupRates,
    pub dir: Dir,
    pub parity_gap: Option<f64>,
    pub gini: Option<f64>,
    pub bas: Option<f64>,
}

impl MonthlyBiasRecord {
    pub fn from_rates(city: City, year: i32, month: u8, mode: SimMode, replicate: u32, rates: GroupRates) -> Self {
        let defined = rates.defined_rates();
        let g = (!defined.is_empty()).then(|| gini(&defined));
        let gap = parity_gap(&rates);
        MonthlyBiasRecord {
            city,
            year,
            month,
            mode,
            replicate,
            rates,
            dir: disparate_impact_ratio(&rates),
            parity_gap: gap,
            gini: g,
            bas: gap.zip(g).map(|(p, g)| bias_amplification_score(p, g)),
        }
    }

    pub fn from_run(run: &MonthRunResult) -> Self {
        let rates = group_rates(&run.outcomes, run.expected_value);
        Self::from_rates(run.city, run.year, run.month, run.mode, run.replicate, rates)
    }
}

/// Month-averaged metrics for one (city, year, mode, replicate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnualSummary {
    pub city: City,
    pub year: i32,
    pub mode: SimMode,
    pub replicate: u32,
    pub avg_dir: Option<f64>,
    pub max_dir: Option<f64>,
    pub avg_parity_gap: Option<f64>,
    pub avg_gini: Option<f64>,
    pub avg_bas: Option<f64>,
    /// Months with a finite DIR above 1.
    pub months_dir_above_1: usize,
    /// Months with a finite DIR.
    pub months_counted: usize,
    pub months_dir_infinite: usize,
    pub months_total: usize,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Unweighted means over months. Returns `None` for an empty record list.
pub fn annual_summary(records: &[MonthlyBiasRecord]) -> Option<AnnualSummary> {
    let first = records.first()?;
    let dirs: Vec<f64> = records.iter().filter_map(|r| r.dir.finite()).collect();
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.parity_gap).collect();
    let ginis: Vec<f64> = records.iter().filter_map(|r| r.gini).collect();
    let bas: Vec<f64> = records.iter().filter_map(|r| r.bas).collect();
    Some(AnnualSummary {
        city: first.city,
        year: first.year,
        mode: first.mode,
        replicate: first.replicate,
        avg_dir: mean(&dirs),
        max_dir: dirs.iter().copied().reduce(f64::max),
        avg_parity_gap: mean(&gaps),
        avg_gini: mean(&ginis),
        avg_bas: mean(&bas),
        months_dir_above_1: dirs.iter().filter(|d| **d > 1.0).count(),
        months_counted: dirs.len(),
        months_dir_infinite: records.iter().filter(|r| r.dir == Dir::Infinite).count(),
        months_total: records.len(),
    })
}
