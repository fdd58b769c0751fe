//! Synthetic rebalancing experiment: train a patrol GAN on the raw incident
//! history and on a history where part of the records were swapped for
//! label-balanced conditional samples, then compare detection disparities
//! over the same incidents.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gan::{rebalance_training_set, sample_patrol, train_conditional_gan, train_gan, LossHistory, TrainConfig};
use crate::geodata::{BoundingBox, LatLon};
use crate::incident::{CrimeIncident, MonthSlice, Neighborhood};
use crate::metrics::{gini, group_rates, Dir, disparate_impact_ratio, parity_gap, GroupRates};
use crate::seed::{derive, rng_from};
use crate::simulate::{assign_race, evaluate_patrols, NeighborhoodLookup, RaceGroup, RunSeeds, SimConfig, SimMode};

pub const DEFAULT_REPLACE_FRACTION: f64 = 0.30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Biased,
    Debiased,
}

impl Condition {
    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Biased => "biased",
            Condition::Debiased => "debiased",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub training_points: usize,
    /// Label shares of the patrol GAN's training set, (Black, White, Neither).
    pub training_shares: [f64; 3],
    pub rates: GroupRates,
    pub dir: Dir,
    pub parity_gap: Option<f64>,
    pub gini: Option<f64>,
    pub patrols: Vec<LatLon>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebiasOutcome {
    pub incidents: usize,
    pub replace_fraction: f64,
    pub biased: ConditionResult,
    pub debiased: ConditionResult,
    pub conditional_history: LossHistory,
}

fn shares(data: &[(LatLon, RaceGroup)]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for (_, g) in data {
        c[g.index()] += 1.0;
    }
    let n = data.len().max(1) as f64;
    c.map(|x| x / n)
}

/// Run both conditions over `incidents` (already assigned to neighborhoods).
///
/// Both patrol GANs share their training seed, patrol seed and detection
/// draws, so with `replace_fraction == 0` the conditions coincide exactly.
pub fn run_debias(
    incidents: &[CrimeIncident],
    neighborhoods: &[Neighborhood],
    bbox: &BoundingBox,
    gan_cfg: &TrainConfig,
    sim_cfg: &SimConfig,
    replace_fraction: f64,
) -> Result<DebiasOutcome> {
    let first = incidents.first().ok_or(Error::EmptyData("debias incidents"))?;
    let cfg = SimConfig { mode: SimMode::Detected, ..*sim_cfg };
    cfg.validate()?;
    let root = derive(cfg.seed, "debias");
    let seeds = RunSeeds {
        month: root,
        race: derive(root, "race"),
        gan: derive(root, "patrol-gan"),
        patrol: derive(root, "patrol"),
        report: derive(root, "report"),
        detect: derive(root, "detect"),
    };

    let lookup = NeighborhoodLookup::new(neighborhoods);
    let mut race_rng = rng_from(seeds.race);
    let labeled = incidents
        .iter()
        .map(|c| Ok((c.location, assign_race(c, &lookup, &mut race_rng)?)))
        .collect::<Result<Vec<_>>>()?;

    let cgan_cfg = TrainConfig { seed: derive(root, "conditional-gan"), ..*gan_cfg };
    let (cgan, conditional_history) = train_conditional_gan(&labeled, &cgan_cfg, bbox)?;
    let rebalanced = rebalance_training_set(&labeled, &cgan, replace_fraction, &mut rng_from(derive(root, "rebalance")))?;

    // pooled evaluation slice; month 0 marks "whole period"
    let slice = MonthSlice { city: first.city, year: first.timestamp.year, month: 0, incidents: incidents.to_vec() };
    let patrol_cfg = TrainConfig { seed: seeds.gan, ..*gan_cfg };
    let run = |condition: Condition, data: &[(LatLon, RaceGroup)]| -> Result<ConditionResult> {
        let points: Vec<LatLon> = data.iter().map(|(p, _)| *p).collect();
        let (model, _) = train_gan(&points, &patrol_cfg, bbox)?;
        let patrols = sample_patrol(&model, cfg.n_officers, &mut rng_from(seeds.patrol))?;
        let result = evaluate_patrols(&slice, neighborhoods, patrols, None, &cfg, seeds)?;
        let rates = group_rates(&result.outcomes, cfg.expected_value);
        let defined = rates.defined_rates();
        Ok(ConditionResult {
            condition,
            training_points: data.len(),
            training_shares: shares(data),
            dir: disparate_impact_ratio(&rates),
            parity_gap: parity_gap(&rates),
            gini: (!defined.is_empty()).then(|| gini(&defined)),
            rates,
            patrols: result.patrols,
        })
    };
    let biased = run(Condition::Biased, &labeled)?;
    let debiased = run(Condition::Debiased, &rebalanced)?;
    Ok(DebiasOutcome { incidents: incidents.len(), replace_fraction, biased, debiased, conditional_history })
}
